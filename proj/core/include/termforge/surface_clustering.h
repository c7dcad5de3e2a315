#ifndef TERMFORGE_SURFACE_CLUSTERING_H_
#define TERMFORGE_SURFACE_CLUSTERING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/corpus_store.h"
#include "termforge/embedding_store.h"

namespace termforge {

// ---------------------------------------------------------------------------
// Rule-based pre-merging.

// form -> lemma table for derivational variants (intelligent -> intelligence).
class WordFormLexicon {
 public:
  void add(std::string_view form, std::string_view lemma);
  std::optional<std::string> lemma(std::string_view form) const;
  size_t size() const { return forms_.size(); }

  // TSV: form<TAB>lemma per line, '#' comments allowed.
  static WordFormLexicon load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string, std::less<>> forms_;
};

// Case-folds, splits at white space and punctuation, strips one trailing
// 's' per token, maps tokens through the lexicon and concatenates the
// result without separators.
std::string rbc_normalize(std::string_view surface, const WordFormLexicon* lexicon = nullptr);

struct RbcCluster {
  std::string normal_form;
  std::vector<std::string> members;  // sorted
};

// Groups surfaces with equal normal forms; output sorted by first member.
std::vector<RbcCluster> rbc_merge(std::span<const std::string> surfaces,
                                  const WordFormLexicon* lexicon = nullptr);

// ---------------------------------------------------------------------------
// Index-level clusterers. Labels are dense cluster ids in [0, k).

using Assignment = std::vector<size_t>;
inline constexpr size_t kUnassigned = std::numeric_limits<size_t>::max();

struct AgglomerativeResult {
  Assignment labels;             // kUnassigned for filtered items
  std::vector<size_t> filtered;  // zero vectors
};

// Average linkage on cosine distance, merging the closest pair (lowest
// (i, j) on ties) until k clusters remain.
AgglomerativeResult agglomerative_cosine(std::span<const std::vector<double>> vectors, size_t k);

double within_cluster_ss(std::span<const std::vector<double>> points, const Assignment& labels,
                         size_t k);

struct HartiganEvent {
  enum class Kind { kInitial, kMove };
  Kind kind = Kind::kInitial;
  size_t restart = 0;
  size_t point = 0;
  size_t from = 0;
  size_t to = 0;
  double predicted_decrease = 0;
  const Assignment* labels = nullptr;
};

struct HartiganOptions {
  size_t k = 1;
  uint64_t seed = 0;
  size_t restarts = 5;
  size_t max_sweeps = 100;
  bool parallel = true;  // ignored when on_event is set
  std::function<void(const HartiganEvent&)> on_event;
};

struct HartiganResult {
  Assignment labels;
  double wcss = 0;
  size_t best_restart = 0;
  size_t sweeps = 0;
  size_t moves = 0;
  size_t reseeds = 0;
};

// Distance-weighted seeding, then Hartigan single-point moves: x leaves C
// for C' when |C|/(|C|-1)*||x-mu_C||^2 exceeds |C'|/(|C'|+1)*||x-mu_C'||^2.
// Best of `restarts` runs by WCSS.
HartiganResult hartigan_kmeans(std::span<const std::vector<double>> points,
                               const HartiganOptions& options);

struct TfFeatureSpace {
  std::vector<std::string> vocabulary;  // by information gain, descending
  std::vector<double> gains;            // bits, parallel to vocabulary
  std::vector<std::vector<uint32_t>> tf;  // candidate x vocabulary
};

// contexts[c] holds the tokenized context sentences of candidate c. Each
// sentence is labeled with its candidate; a token's gain is
// H(label) - H(label | token present).
TfFeatureSpace information_gain_features(
    const std::vector<std::vector<std::vector<std::string>>>& contexts, size_t max_features = 2000);

struct SibEvent {
  enum class Kind { kInitial, kReassign };
  Kind kind = Kind::kInitial;
  size_t restart = 0;
  size_t item = 0;
  size_t from = 0;
  size_t to = 0;
  const Assignment* labels = nullptr;
};

struct SibOptions {
  size_t k = 1;
  uint64_t seed = 0;
  size_t restarts = 5;
  size_t max_sweeps = 50;
  bool parallel = true;  // ignored when on_event is set
  std::function<void(const SibEvent&)> on_event;
};

struct SibResult {
  Assignment labels;             // kUnassigned for filtered items
  std::vector<size_t> filtered;  // zero-mass vectors
  double mutual_information = 0;  // I(T;Y), nats
  size_t best_restart = 0;
  size_t sweeps = 0;
};

// Sequential information bottleneck over count vectors.
SibResult sib_cluster(const std::vector<std::vector<uint32_t>>& counts, const SibOptions& options);

// I(T;Y) in nats for a hard partition of count vectors (p(x) proportional
// to mass). Items labeled kUnassigned are ignored.
double sib_mutual_information(const std::vector<std::vector<uint32_t>>& counts,
                              const Assignment& labels);

// ---------------------------------------------------------------------------
// Two-phase pipeline.

enum class ClusterMethod { kAggCosine, kHartigan, kSib };
enum class ClusterMode { kStaticAgg, kStaticHar, kTfSib, kContextualHar };

std::string_view cluster_method_name(ClusterMethod m);
std::string_view cluster_mode_name(ClusterMode m);
ClusterMode parse_cluster_mode(std::string_view name);

using Partition = std::vector<std::vector<std::string>>;

struct ClusteringSolution {
  ClusterMethod method = ClusterMethod::kHartigan;
  ClusterMode mode = ClusterMode::kStaticHar;
  size_t k = 0;  // effective target
  uint64_t seed = 0;
  size_t restarts = 0;
  Partition clusters;  // members sorted, clusters sorted by first member
  std::vector<FilteredCandidate> filtered;

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
  static ClusteringSolution read(std::istream& in);
  static ClusteringSolution read(const std::filesystem::path& path);
};

struct ClusteringInputs {
  std::vector<std::string> surfaces;
  const WordFormLexicon* lexicon = nullptr;
  const EmbeddingTable* static_table = nullptr;      // static modes
  const EmbeddingTable* contextual_table = nullptr;  // CONTEXTUAL_HAR
  const SentenceStore* store = nullptr;              // TF_SIB
};

struct ClusteringOptions {
  ClusterMode mode = ClusterMode::kStaticHar;
  size_t k = 1;  // clamped to the number of RBC groups
  uint64_t seed = 0;
  size_t restarts = 5;
  size_t contextual_sentences = 5;
  Layer contextual_layer = Layer::kSecondLast;
  size_t tf_contexts = 100;
  size_t tf_features = 2000;
};

// RBC first, then the mode's representation and clusterer over RBC groups;
// groups are never split.
ClusteringSolution run_clustering(const ClusteringInputs& inputs, const ClusteringOptions& options);

// Canonical ordering used by every solution.
Partition canonical_partition(Partition partition);

}  // namespace termforge

#endif  // TERMFORGE_SURFACE_CLUSTERING_H_
