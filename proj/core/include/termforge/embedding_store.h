#ifndef TERMFORGE_EMBEDDING_STORE_H_
#define TERMFORGE_EMBEDDING_STORE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "termforge/candidate_extraction.h"

namespace termforge {

// TEMB layout, all integers little-endian:
//   "TEMB" | u16 version | u32 dim | u64 count |
//   count x (u16 key_len | key bytes | dim x f32)
inline constexpr uint16_t kEmbeddingFormatVersion = 1;

inline constexpr char kContextualSeparator = '\x01';
inline constexpr char kLayerSeparator = '\x02';

enum class Layer { kLast, kSecondLast };

std::string_view layer_tag(Layer layer);  // "L" / "SL"

struct EmbeddingRecord {
  std::string key;
  std::vector<float> vector;

  bool operator==(const EmbeddingRecord&) const = default;
};

// surface 0x01 sentence_id [0x02 layer]
std::string contextual_key(std::string_view surface, uint64_t sentence_id,
                           std::optional<Layer> layer = std::nullopt);

struct ContextualKey {
  std::string surface;
  uint64_t sentence_id = 0;
  std::optional<Layer> layer;
};
std::optional<ContextualKey> parse_contextual_key(std::string_view key);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(uint32_t dim) : dim_(dim) {}

  uint32_t dim() const { return dim_; }
  size_t size() const { return records_.size(); }
  const std::vector<EmbeddingRecord>& records() const { return records_; }

  // Rejects wrong dimensions, non-finite components, oversize keys and
  // duplicate keys with kFormat.
  void add(EmbeddingRecord record);
  const std::vector<float>* find(std::string_view key) const;

  // Contextual records for surface in ascending sentence-id order; when
  // layer is given only records tagged with it are returned.
  std::vector<std::pair<uint64_t, const std::vector<float>*>> contextual(
      std::string_view surface, std::optional<Layer> layer = std::nullopt) const;

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
  static EmbeddingTable read(std::istream& in);
  static EmbeddingTable read(const std::filesystem::path& path);

 private:
  uint32_t dim_ = 0;
  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, size_t> index_;
  std::unordered_map<std::string, std::vector<size_t>> by_surface_;
};

enum class VectorProvenance { kStaticAvg, kContextualAvg, kClusterAvg };

struct CandidateVector {
  std::vector<std::string> surfaces;
  std::vector<double> vector;
  VectorProvenance provenance = VectorProvenance::kStaticAvg;
};

// Mean of the constituent unigram vectors. A missing unigram raises
// kMissingDependency naming the token.
CandidateVector compose_static(const Candidate& candidate, const EmbeddingTable& table);

// Mean of per-sentence contextual vectors; empty input raises kNoContext.
CandidateVector compose_contextual(std::string_view surface,
                                   std::span<const std::vector<float>* const> records);

// Componentwise mean; dimension mismatch raises kFormat.
CandidateVector merge_cluster_vectors(std::span<const CandidateVector> members);

struct FilteredCandidate {
  std::string surface;
  std::string reason;
};

struct ComposeResult {
  std::vector<CandidateVector> vectors;
  std::vector<FilteredCandidate> filtered;
};

ComposeResult compose_static_all(std::span<const Candidate> candidates, const EmbeddingTable& table);

double cosine(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

}  // namespace termforge

#endif  // TERMFORGE_EMBEDDING_STORE_H_
