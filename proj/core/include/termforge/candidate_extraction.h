#ifndef TERMFORGE_CANDIDATE_EXTRACTION_H_
#define TERMFORGE_CANDIDATE_EXTRACTION_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/corpus_store.h"

namespace termforge {

class LabelSnapshot;

class StopWords {
 public:
  StopWords() = default;
  explicit StopWords(std::set<std::string> words);

  // Built-in English list.
  static StopWords english();
  // One word per line; blank lines and '#' comments ignored.
  static StopWords load(const std::filesystem::path& path);

  // Case-insensitive.
  bool contains(std::string_view word) const;
  size_t size() const { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
};

struct Candidate {
  std::string surface;  // lowercase, single-space separated
  uint32_t n = 0;
  uint64_t sentence_freq = 0;

  auto operator<=>(const Candidate&) const = default;
};

struct CandidateSet {
  std::string name;
  std::vector<Candidate> members;  // unique, sorted by surface

  bool contains(std::string_view surface) const;
};

struct NpAnnotation {
  SentenceId sentence_id = 0;
  std::string np;
};

std::vector<NpAnnotation> read_np_annotations(std::istream& in);
std::vector<NpAnnotation> read_np_annotations(const std::filesystem::path& path);

struct ExtractionIssue {
  size_t record = 0;  // 0-based position in the annotation stream
  std::string reason;
};

struct ExtractionResult {
  std::vector<Candidate> candidates;  // sorted by surface
  size_t accepted_nps = 0;
  size_t discarded_stopword_only = 0;
  size_t discarded_length = 0;
  std::vector<ExtractionIssue> rejected;
};

// Leading stop-words are stripped, all-stop-word NPs dropped, the rest
// lowercased; only 1-, 2- and 3-grams survive. sentence_freq comes from the
// store's occurrence index.
ExtractionResult extract_candidates(const SentenceStore& store,
                                    const std::vector<NpAnnotation>& annotations,
                                    const StopWords& stopwords);

// Normalized candidate surface for an NP, or empty if it is dropped.
std::string normalize_np(std::string_view np, const StopWords& stopwords);

struct Thresholds {
  uint64_t unigram = 50;
  uint64_t bigram = 50;
  uint64_t trigram = 10;
};

struct LnnpSets {
  CandidateSet lnnp1;
  CandidateSet lnnp2;
  CandidateSet lnnp3;
  CandidateSet lnnp23;
};

LnnpSets apply_thresholds(const std::vector<Candidate>& candidates,
                          const Thresholds& thresholds = {});

struct NpSpan {
  std::string text;
  size_t first_token = 0;  // index into the whitespace tokens
  size_t token_count = 0;  // whitespace tokens covered
};

// Low-fidelity chunker for when no parser output is available: maximal
// runs of non-stop-word, non-punctuation tokens. Punctuation attached to a
// token also ends the run.
std::vector<NpSpan> fallback_chunker(std::string_view sentence, const StopWords& stopwords);

std::vector<NpAnnotation> chunk_store(const SentenceStore& store, const StopWords& stopwords);

struct AugmentResult {
  CandidateSet star;       // frequent NAWT members of the base set
  CandidateSet augmented;  // star plus frequent co-redirects of any length
  std::vector<std::string> missing_labels;
};

AugmentResult build_augmented_set(const CandidateSet& base, const LabelSnapshot& labels,
                                  const SentenceStore& store, uint64_t min_freq = 100);

void write_candidates(std::ostream& out, const std::vector<Candidate>& candidates);
void write_candidates(const std::filesystem::path& path, const std::vector<Candidate>& candidates);
std::vector<Candidate> read_candidates(std::istream& in);
std::vector<Candidate> read_candidates(const std::filesystem::path& path);

}  // namespace termforge

#endif  // TERMFORGE_CANDIDATE_EXTRACTION_H_
