#ifndef TERMFORGE_CORPUS_STORE_H_
#define TERMFORGE_CORPUS_STORE_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace termforge {

using SentenceId = uint64_t;

struct Sentence {
  SentenceId id = 0;
  std::string text;  // NFC-normalized
  uint32_t token_count = 0;
};

struct ContextSet {
  std::string surface;
  std::vector<SentenceId> ids;  // ascending
  std::vector<std::string> texts;
};

struct IngestOptions {
  size_t sample_size = 1'000'000;
  uint64_t seed = 0;
  uint32_t min_tokens = 10;
};

struct IngestStats {
  size_t lines_read = 0;
  size_t too_short = 0;
  size_t line_breaks = 0;
  size_t duplicates = 0;
  size_t survivors = 0;
};

// Immutable sampled corpus with a unigram postings index. Multi-token
// lookups intersect postings and then verify contiguity, so any n-gram can
// be queried without materializing an n-gram index.
class SentenceStore {
 public:
  static constexpr uint16_t kIndexVersion = 1;

  // Reads one sentence per line, applies the length / line-break /
  // duplicate filters and keeps a seeded uniform sample of the survivors.
  // Ids are assigned in source order of the sampled sentences.
  static SentenceStore ingest(std::istream& source, const IngestOptions& options,
                              IngestStats* stats = nullptr);
  static SentenceStore ingest_file(const std::filesystem::path& path,
                                   const IngestOptions& options,
                                   IngestStats* stats = nullptr);

  // Writes sentences.jsonl and index.bin under dir.
  void save(const std::filesystem::path& dir) const;
  static SentenceStore load(const std::filesystem::path& dir);

  size_t size() const { return sentences_.size(); }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  const Sentence& sentence(SentenceId id) const;
  bool contains_id(SentenceId id) const { return id < sentences_.size(); }
  const std::vector<std::string>& tokens(SentenceId id) const;

  // Ids of sentences whose match-token sequence contains the surface's
  // tokens contiguously. Surface is tokenized the same way.
  std::vector<SentenceId> occurrences(std::string_view surface) const;
  size_t frequency(std::string_view surface) const;

  ContextSet sample_contexts(std::string_view surface, size_t k, uint64_t seed) const;

  const std::unordered_map<std::string, std::vector<SentenceId>>& postings() const {
    return postings_;
  }

 private:
  explicit SentenceStore(std::vector<Sentence> sentences);
  void build_index();

  std::vector<Sentence> sentences_;
  std::vector<std::vector<std::string>> tokens_;
  std::unordered_map<std::string, std::vector<SentenceId>> postings_;
};

}  // namespace termforge

#endif  // TERMFORGE_CORPUS_STORE_H_
