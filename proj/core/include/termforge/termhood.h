#ifndef TERMFORGE_TERMHOOD_H_
#define TERMFORGE_TERMHOOD_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "termforge/candidate_extraction.h"
#include "termforge/corpus_store.h"

namespace termforge {

enum class Measure { kRelativeFrequency, kContextVariance };
enum class Direction { kHigherIsPositive, kLowerIsPositive };

std::string_view measure_name(Measure m);  // "RF" / "CV"
Measure parse_measure(std::string_view name);
std::string_view direction_name(Direction d);
Direction parse_direction(std::string_view name);
Direction default_direction(Measure m);

struct ScoreTable {
  Measure measure = Measure::kRelativeFrequency;
  Direction direction = Direction::kHigherIsPositive;
  std::map<std::string, double> scores;
};

// ln(freq(c) / prod_i freq(u_i)) with sentence frequencies. Needs n >= 2
// (kDomain) and nonzero frequencies (kUndefinedScore).
double relative_frequency(const Candidate& candidate, const SentenceStore& store);

struct ContextVarianceOptions {
  size_t sample_size = 1000;
  uint64_t seed = 0;
  // Stop-words are kept in the context vocabulary unless this is set.
  const StopWords* exclude = nullptr;
};

// Population variance of the normalized per-sentence unigram presence
// counts over a sample of the candidate's contexts.
double context_variance(const Candidate& candidate, const SentenceStore& store,
                        const ContextVarianceOptions& options = {});

// The same statistic over already tokenized context sentences. The
// candidate's own tokens and punctuation-only tokens are excluded.
double context_variance_of(const std::vector<std::vector<std::string>>& sentences,
                           const std::vector<std::string>& candidate_tokens,
                           const StopWords* exclude = nullptr);

struct ScoreParams {
  ContextVarianceOptions cv;
};

struct SkippedCandidate {
  std::string surface;
  std::string reason;
};

struct ScoreResult {
  ScoreTable table;
  std::vector<SkippedCandidate> skipped;
};

// Scores every member; members failing a measure's preconditions are
// skipped and reported. For CV each candidate draws its sample from a seed
// derived from (params.cv.seed, surface).
ScoreResult score_set(const CandidateSet& set, Measure measure, const SentenceStore& store,
                      const ScoreParams& params = {});

// TSV: surface, measure, score, direction.
void write_score_table(std::ostream& out, const ScoreTable& table);
void write_score_table(const std::filesystem::path& path, const ScoreTable& table);
ScoreTable read_score_table(std::istream& in);
ScoreTable read_score_table(const std::filesystem::path& path);

}  // namespace termforge

#endif  // TERMFORGE_TERMHOOD_H_
