#include "termforge/termhood.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "termforge/error.h"
#include "termforge/random.h"
#include "termforge/text.h"

namespace termforge {

std::string_view measure_name(Measure m) {
  return m == Measure::kRelativeFrequency ? "RF" : "CV";
}

Measure parse_measure(std::string_view name) {
  if (name == "RF" || name == "rf") return Measure::kRelativeFrequency;
  if (name == "CV" || name == "cv") return Measure::kContextVariance;
  throw Error(ErrorCode::kInvalidArgument, "unknown measure '" + std::string(name) + "'");
}

std::string_view direction_name(Direction d) {
  return d == Direction::kHigherIsPositive ? "HIGHER_IS_POSITIVE" : "LOWER_IS_POSITIVE";
}

Direction parse_direction(std::string_view name) {
  if (name == "HIGHER_IS_POSITIVE") return Direction::kHigherIsPositive;
  if (name == "LOWER_IS_POSITIVE") return Direction::kLowerIsPositive;
  throw Error(ErrorCode::kFormat, "unknown direction '" + std::string(name) + "'");
}

Direction default_direction(Measure m) {
  // Low context variance is read as evidence of being a term.
  return m == Measure::kRelativeFrequency ? Direction::kHigherIsPositive
                                          : Direction::kLowerIsPositive;
}

double relative_frequency(const Candidate& candidate, const SentenceStore& store) {
  std::vector<std::string> tokens = text::split_whitespace(candidate.surface);
  if (tokens.size() < 2) {
    throw Error(ErrorCode::kDomain, "relative frequency needs an n-gram with n >= 2: '" +
                                        candidate.surface + "'");
  }
  double freq = static_cast<double>(store.frequency(candidate.surface));
  if (freq == 0) {
    throw Error(ErrorCode::kUndefinedScore, "'" + candidate.surface + "' never occurs");
  }
  double product = 1.0;
  for (const auto& t : tokens) {
    auto f = store.frequency(t);
    if (f == 0) {
      throw Error(ErrorCode::kUndefinedScore, "constituent '" + t + "' of '" + candidate.surface +
                                                  "' never occurs");
    }
    product *= static_cast<double>(f);
  }
  return std::log(freq / product);
}

double context_variance_of(const std::vector<std::vector<std::string>>& sentences,
                           const std::vector<std::string>& candidate_tokens,
                           const StopWords* exclude) {
  std::set<std::string> own(candidate_tokens.begin(), candidate_tokens.end());
  std::unordered_map<std::string, uint64_t> presence;
  for (const auto& sentence : sentences) {
    std::set<std::string> seen;
    for (const auto& t : sentence) {
      if (own.count(t) || text::is_punctuation_only(t)) continue;
      if (exclude && exclude->contains(t)) continue;
      if (seen.insert(t).second) ++presence[t];
    }
  }
  if (presence.empty()) {
    throw Error(ErrorCode::kDegenerateContext, "contexts contain no unigram besides the candidate");
  }
  // Integer totals keep p_i exact up to one division.
  uint64_t total = 0;
  for (const auto& [_, n] : presence) total += n;
  const double m = static_cast<double>(presence.size());
  const double mean = 1.0 / m;
  double acc = 0.0;
  for (const auto& [_, n] : presence) {
    double d = static_cast<double>(n) / static_cast<double>(total) - mean;
    acc += d * d;
  }
  return acc / m;
}

double context_variance(const Candidate& candidate, const SentenceStore& store,
                        const ContextVarianceOptions& options) {
  std::vector<SentenceId> occ = store.occurrences(candidate.surface);
  if (occ.size() < 2) {
    throw Error(ErrorCode::kInsufficientContext,
                "'" + candidate.surface + "' occurs in " + std::to_string(occ.size()) +
                    " sentence(s); need at least 2");
  }
  ContextSet ctx = store.sample_contexts(candidate.surface, options.sample_size, options.seed);
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(ctx.ids.size());
  for (SentenceId id : ctx.ids) sentences.push_back(store.tokens(id));
  return context_variance_of(sentences, text::match_tokens(candidate.surface), options.exclude);
}

ScoreResult score_set(const CandidateSet& set, Measure measure, const SentenceStore& store,
                      const ScoreParams& params) {
  ScoreResult result;
  result.table.measure = measure;
  result.table.direction = default_direction(measure);
  for (const auto& c : set.members) {
    try {
      double score;
      if (measure == Measure::kRelativeFrequency) {
        score = relative_frequency(c, store);
      } else {
        ContextVarianceOptions cv = params.cv;
        cv.seed = derive_seed(params.cv.seed, c.surface);
        score = context_variance(c, store, cv);
      }
      if (!std::isfinite(score)) {
        result.skipped.push_back({c.surface, "non-finite score"});
        continue;
      }
      result.table.scores[c.surface] = score;
    } catch (const Error& e) {
      result.skipped.push_back({c.surface, e.what()});
    }
  }
  return result;
}

void write_score_table(std::ostream& out, const ScoreTable& table) {
  out << "surface\tmeasure\tscore\tdirection\n";
  char buf[64];
  for (const auto& [surface, score] : table.scores) {
    std::snprintf(buf, sizeof buf, "%.17g", score);
    out << surface << '\t' << measure_name(table.measure) << '\t' << buf << '\t'
        << direction_name(table.direction) << '\n';
  }
}

void write_score_table(const std::filesystem::path& path, const ScoreTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_score_table(out, table);
}

ScoreTable read_score_table(std::istream& in) {
  ScoreTable table;
  std::string line;
  bool first = true;
  bool any = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.starts_with("surface\t")) continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 4) throw Error(ErrorCode::kFormat, "score TSV row needs 4 columns: " + line);
    Measure m = parse_measure(cols[1]);
    Direction d = parse_direction(cols[3]);
    if (any && (m != table.measure || d != table.direction)) {
      throw Error(ErrorCode::kFormat, "score TSV mixes measures or directions");
    }
    table.measure = m;
    table.direction = d;
    any = true;
    table.scores[cols[0]] = std::stod(cols[2]);
  }
  return table;
}

ScoreTable read_score_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_score_table(in);
}

}  // namespace termforge
