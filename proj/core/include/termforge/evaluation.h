#ifndef TERMFORGE_EVALUATION_H_
#define TERMFORGE_EVALUATION_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "termforge/surface_clustering.h"
#include "termforge/termhood.h"

namespace termforge {

// Pearson correlation of average ranks. Throws kUndefinedScore when
// either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

// Average ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

struct Confusion {
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  size_t total() const { return tp + fp + tn + fn; }
  double accuracy() const;
  bool operator==(const Confusion&) const = default;
};

// The k best-scoring surfaces (per the table's direction) are predicted
// positive; ties at the boundary go to the lexicographically smaller
// surface. k defaults to the number of positives.
Confusion confusion_at_k(const ScoreTable& scores, const std::map<std::string, bool>& positive,
                         std::optional<size_t> k = std::nullopt);
double accuracy_at_k(const ScoreTable& scores, const std::map<std::string, bool>& positive,
                     std::optional<size_t> k = std::nullopt);

// Surfaces predicted positive by confusion_at_k, in rank order.
std::vector<std::string> top_k(const ScoreTable& scores, size_t k);

double majority_baseline(size_t n_pos, size_t n_neg);
double majority_baseline(const std::map<std::string, bool>& positive);

double adjusted_rand_index(const Partition& a, const Partition& b);

struct BCubed {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

BCubed bcubed(const Partition& predicted, const Partition& gold);
double bcubed_f1(const Partition& predicted, const Partition& gold);

struct EvalReport {
  std::string task;
  std::string method;
  std::map<std::string, double> metrics;
  std::optional<size_t> k;
  size_t n_pos = 0;
  size_t n_neg = 0;
  std::string config_digest;
};

void write_reports_json(std::ostream& out, std::span<const EvalReport> reports);
std::vector<EvalReport> read_reports_json(std::istream& in);

// One block per task: rows are methods, columns are metrics.
void write_reports_text(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace termforge

#endif  // TERMFORGE_EVALUATION_H_
