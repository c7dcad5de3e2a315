#include "termforge/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <unordered_map>

#include "termforge/error.h"

namespace termforge {
namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw Error(ErrorCode::kUndefinedScore, "correlation of a constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double choose2(double n) { return n * (n - 1) / 2; }

// Element -> cluster index, validating that both partitions cover the same
// elements exactly once.
struct Indexed {
  std::vector<size_t> a, b;  // cluster index per element
  size_t ka = 0, kb = 0;
};

Indexed index_pair(const Partition& a, const Partition& b) {
  std::unordered_map<std::string, size_t> ids;
  Indexed out;
  for (const auto& cluster : a) {
    if (cluster.empty()) continue;
    for (const auto& e : cluster) {
      if (!ids.emplace(e, ids.size()).second) {
        throw Error(ErrorCode::kUniverseMismatch, "element '" + e + "' appears twice in a partition");
      }
      out.a.push_back(out.ka);
    }
    ++out.ka;
  }
  out.b.assign(out.a.size(), SIZE_MAX);
  for (const auto& cluster : b) {
    if (cluster.empty()) continue;
    for (const auto& e : cluster) {
      auto it = ids.find(e);
      if (it == ids.end()) {
        throw Error(ErrorCode::kUniverseMismatch, "element '" + e + "' is missing from the other partition");
      }
      if (out.b[it->second] != SIZE_MAX) {
        throw Error(ErrorCode::kUniverseMismatch, "element '" + e + "' appears twice in a partition");
      }
      out.b[it->second] = out.kb;
    }
    ++out.kb;
  }
  for (size_t i = 0; i < out.b.size(); ++i) {
    if (out.b[i] == SIZE_MAX) throw Error(ErrorCode::kUniverseMismatch, "partitions cover different elements");
  }
  return out;
}

bool is_count_metric(std::string_view name) { return name == "tp" || name == "fp" || name == "tn" || name == "fn"; }

std::string fmt_metric(std::string_view name, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, is_count_metric(name) ? "%.0f" : "%.4f", v);
  return buf;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t l, size_t r) { return values[l] < values[r]; });
  std::vector<double> ranks(values.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kInvalidArgument, "spearman needs equal-length inputs");
  if (x.size() < 2) throw Error(ErrorCode::kInvalidArgument, "spearman needs at least two observations");
  for (size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) throw Error(ErrorCode::kInvalidArgument, "spearman input has NaN");
  }
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double Confusion::accuracy() const {
  if (total() == 0) throw Error(ErrorCode::kInvalidArgument, "accuracy over zero items");
  return static_cast<double>(tp + tn) / static_cast<double>(total());
}

std::vector<std::string> top_k(const ScoreTable& scores, size_t k) {
  if (k > scores.scores.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "k=" + std::to_string(k) + " exceeds " + std::to_string(scores.scores.size()) + " scored items");
  }
  std::vector<std::pair<std::string, double>> items(scores.scores.begin(), scores.scores.end());
  const bool higher = scores.direction == Direction::kHigherIsPositive;
  std::sort(items.begin(), items.end(), [higher](const auto& l, const auto& r) {
    if (l.second != r.second) return higher ? l.second > r.second : l.second < r.second;
    return l.first < r.first;
  });
  std::vector<std::string> out;
  for (size_t i = 0; i < k; ++i) out.push_back(items[i].first);
  return out;
}

Confusion confusion_at_k(const ScoreTable& scores, const std::map<std::string, bool>& positive,
                         std::optional<size_t> k) {
  size_t n_pos = 0;
  for (const auto& [surface, _] : scores.scores) {
    auto it = positive.find(surface);
    if (it == positive.end()) throw Error(ErrorCode::kInvalidArgument, "no label for scored surface '" + surface + "'");
    if (it->second) ++n_pos;
  }
  auto predicted = top_k(scores, k.value_or(n_pos));
  std::set<std::string> pred(predicted.begin(), predicted.end());
  Confusion c;
  for (const auto& [surface, _] : scores.scores) {
    bool is_pos = positive.at(surface);
    bool said_pos = pred.count(surface) > 0;
    if (is_pos && said_pos) ++c.tp;
    else if (!is_pos && said_pos) ++c.fp;
    else if (!is_pos) ++c.tn;
    else ++c.fn;
  }
  return c;
}

double accuracy_at_k(const ScoreTable& scores, const std::map<std::string, bool>& positive,
                     std::optional<size_t> k) {
  return confusion_at_k(scores, positive, k).accuracy();
}

double majority_baseline(size_t n_pos, size_t n_neg) {
  if (n_pos + n_neg == 0) throw Error(ErrorCode::kInvalidArgument, "majority baseline over zero items");
  return static_cast<double>(std::max(n_pos, n_neg)) / static_cast<double>(n_pos + n_neg);
}

double majority_baseline(const std::map<std::string, bool>& positive) {
  size_t pos = 0;
  for (const auto& [_, p] : positive) pos += p ? 1 : 0;
  return majority_baseline(pos, positive.size() - pos);
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  Indexed ix = index_pair(a, b);
  const size_t n = ix.a.size();
  std::vector<double> row(ix.ka, 0), col(ix.kb, 0);
  std::unordered_map<uint64_t, double> cells;
  for (size_t i = 0; i < n; ++i) {
    row[ix.a[i]] += 1;
    col[ix.b[i]] += 1;
    cells[static_cast<uint64_t>(ix.a[i]) * ix.kb + ix.b[i]] += 1;
  }
  double index = 0, sum_a = 0, sum_b = 0;
  for (const auto& [_, v] : cells) index += choose2(v);
  for (double v : row) sum_a += choose2(v);
  for (double v : col) sum_b += choose2(v);
  const double total = choose2(static_cast<double>(n));
  const double expected = total > 0 ? sum_a * sum_b / total : 0;
  const double max_index = (sum_a + sum_b) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

BCubed bcubed(const Partition& predicted, const Partition& gold) {
  Indexed ix = index_pair(predicted, gold);
  const size_t n = ix.a.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "BCubed over an empty universe");
  std::vector<double> size_p(ix.ka, 0), size_g(ix.kb, 0);
  std::unordered_map<uint64_t, double> cells;
  for (size_t i = 0; i < n; ++i) {
    size_p[ix.a[i]] += 1;
    size_g[ix.b[i]] += 1;
    cells[static_cast<uint64_t>(ix.a[i]) * ix.kb + ix.b[i]] += 1;
  }
  double p = 0, r = 0;
  for (size_t i = 0; i < n; ++i) {
    double overlap = cells[static_cast<uint64_t>(ix.a[i]) * ix.kb + ix.b[i]];
    p += overlap / size_p[ix.a[i]];
    r += overlap / size_g[ix.b[i]];
  }
  BCubed out;
  out.precision = p / static_cast<double>(n);
  out.recall = r / static_cast<double>(n);
  out.f1 = 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

double bcubed_f1(const Partition& predicted, const Partition& gold) { return bcubed(predicted, gold).f1; }

void write_reports_json(std::ostream& out, std::span<const EvalReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["task"] = r.task;
    j["method"] = r.method;
    j["metrics"] = r.metrics;
    j["k"] = r.k ? nlohmann::ordered_json(*r.k) : nlohmann::ordered_json(nullptr);
    j["n_pos"] = r.n_pos;
    j["n_neg"] = r.n_neg;
    j["config_digest"] = r.config_digest;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

std::vector<EvalReport> read_reports_json(std::istream& in) {
  try {
    auto arr = nlohmann::json::parse(in);
    std::vector<EvalReport> out;
    for (const auto& j : arr) {
      EvalReport r;
      r.task = j.at("task").get<std::string>();
      r.method = j.at("method").get<std::string>();
      r.metrics = j.at("metrics").get<std::map<std::string, double>>();
      if (!j.at("k").is_null()) r.k = j.at("k").get<size_t>();
      r.n_pos = j.at("n_pos").get<size_t>();
      r.n_neg = j.at("n_neg").get<size_t>();
      r.config_digest = j.at("config_digest").get<std::string>();
      out.push_back(std::move(r));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("report file: ") + e.what());
  }
}

void write_reports_text(std::ostream& out, std::span<const EvalReport> reports) {
  std::vector<std::string> tasks;
  for (const auto& r : reports) {
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  }
  bool first = true;
  for (const auto& task : tasks) {
    std::vector<const EvalReport*> rows;
    std::set<std::string> metric_set;
    for (const auto& r : reports) {
      if (r.task != task) continue;
      rows.push_back(&r);
      for (const auto& [m, _] : r.metrics) metric_set.insert(m);
    }
    std::vector<std::string> metrics(metric_set.begin(), metric_set.end());
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"method"});
    cells.back().insert(cells.back().end(), metrics.begin(), metrics.end());
    for (const auto* r : rows) {
      std::vector<std::string> line{r->method};
      for (const auto& m : metrics) {
        auto it = r->metrics.find(m);
        line.push_back(it == r->metrics.end() ? "-" : fmt_metric(m, it->second));
      }
      cells.push_back(std::move(line));
    }
    std::vector<size_t> width(metrics.size() + 1, 0);
    for (const auto& line : cells) {
      for (size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    }
    if (!first) out << '\n';
    first = false;
    out << task << '\n';
    for (size_t l = 0; l < cells.size(); ++l) {
      for (size_t c = 0; c < cells[l].size(); ++c) {
        if (c == 0) {
          out << std::left << std::setw(static_cast<int>(width[c])) << cells[l][c];
        } else {
          out << "  " << std::right << std::setw(static_cast<int>(width[c])) << cells[l][c];
        }
      }
      out << '\n';
      if (l == 0) {
        size_t total = 0;
        for (size_t w : width) total += w;
        out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
      }
    }
  }
}

}  // namespace termforge
