// Brute-force reference implementations used only by tests. Each follows
// the textbook definition directly and shares no code with the library.
#ifndef TERMFORGE_TESTS_ORACLES_H_
#define TERMFORGE_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

// Pair counting over all i < j: ARI = 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)).
inline double ari(const std::vector<int>& x, const std::vector<int>& y) {
  double a = 0, b = 0, c = 0, d = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = i + 1; j < x.size(); ++j) {
      bool sx = x[i] == x[j], sy = y[i] == y[j];
      if (sx && sy) a += 1;
      else if (sx) b += 1;
      else if (sy) c += 1;
      else d += 1;
    }
  }
  double denom = (a + b) * (b + d) + (a + c) * (c + d);
  if (denom == 0) return 1.0;
  return 2 * (a * d - b * c) / denom;
}

struct BCubed {
  double p, r, f1;
};

// Per item: scan every other item.
inline BCubed bcubed(const std::vector<int>& pred, const std::vector<int>& gold) {
  double p = 0, r = 0;
  const size_t n = pred.size();
  for (size_t i = 0; i < n; ++i) {
    double both = 0, in_pred = 0, in_gold = 0;
    for (size_t j = 0; j < n; ++j) {
      if (pred[j] == pred[i]) in_pred += 1;
      if (gold[j] == gold[i]) in_gold += 1;
      if (pred[j] == pred[i] && gold[j] == gold[i]) both += 1;
    }
    p += both / in_pred;
    r += both / in_gold;
  }
  p /= static_cast<double>(n);
  r /= static_cast<double>(n);
  return {p, r, 2 * p * r / (p + r)};
}

// rank_i = 1 + #{j : v_j < v_i} + (#{j : v_j == v_i} - 1) / 2
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1;
      if (v[j] == v[i]) equal += 1;
    }
    out[i] = 1 + less + (equal - 1) / 2;
  }
  return out;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - sx / n, dy = y[i] - sy / n;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// Random set partition of n items as a restricted growth string.
inline std::vector<int> random_partition(size_t n, std::mt19937_64& rng) {
  std::vector<int> labels(n);
  int max_label = -1;
  for (size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, max_label + 1);
    labels[i] = pick(rng);
    max_label = std::max(max_label, labels[i]);
  }
  return labels;
}

inline std::vector<std::vector<std::string>> to_partition(const std::vector<int>& labels) {
  std::map<int, std::vector<std::string>> groups;
  for (size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back("e" + std::to_string(i));
  std::vector<std::vector<std::string>> out;
  for (auto& [_, g] : groups) out.push_back(g);
  return out;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

// Sentences whose whitespace tokens contain `gram` contiguously.
inline size_t sentence_frequency(const std::vector<std::vector<std::string>>& sentences,
                                 const std::vector<std::string>& gram) {
  size_t count = 0;
  for (const auto& s : sentences) {
    bool found = false;
    for (size_t i = 0; !found && i + gram.size() <= s.size(); ++i) {
      bool all = true;
      for (size_t j = 0; j < gram.size(); ++j) all = all && s[i + j] == gram[j];
      found = all;
    }
    count += found ? 1 : 0;
  }
  return count;
}

// Population variance of p_i = n_i / sum n_j over context unigrams
// (presence per sentence), excluding the candidate's tokens.
inline double context_variance(const std::vector<std::vector<std::string>>& sentences,
                               const std::set<std::string>& exclude) {
  std::map<std::string, double> n;
  for (const auto& s : sentences) {
    std::set<std::string> present(s.begin(), s.end());
    for (const auto& t : present) {
      if (!exclude.count(t)) n[t] += 1;
    }
  }
  double total = 0;
  for (const auto& [_, v] : n) total += v;
  double mean = 1.0 / static_cast<double>(n.size());
  double var = 0;
  for (const auto& [_, v] : n) var += (v / total - mean) * (v / total - mean);
  return var / static_cast<double>(n.size());
}

// Centroid-based within-cluster sum of squares.
inline double wcss(const std::vector<std::vector<double>>& pts, const std::vector<size_t>& labels, size_t k) {
  double total = 0;
  for (size_t c = 0; c < k; ++c) {
    std::vector<double> mu(pts[0].size(), 0);
    double count = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (labels[i] != c) continue;
      count += 1;
      for (size_t d = 0; d < mu.size(); ++d) mu[d] += pts[i][d];
    }
    if (count == 0) continue;
    for (auto& m : mu) m /= count;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (labels[i] != c) continue;
      for (size_t d = 0; d < mu.size(); ++d) total += (pts[i][d] - mu[d]) * (pts[i][d] - mu[d]);
    }
  }
  return total;
}

// I(T;Y) in nats from the joint p(t, y) = sum_{x in t} n(x, y) / N.
inline double mutual_information(const std::vector<std::vector<uint32_t>>& counts, const std::vector<size_t>& labels) {
  std::map<size_t, std::vector<double>> joint;
  double total = 0;
  const size_t dim = counts.empty() ? 0 : counts[0].size();
  for (size_t x = 0; x < counts.size(); ++x) {
    auto& row = joint[labels[x]];
    row.resize(dim, 0);
    for (size_t y = 0; y < dim; ++y) {
      row[y] += counts[x][y];
      total += counts[x][y];
    }
  }
  std::vector<double> py(dim, 0);
  for (const auto& [_, row] : joint) {
    for (size_t y = 0; y < dim; ++y) py[y] += row[y] / total;
  }
  double mi = 0;
  for (const auto& [_, row] : joint) {
    double pt = 0;
    for (double v : row) pt += v / total;
    for (size_t y = 0; y < dim; ++y) {
      double pty = row[y] / total;
      if (pty > 0) mi += pty * std::log(pty / (pt * py[y]));
    }
  }
  return mi;
}

// Shannon entropy in bits of a label histogram.
inline double entropy_bits(const std::map<size_t, double>& hist) {
  double total = 0, h = 0;
  for (const auto& [_, v] : hist) total += v;
  for (const auto& [_, v] : hist) {
    if (v > 0) h -= (v / total) * std::log2(v / total);
  }
  return h;
}

// One hidden layer MLP: out = sum_j w2[j] * act(sum_i x[i] * W1[i][j] + b1[j]) + b2.
inline double mlp(const std::vector<std::vector<double>>& W1, const std::vector<double>& b1,
                  const std::vector<double>& w2, double b2, const std::vector<double>& x, bool relu) {
  std::vector<double> hidden(b1);
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = 0; j < hidden.size(); ++j) hidden[j] += x[i] * W1[i][j];
  }
  double out = b2;
  for (size_t j = 0; j < hidden.size(); ++j) {
    double a = relu ? (hidden[j] > 0 ? hidden[j] : 0.0) : std::tanh(hidden[j]);
    out += w2[j] * a;
  }
  return out;
}

}  // namespace oracle

#endif  // TERMFORGE_TESTS_ORACLES_H_
