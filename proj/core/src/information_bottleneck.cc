#include <algorithm>
#include <cmath>
#include <future>
#include <unordered_map>

#include "termforge/error.h"
#include "termforge/random.h"
#include "termforge/surface_clustering.h"
#include "termforge/text.h"

namespace termforge {
namespace {

double entropy_bits(const std::vector<double>& counts, double total) {
  if (total <= 0) return 0;
  double h = 0;
  for (double c : counts) {
    if (c > 0) {
      double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

struct SparseDist {
  double prior = 0;  // p(x)
  std::vector<std::pair<uint32_t, double>> cond;  // (y, p(y|x))
};

struct Clusters {
  std::vector<double> mass;                // p(t)
  std::vector<std::vector<double>> joint;  // p(t, y)
  std::vector<size_t> size;

  void rebuild(const std::vector<SparseDist>& items, const std::vector<size_t>& members,
               const Assignment& labels, size_t k, size_t dims) {
    mass.assign(k, 0.0);
    joint.assign(k, std::vector<double>(dims, 0.0));
    size.assign(k, 0);
    for (size_t m : members) {
      add(items[m], labels[m]);
      ++size[labels[m]];
    }
  }
  void add(const SparseDist& x, size_t t) {
    mass[t] += x.prior;
    for (auto [y, p] : x.cond) joint[t][y] += x.prior * p;
  }
  void remove(const SparseDist& x, size_t t) {
    mass[t] -= x.prior;
    for (auto [y, p] : x.cond) {
      joint[t][y] -= x.prior * p;
      if (joint[t][y] < 0) joint[t][y] = 0;
    }
  }
};

// (p(x) + p(t)) * JS_pi(p(y|x), p(y|t)), the loss in I(T;Y) when x joins t.
double merge_cost(const SparseDist& x, const Clusters& cl, size_t t) {
  const double pt = cl.mass[t];
  if (pt <= 0) return 0;
  const double total = x.prior + pt;
  const double w1 = x.prior / total;
  const double w2 = pt / total;
  double js = 0;
  double q_on_support = 0;
  for (auto [y, p] : x.cond) {
    double q = cl.joint[t][y] / pt;
    q_on_support += q;
    double m = w1 * p + w2 * q;
    js += w1 * p * std::log(p / m);
    if (q > 0) js += w2 * q * std::log(q / m);
  }
  // Outside x's support m = w2*q, so each term is w2*q*log(1/w2).
  double rest = std::max(0.0, 1.0 - q_on_support);
  js += w2 * rest * -std::log(w2);
  return total * js;
}

double mutual_information(const Clusters& cl, const std::vector<double>& marginal) {
  double mi = 0;
  for (size_t t = 0; t < cl.mass.size(); ++t) {
    if (cl.mass[t] <= 0) continue;
    for (size_t y = 0; y < marginal.size(); ++y) {
      double j = cl.joint[t][y];
      if (j > 0) mi += j * std::log(j / (cl.mass[t] * marginal[y]));
    }
  }
  return mi;
}

struct Prepared {
  std::vector<SparseDist> items;
  std::vector<size_t> members;  // items with positive mass
  std::vector<size_t> filtered;
  std::vector<double> marginal;  // p(y)
  size_t dims = 0;
};

Prepared prepare(const std::vector<std::vector<uint32_t>>& counts) {
  Prepared pr;
  pr.dims = counts.empty() ? 0 : counts[0].size();
  double grand = 0;
  std::vector<double> mass(counts.size(), 0.0);
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].size() != pr.dims) throw Error(ErrorCode::kShape, "count vectors differ in size");
    for (uint32_t c : counts[i]) mass[i] += c;
    grand += mass[i];
  }
  pr.items.resize(counts.size());
  pr.marginal.assign(pr.dims, 0.0);
  for (size_t i = 0; i < counts.size(); ++i) {
    if (mass[i] == 0) {
      pr.filtered.push_back(i);
      continue;
    }
    pr.members.push_back(i);
    pr.items[i].prior = mass[i] / grand;
    for (uint32_t y = 0; y < pr.dims; ++y) {
      if (counts[i][y] == 0) continue;
      double p = counts[i][y] / mass[i];
      pr.items[i].cond.emplace_back(y, p);
      pr.marginal[y] += pr.items[i].prior * p;
    }
  }
  return pr;
}

SibResult run_once(const Prepared& pr, const SibOptions& options, size_t restart, uint64_t seed) {
  const size_t k = options.k;
  Rng rng = make_rng(seed);
  SibResult result;
  result.best_restart = restart;
  Assignment labels(pr.items.size(), kUnassigned);

  // Random partition with every cluster non-empty.
  std::vector<size_t> order = pr.members;
  shuffle(order, rng);
  for (size_t i = 0; i < order.size(); ++i) {
    labels[order[i]] = i < k ? i : static_cast<size_t>(uniform_below(rng, k));
  }
  Clusters cl;
  cl.rebuild(pr.items, pr.members, labels, k, pr.dims);

  auto emit = [&](SibEvent::Kind kind, size_t item, size_t from, size_t to) {
    if (!options.on_event) return;
    SibEvent ev;
    ev.kind = kind;
    ev.restart = restart;
    ev.item = item;
    ev.from = from;
    ev.to = to;
    ev.labels = &labels;
    options.on_event(ev);
  };
  emit(SibEvent::Kind::kInitial, 0, 0, 0);

  for (size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    ++result.sweeps;
    bool changed = false;
    std::vector<size_t> draw = pr.members;
    shuffle(draw, rng);
    for (size_t x : draw) {
      const size_t from = labels[x];
      if (cl.size[from] < 2) continue;
      cl.remove(pr.items[x], from);
      double stay = merge_cost(pr.items[x], cl, from);
      size_t to = from;
      double best = stay;
      for (size_t t = 0; t < k; ++t) {
        if (t == from) continue;
        double cost = merge_cost(pr.items[x], cl, t);
        // Leave only for a strictly cheaper cluster.
        if (cost < best && stay - cost > 1e-14 * std::max(stay, 1e-300)) {
          best = cost;
          to = t;
        }
      }
      cl.add(pr.items[x], to);
      if (to != from) {
        labels[x] = to;
        --cl.size[from];
        ++cl.size[to];
        changed = true;
      }
      emit(SibEvent::Kind::kReassign, x, from, to);
    }
    cl.rebuild(pr.items, pr.members, labels, k, pr.dims);
    if (!changed) break;
  }
  result.labels = std::move(labels);
  result.mutual_information = mutual_information(cl, pr.marginal);
  return result;
}

}  // namespace

TfFeatureSpace information_gain_features(
    const std::vector<std::vector<std::vector<std::string>>>& contexts, size_t max_features) {
  const size_t n_cands = contexts.size();
  if (n_cands == 0) throw Error(ErrorCode::kNoContext, "no candidates to featurize");
  std::vector<double> label_counts(n_cands, 0.0);
  double n_sentences = 0;
  // token -> per-candidate count of sentences containing it
  std::unordered_map<std::string, std::vector<double>> presence;
  for (size_t c = 0; c < n_cands; ++c) {
    if (contexts[c].empty()) {
      throw Error(ErrorCode::kNoContext, "candidate " + std::to_string(c) + " has no context sentence");
    }
    for (const auto& sentence : contexts[c]) {
      label_counts[c] += 1;
      n_sentences += 1;
      std::vector<std::string> uniq;
      for (const auto& t : sentence) {
        if (!text::is_punctuation_only(t)) uniq.push_back(t);
      }
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (const auto& t : uniq) {
        auto& v = presence[t];
        if (v.empty()) v.assign(n_cands, 0.0);
        v[c] += 1;
      }
    }
  }
  const double h_label = entropy_bits(label_counts, n_sentences);

  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(presence.size());
  std::vector<double> absent(n_cands);
  for (const auto& [token, with] : presence) {
    double n_with = 0;
    for (size_t c = 0; c < n_cands; ++c) {
      n_with += with[c];
      absent[c] = label_counts[c] - with[c];
    }
    double n_without = n_sentences - n_with;
    double h_cond = (n_with / n_sentences) * entropy_bits(with, n_with) +
                    (n_without / n_sentences) * entropy_bits(absent, n_without);
    ranked.emplace_back(token, std::max(0.0, h_label - h_cond));
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > max_features) ranked.resize(max_features);

  TfFeatureSpace space;
  std::unordered_map<std::string, size_t> column;
  for (auto& [token, gain] : ranked) {
    column.emplace(token, space.vocabulary.size());
    space.vocabulary.push_back(token);
    space.gains.push_back(gain);
  }
  space.tf.assign(n_cands, std::vector<uint32_t>(space.vocabulary.size(), 0));
  for (size_t c = 0; c < n_cands; ++c) {
    for (const auto& sentence : contexts[c]) {
      for (const auto& t : sentence) {
        auto it = column.find(t);
        if (it != column.end()) ++space.tf[c][it->second];
      }
    }
  }
  return space;
}

double sib_mutual_information(const std::vector<std::vector<uint32_t>>& counts,
                              const Assignment& labels) {
  Prepared pr = prepare(counts);
  size_t k = 0;
  std::vector<size_t> members;
  for (size_t m : pr.members) {
    if (labels[m] == kUnassigned) continue;
    members.push_back(m);
    k = std::max(k, labels[m] + 1);
  }
  Clusters cl;
  cl.rebuild(pr.items, members, labels, k, pr.dims);
  return mutual_information(cl, pr.marginal);
}

SibResult sib_cluster(const std::vector<std::vector<uint32_t>>& counts, const SibOptions& options) {
  Prepared pr = prepare(counts);
  const size_t n = pr.members.size();
  if (options.k == 0 || options.k > n) {
    throw Error(ErrorCode::kDomain, "sib_cluster needs 1 <= k <= n (k=" + std::to_string(options.k) +
                                        ", n=" + std::to_string(n) + ")");
  }
  const size_t restarts = std::max<size_t>(1, options.restarts);
  std::vector<SibResult> runs(restarts);
  if (options.parallel && !options.on_event && restarts > 1) {
    std::vector<std::future<SibResult>> futures;
    for (size_t r = 0; r < restarts; ++r) {
      futures.push_back(std::async(std::launch::async, run_once, std::cref(pr), std::cref(options), r,
                                   derive_seed(options.seed, r)));
    }
    for (size_t r = 0; r < restarts; ++r) runs[r] = futures[r].get();
  } else {
    for (size_t r = 0; r < restarts; ++r) runs[r] = run_once(pr, options, r, derive_seed(options.seed, r));
  }
  size_t best = 0;
  for (size_t r = 1; r < restarts; ++r) {
    if (runs[r].mutual_information > runs[best].mutual_information) best = r;
  }
  runs[best].filtered = pr.filtered;
  return runs[best];
}

}  // namespace termforge
