#include <algorithm>
#include <cmath>
#include <future>

#include "termforge/error.h"
#include "termforge/random.h"
#include "termforge/surface_clustering.h"

namespace termforge {
namespace {

using Points = std::span<const std::vector<double>>;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t d = 0; d < a.size(); ++d) {
    double t = a[d] - b[d];
    s += t * t;
  }
  return s;
}

struct State {
  Assignment labels;
  std::vector<size_t> count;
  std::vector<std::vector<double>> sum;
  std::vector<std::vector<double>> mean;

  void rebuild(Points points, size_t k) {
    const size_t dim = points.empty() ? 0 : points[0].size();
    count.assign(k, 0);
    sum.assign(k, std::vector<double>(dim, 0.0));
    for (size_t i = 0; i < points.size(); ++i) {
      ++count[labels[i]];
      for (size_t d = 0; d < dim; ++d) sum[labels[i]][d] += points[i][d];
    }
    mean.assign(k, std::vector<double>(dim, 0.0));
    for (size_t c = 0; c < k; ++c) refresh_mean(c);
  }
  void refresh_mean(size_t c) {
    for (size_t d = 0; d < sum[c].size(); ++d) {
      mean[c][d] = count[c] ? sum[c][d] / static_cast<double>(count[c]) : 0.0;
    }
  }
};

// Distance-weighted seeding; returns the chosen center indices.
std::vector<size_t> seed_centers(Points points, size_t k, Rng& rng) {
  const size_t n = points.size();
  std::vector<size_t> centers{static_cast<size_t>(uniform_below(rng, n))};
  std::vector<bool> chosen(n, false);
  chosen[centers[0]] = true;
  std::vector<double> d2(n);
  for (size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], points[centers[0]]);
  while (centers.size() < k) {
    double total = 0;
    for (size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    size_t pick = kUnassigned;
    if (total > 0) {
      double r = uniform_unit(rng) * total;
      for (size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] == 0) continue;
        pick = i;
        r -= d2[i];
        if (r < 0) break;
      }
    } else {
      // Every remaining point coincides with a center.
      for (size_t i = 0; i < n && pick == kUnassigned; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = true;
    centers.push_back(pick);
    for (size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], points[pick]));
  }
  return centers;
}

HartiganResult run_once(Points points, const HartiganOptions& options, size_t restart,
                        uint64_t seed) {
  const size_t n = points.size();
  const size_t k = options.k;
  Rng rng = make_rng(seed);
  HartiganResult result;
  result.best_restart = restart;

  std::vector<size_t> centers = seed_centers(points, k, rng);
  State st;
  st.labels.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    double best = INFINITY;
    for (size_t c = 0; c < k; ++c) {
      double d = sq_dist(points[i], points[centers[c]]);
      if (d < best) {
        best = d;
        st.labels[i] = c;
      }
    }
  }
  // Each center point must own its cluster, otherwise coincident centers
  // leave clusters empty.
  for (size_t c = 0; c < k; ++c) st.labels[centers[c]] = c;
  st.rebuild(points, k);

  // Re-seed any empty cluster with the point farthest from its mean.
  for (size_t c = 0; c < k; ++c) {
    if (st.count[c] > 0) continue;
    size_t far = kUnassigned;
    double far_d = -1;
    for (size_t i = 0; i < n; ++i) {
      if (st.count[st.labels[i]] < 2) continue;
      double d = sq_dist(points[i], st.mean[st.labels[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    st.labels[far] = c;
    st.rebuild(points, k);
    ++result.reseeds;
  }

  if (options.on_event) {
    HartiganEvent ev;
    ev.kind = HartiganEvent::Kind::kInitial;
    ev.restart = restart;
    ev.labels = &st.labels;
    options.on_event(ev);
  }

  for (size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    ++result.sweeps;
    bool moved = false;
    for (size_t i = 0; i < n; ++i) {
      const size_t from = st.labels[i];
      if (st.count[from] < 2) continue;
      const double nf = static_cast<double>(st.count[from]);
      const double removal = nf / (nf - 1.0) * sq_dist(points[i], st.mean[from]);
      size_t to = kUnassigned;
      double insertion = INFINITY;
      for (size_t c = 0; c < k; ++c) {
        if (c == from) continue;
        const double nc = static_cast<double>(st.count[c]);
        double cost = nc / (nc + 1.0) * sq_dist(points[i], st.mean[c]);
        if (cost < insertion) {
          insertion = cost;
          to = c;
        }
      }
      // The relative margin keeps rounding noise from producing moves that
      // do not actually lower the WCSS.
      if (to == kUnassigned || !(removal - insertion > 1e-12 * removal)) continue;
      st.labels[i] = to;
      --st.count[from];
      ++st.count[to];
      for (size_t d = 0; d < points[i].size(); ++d) {
        st.sum[from][d] -= points[i][d];
        st.sum[to][d] += points[i][d];
      }
      st.refresh_mean(from);
      st.refresh_mean(to);
      moved = true;
      ++result.moves;
      if (options.on_event) {
        HartiganEvent ev;
        ev.kind = HartiganEvent::Kind::kMove;
        ev.restart = restart;
        ev.point = i;
        ev.from = from;
        ev.to = to;
        ev.predicted_decrease = removal - insertion;
        ev.labels = &st.labels;
        options.on_event(ev);
      }
    }
    if (!moved) break;
    st.rebuild(points, k);  // drop accumulated rounding in the running sums
  }
  result.labels = std::move(st.labels);
  result.wcss = within_cluster_ss(points, result.labels, k);
  return result;
}

}  // namespace

double within_cluster_ss(std::span<const std::vector<double>> points, const Assignment& labels,
                         size_t k) {
  State st;
  st.labels = labels;
  st.rebuild(points, k);
  double total = 0;
  for (size_t i = 0; i < points.size(); ++i) total += sq_dist(points[i], st.mean[labels[i]]);
  return total;
}

HartiganResult hartigan_kmeans(std::span<const std::vector<double>> points,
                               const HartiganOptions& options) {
  const size_t n = points.size();
  if (options.k == 0 || options.k > n) {
    throw Error(ErrorCode::kDomain, "hartigan_kmeans needs 1 <= k <= n (k=" +
                                        std::to_string(options.k) + ", n=" + std::to_string(n) + ")");
  }
  for (const auto& p : points) {
    if (p.size() != points[0].size()) throw Error(ErrorCode::kShape, "points differ in dimension");
  }
  const size_t restarts = std::max<size_t>(1, options.restarts);
  std::vector<HartiganResult> runs(restarts);
  if (options.parallel && !options.on_event && restarts > 1) {
    std::vector<std::future<HartiganResult>> futures;
    for (size_t r = 0; r < restarts; ++r) {
      futures.push_back(std::async(std::launch::async, run_once, points, std::cref(options), r,
                                   derive_seed(options.seed, r)));
    }
    for (size_t r = 0; r < restarts; ++r) runs[r] = futures[r].get();
  } else {
    for (size_t r = 0; r < restarts; ++r) runs[r] = run_once(points, options, r, derive_seed(options.seed, r));
  }
  size_t best = 0;
  for (size_t r = 1; r < restarts; ++r) {
    if (runs[r].wcss < runs[best].wcss) best = r;
  }
  return runs[best];
}

}  // namespace termforge
