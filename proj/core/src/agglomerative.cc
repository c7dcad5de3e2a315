#include <algorithm>
#include <cmath>

#include "termforge/error.h"
#include "termforge/surface_clustering.h"

namespace termforge {

AgglomerativeResult agglomerative_cosine(std::span<const std::vector<double>> vectors, size_t k) {
  AgglomerativeResult result;
  result.labels.assign(vectors.size(), kUnassigned);

  std::vector<size_t> items;  // indices of usable vectors
  std::vector<std::vector<double>> unit;
  for (size_t i = 0; i < vectors.size(); ++i) {
    double norm = std::sqrt(squared_norm(vectors[i]));
    if (norm == 0 || !std::isfinite(norm)) {
      result.filtered.push_back(i);
      continue;
    }
    items.push_back(i);
    std::vector<double> u(vectors[i].size());
    for (size_t d = 0; d < u.size(); ++d) u[d] = vectors[i][d] / norm;
    unit.push_back(std::move(u));
  }
  const size_t n = items.size();
  if (k == 0) throw Error(ErrorCode::kDomain, "k must be at least 1");
  if (n < k) {
    throw Error(ErrorCode::kDomain, "need at least k=" + std::to_string(k) + " nonzero vectors, have " +
                                        std::to_string(n));
  }
  if (n > 0 && unit.front().size() != 0) {
    for (const auto& u : unit) {
      if (u.size() != unit.front().size()) throw Error(ErrorCode::kShape, "vectors differ in size");
    }
  }

  std::vector<double> dist(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double dot = 0;
      for (size_t d = 0; d < unit[i].size(); ++d) dot += unit[i][d] * unit[j][d];
      dist[i * n + j] = dist[j * n + i] = 1.0 - dot;
    }
  }
  auto D = [&](size_t a, size_t b) -> double& { return dist[a * n + b]; };

  std::vector<bool> active(n, true);
  std::vector<size_t> size(n, 1);
  std::vector<size_t> root(n);
  for (size_t i = 0; i < n; ++i) root[i] = i;

  // Nearest active partner with a larger slot index, per slot.
  std::vector<double> nn_d(n, INFINITY);
  std::vector<size_t> nn_j(n, kUnassigned);
  auto refresh = [&](size_t i) {
    nn_d[i] = INFINITY;
    nn_j[i] = kUnassigned;
    for (size_t j = i + 1; j < n; ++j) {
      if (active[j] && D(i, j) < nn_d[i]) {
        nn_d[i] = D(i, j);
        nn_j[i] = j;
      }
    }
  };
  for (size_t i = 0; i < n; ++i) refresh(i);

  for (size_t clusters = n; clusters > k; --clusters) {
    size_t bi = kUnassigned;
    for (size_t i = 0; i < n; ++i) {
      if (!active[i] || nn_j[i] == kUnassigned) continue;
      if (bi == kUnassigned || nn_d[i] < nn_d[bi]) bi = i;
    }
    const size_t i = bi;
    const size_t j = nn_j[bi];
    for (size_t l = 0; l < n; ++l) {
      if (!active[l] || l == i || l == j) continue;
      double merged = (static_cast<double>(size[i]) * D(i, l) + static_cast<double>(size[j]) * D(j, l)) /
                      static_cast<double>(size[i] + size[j]);
      D(i, l) = D(l, i) = merged;
    }
    active[j] = false;
    size[i] += size[j];
    for (size_t m = 0; m < n; ++m) {
      if (root[m] == j) root[m] = i;
    }
    refresh(i);
    for (size_t l = 0; l < n; ++l) {
      if (!active[l] || l == i) continue;
      if (nn_j[l] == i || nn_j[l] == j) {
        refresh(l);
      } else if (l < i && (D(l, i) < nn_d[l] || (D(l, i) == nn_d[l] && i < nn_j[l]))) {
        nn_d[l] = D(l, i);
        nn_j[l] = i;
      }
    }
  }

  // Dense ids in order of first appearance.
  std::vector<size_t> id_of(n, kUnassigned);
  size_t next = 0;
  for (size_t m = 0; m < n; ++m) {
    size_t r = root[m];
    if (id_of[r] == kUnassigned) id_of[r] = next++;
    result.labels[items[m]] = id_of[r];
  }
  return result;
}

}  // namespace termforge
