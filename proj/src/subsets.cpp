#include "less/subsets.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "less/errors.hpp"
#include "less/simd.hpp"

namespace less {

namespace {

void check_m(std::size_t m, std::size_t n) {
  if (m == 0) throw ConfigError("number of subsets must be positive");
  if (m > n) {
    throw ConfigError("number of subsets m=" + std::to_string(m) + " exceeds row count n=" +
                      std::to_string(n));
  }
}

std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> x, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = simd::squared_distance(centroids.row(c), x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

Matrix cluster_means(const Matrix& X, const std::vector<std::size_t>& labels, const Matrix& previous) {
  const std::size_t m = previous.rows();
  Matrix sums(m, X.cols());
  std::vector<std::size_t> counts(m, 0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    simd::axpy(1.0, X.row(i), sums.row(labels[i]));
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < m; ++c) {
    auto row = sums.row(c);
    if (counts[c] == 0) {
      const auto old = previous.row(c);
      std::copy(old.begin(), old.end(), row.begin());
      continue;
    }
    for (double& v : row) v /= static_cast<double>(counts[c]);
  }
  return sums;
}

double total_sse(const Matrix& X, const std::vector<std::size_t>& labels, const Matrix& centroids) {
  double sse = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) sse += simd::squared_distance(X.row(i), centroids.row(labels[i]));
  return sse;
}

Matrix kmeans_plus_plus(const Matrix& X, std::size_t m, Rng& rng) {
  const std::size_t n = X.rows();
  Matrix centers(m, X.cols());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < m; ++c) {
    const auto src = X.row(pick);
    std::copy(src.begin(), src.end(), centers.row(c).begin());
    if (c + 1 == m) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], simd::squared_distance(X.row(i), centers.row(c)));
      total += d2[i];
    }
    if (!(total > 0.0)) {
      pick = first(rng);
      continue;
    }
    const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc > target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centers;
}

// Moves the farthest point of a multi-member cluster into each empty cluster.
void reseed_empty(const Matrix& X, std::vector<std::size_t>& labels, Matrix& centroids) {
  const std::size_t m = centroids.rows();
  std::vector<std::size_t> counts(m, 0);
  for (std::size_t l : labels) ++counts[l];
  for (std::size_t c = 0; c < m; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = X.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = simd::squared_distance(X.row(i), centroids.row(labels[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == X.rows()) break;  // cannot happen while m <= n
    --counts[labels[far]];
    labels[far] = c;
    counts[c] = 1;
    const auto src = X.row(far);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
  }
}

std::vector<std::size_t> assign(const Matrix& X, const Matrix& centroids) {
  std::vector<std::size_t> labels(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) labels[i] = nearest_centroid(centroids, X.row(i), nullptr);
  return labels;
}

}  // namespace

Vector centroid_of(const Matrix& X, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ConfigError("centroid of an empty subset");
  Vector c(X.cols(), 0.0);
  for (std::size_t r : indices) simd::axpy(1.0, X.row(r), c);
  for (double& v : c) v /= static_cast<double>(indices.size());
  return c;
}

SubsetSpec nearest_neighbour_subset(const Matrix& X, std::size_t anchor, std::size_t k) {
  const std::size_t n = X.rows();
  if (anchor >= n) throw ConfigError("anchor index out of range");
  k = std::min(k, n);
  if (k == 0) throw ConfigError("subset size must be positive");
  std::vector<std::pair<double, std::size_t>> dist(n);
  const auto a = X.row(anchor);
  for (std::size_t i = 0; i < n; ++i) dist[i] = {simd::squared_distance(X.row(i), a), i};
  if (k < n) std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
  std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
  SubsetSpec s;
  s.indices.reserve(k);
  for (std::size_t i = 0; i < k; ++i) s.indices.push_back(dist[i].second);
  s.centroid = centroid_of(X, s.indices);
  return s;
}

std::vector<SubsetSpec> select_random_anchor_subsets(const Matrix& X, std::size_t m, std::size_t k,
                                                     Rng& rng) {
  const std::size_t n = X.rows();
  check_m(m, n);
  if (k == 0) throw ConfigError("neighbours per subset must be positive");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::vector<SubsetSpec> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) out.push_back(nearest_neighbour_subset(X, pool[j], k));
  return out;
}

KMeansResult kmeans(const Matrix& X, std::size_t m, Rng& rng, int max_iterations) {
  check_m(m, X.rows());
  KMeansResult r;
  r.centroids = kmeans_plus_plus(X, m, rng);
  r.labels = assign(X, r.centroids);
  reseed_empty(X, r.labels, r.centroids);
  for (int it = 1; it <= max_iterations; ++it) {
    r.iterations = it;
    r.centroids = cluster_means(X, r.labels, r.centroids);
    r.sse_history.push_back(total_sse(X, r.labels, r.centroids));
    auto next = assign(X, r.centroids);
    reseed_empty(X, next, r.centroids);
    if (next == r.labels) {
      r.converged = true;
      break;
    }
    r.labels = std::move(next);
  }
  r.centroids = cluster_means(X, r.labels, r.centroids);
  return r;
}

std::vector<SubsetSpec> select_kmeans_subsets(const Matrix& X, std::size_t m, Rng& rng) {
  const KMeansResult km = kmeans(X, m, rng);
  std::vector<SubsetSpec> out(m);
  for (std::size_t i = 0; i < X.rows(); ++i) out[km.labels[i]].indices.push_back(i);
  for (auto& s : out) s.centroid = centroid_of(X, s.indices);
  return out;
}

}  // namespace less
