#include "less/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "less/errors.hpp"
#include "less/simd.hpp"

namespace less {

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("distance: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  return std::sqrt(simd::squared_distance(a, b));
}

void distances_to(std::span<const double> x, const Matrix& centroids, std::span<double> out) {
  if (x.size() != centroids.cols()) throw ConfigError("distances_to: dimension mismatch");
  for (std::size_t j = 0; j < centroids.rows(); ++j) {
    out[j] = std::sqrt(simd::squared_distance(x, centroids.row(j)));
  }
}

void weights_from_distances(std::span<const double> dist, double lambda, bool normalized,
                            std::span<double> out) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (dist.empty()) throw ConfigError("weights need at least one centroid");
  if (!normalized) {
    for (std::size_t j = 0; j < dist.size(); ++j) out[j] = std::exp(-lambda * dist[j]);
    return;
  }
  const auto nearest = static_cast<std::size_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
  if (lambda >= kLambdaCap) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(dist.size()), 0.0);
    out[nearest] = 1.0;
    return;
  }
  const double shift = dist[nearest];
  double total = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    out[j] = std::exp(-lambda * (dist[j] - shift));
    total += out[j];
  }
  for (std::size_t j = 0; j < dist.size(); ++j) out[j] /= total;
}

Vector compute_weights(std::span<const double> x, const Matrix& centroids, double lambda,
                       bool normalized) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (centroids.rows() == 0) throw ConfigError("weights need at least one centroid");
  Vector w(centroids.rows());
  distances_to(x, centroids, w);
  weights_from_distances(w, lambda, normalized, w);
  return w;
}

}  // namespace less
