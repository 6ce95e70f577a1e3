#pragma once

#include <span>

#include "less/matrix.hpp"

namespace less {

// At or above this locality the normalized weights are the exact one-hot
// vector on the nearest centroid.
inline constexpr double kLambdaCap = 1e12;

double distance(std::span<const double> a, std::span<const double> b);

// Distances from x to every row of `centroids`, written to `out`.
void distances_to(std::span<const double> x, const Matrix& centroids, std::span<double> out);

// w_j(x) = exp(-lambda d(x, c_j)), divided by its sum when `normalized`.
// The normalized form is evaluated after subtracting the smallest distance.
Vector compute_weights(std::span<const double> x, const Matrix& centroids, double lambda,
                       bool normalized);

// Same, from precomputed distances; `out` may alias `dist`.
void weights_from_distances(std::span<const double> dist, double lambda, bool normalized,
                            std::span<double> out);

}  // namespace less
