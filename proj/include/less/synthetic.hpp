#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "less/dataset.hpp"

namespace less::synthetic {

// Draws together with the noise-free targets at the same inputs.
struct Sample {
  Dataset data;
  Vector y_clean;
};

// y = sin(x) + N(0, noise^2), x ~ U[-2pi, 2pi].
Sample sinusoid(std::size_t n, std::uint64_t seed, double noise = 0.3);
double sinusoid_clean(double x);
// Evenly spaced inputs over the sinusoid domain, endpoints included.
Vector sinusoid_grid(std::size_t points);

// y = x . beta + intercept + N(0, noise^2), x ~ N(0, I_p); beta ~ N(0, 1)
// drawn from the same seed.
Sample linear(std::size_t n, std::size_t p, std::uint64_t seed, double noise = 0.1);

// Three well-separated clusters in p dimensions, each with its own affine
// response.
Sample piecewise_linear(std::size_t n, std::size_t p, std::uint64_t seed, double noise = 0.1);

// Smooth nonlinear response on U[-1, 1]^p, used for the scaling benchmarks.
Sample friedman_like(std::size_t n, std::size_t p, std::uint64_t seed, double noise = 0.1);

}  // namespace less::synthetic
