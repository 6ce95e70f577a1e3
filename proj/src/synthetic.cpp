#include "less/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "less/errors.hpp"
#include "less/random.hpp"

namespace less::synthetic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Sample empty_sample(std::size_t n, std::size_t p) {
  if (n == 0 || p == 0) throw ConfigError("synthetic data needs n >= 1 and p >= 1");
  Sample s;
  s.data.X = Matrix(n, p);
  s.data.y.resize(n);
  s.y_clean.resize(n);
  for (std::size_t j = 0; j < p; ++j) s.data.feature_names.push_back("x" + std::to_string(j));
  s.data.target_name = "y";
  return s;
}

}  // namespace

double sinusoid_clean(double x) { return std::sin(x); }

Sample sinusoid(std::size_t n, std::uint64_t seed, double noise) {
  Sample s = empty_sample(n, 1);
  Rng rng = make_rng(seed, {0x5151});
  std::uniform_real_distribution<double> ux(-kTwoPi, kTwoPi);
  std::normal_distribution<double> eps(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    s.data.X(i, 0) = x;
    s.y_clean[i] = sinusoid_clean(x);
    s.data.y[i] = s.y_clean[i] + noise * eps(rng);
  }
  return s;
}

Vector sinusoid_grid(std::size_t points) {
  if (points < 2) throw ConfigError("evaluation grid needs at least 2 points");
  Vector xs(points);
  for (std::size_t i = 0; i < points; ++i) {
    xs[i] = -kTwoPi + 2.0 * kTwoPi * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return xs;
}

Sample linear(std::size_t n, std::size_t p, std::uint64_t seed, double noise) {
  Sample s = empty_sample(n, p);
  Rng rng = make_rng(seed, {0x11});
  std::normal_distribution<double> g(0.0, 1.0);
  Vector beta(p);
  for (double& b : beta) b = g(rng);
  const double intercept = g(rng);
  for (std::size_t i = 0; i < n; ++i) {
    double v = intercept;
    for (std::size_t j = 0; j < p; ++j) {
      s.data.X(i, j) = g(rng);
      v += beta[j] * s.data.X(i, j);
    }
    s.y_clean[i] = v;
    s.data.y[i] = v + noise * g(rng);
  }
  return s;
}

Sample piecewise_linear(std::size_t n, std::size_t p, std::uint64_t seed, double noise) {
  Sample s = empty_sample(n, p);
  Rng rng = make_rng(seed, {0x3333});
  std::normal_distribution<double> g(0.0, 1.0);
  constexpr std::size_t kRegimes = 3;
  Matrix centers(kRegimes, p);
  Matrix slopes(kRegimes, p);
  Vector offsets(kRegimes);
  for (std::size_t c = 0; c < kRegimes; ++c) {
    // Centers on a scaled simplex-like layout so the regimes never touch.
    for (std::size_t j = 0; j < p; ++j) {
      centers(c, j) = (j % kRegimes == c ? 10.0 : 0.0) + (p == 1 ? 10.0 * static_cast<double>(c) : 0.0);
      slopes(c, j) = 3.0 * g(rng);
    }
    offsets[c] = 5.0 * g(rng);
  }
  std::uniform_int_distribution<std::size_t> pick(0, kRegimes - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = pick(rng);
    double v = offsets[c];
    for (std::size_t j = 0; j < p; ++j) {
      const double local = g(rng);
      s.data.X(i, j) = centers(c, j) + local;
      v += slopes(c, j) * local;
    }
    s.y_clean[i] = v;
    s.data.y[i] = v + noise * g(rng);
  }
  return s;
}

Sample friedman_like(std::size_t n, std::size_t p, std::uint64_t seed, double noise) {
  Sample s = empty_sample(n, p);
  Rng rng = make_rng(seed, {0x7777});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double x = u(rng);
      s.data.X(i, j) = x;
      v += (j % 2 == 0 ? std::sin(std::numbers::pi * x) : x * x) / static_cast<double>(j + 1);
    }
    if (p >= 2) v += s.data.X(i, 0) * s.data.X(i, 1);
    s.y_clean[i] = v;
    s.data.y[i] = v + noise * g(rng);
  }
  return s;
}

}  // namespace less::synthetic
