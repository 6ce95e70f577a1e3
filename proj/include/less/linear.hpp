#pragma once

#include <cstddef>
#include <span>

#include "less/matrix.hpp"

namespace less {

// Least-squares linear model. With an intercept, coef holds p feature
// weights followed by the intercept, i.e. the fit used an appended ones column.
struct LinearModel {
  Vector coef;
  bool fit_intercept = true;
  double ridge_eta = 0.0;  // 0 when the plain normal equations were solvable

  std::size_t n_features() const { return fit_intercept ? coef.size() - 1 : coef.size(); }
  double intercept() const { return fit_intercept ? coef.back() : 0.0; }
  // Throws ConfigError on a dimension mismatch.
  double predict(std::span<const double> x) const;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct SpdSolution {
  Vector x;
  double eta = 0.0;
};

// Solves gram * x = rhs for a symmetric positive semidefinite gram. Cholesky
// is tried first; if it breaks down or a pivot drops below 1e-10 * trace/d,
// the system is regularized with eta = 1e-8 * trace/d and the ridge solution
// is refined by iterated Tikhonov steps, which converge to the minimum-norm
// least-squares solution on the well-determined subspace.
SpdSolution solve_spd_with_ridge(const Matrix& gram, std::span<const double> rhs);

LinearModel fit_linear(const Matrix& X, std::span<const double> y, bool intercept = true);
// Fit on the listed rows of X / y only (rows may repeat).
LinearModel fit_linear(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                       bool intercept = true);

inline double predict_linear(const LinearModel& model, std::span<const double> x) {
  return model.predict(x);
}

}  // namespace less
