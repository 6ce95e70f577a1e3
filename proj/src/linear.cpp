#include "less/linear.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "less/errors.hpp"
#include "less/simd.hpp"

namespace less {

namespace {

constexpr double kPivotTolerance = 1e-10;
constexpr double kRidgeScale = 1e-8;
constexpr int kRefinementSteps = 8;

// In-place lower Cholesky of a d x d matrix (row-major). Returns false when a
// pivot is not above `min_pivot`.
bool cholesky(std::vector<double>& a, std::size_t d, double min_pivot) {
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (!(diag > min_pivot)) return false;
    const double ljj = std::sqrt(diag);
    a[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = s / ljj;
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t d, std::span<double> x) {
  for (std::size_t i = 0; i < d; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * x[k];
    x[i] = s / l[i * d + i];
  }
  for (std::size_t i = d; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < d; ++k) s -= l[k * d + i] * x[k];
    x[i] = s / l[i * d + i];
  }
}

std::optional<std::vector<double>> factor(const Matrix& gram, double shift, double min_pivot) {
  const std::size_t d = gram.rows();
  std::vector<double> a(gram.values().begin(), gram.values().end());
  for (std::size_t i = 0; i < d; ++i) a[i * d + i] += shift;
  if (!cholesky(a, d, min_pivot)) return std::nullopt;
  return a;
}

}  // namespace

SpdSolution solve_spd_with_ridge(const Matrix& gram, std::span<const double> rhs) {
  const std::size_t d = gram.rows();
  if (gram.cols() != d || rhs.size() != d) throw ConfigError("solve_spd_with_ridge: shape mismatch");
  SpdSolution out;
  out.x.assign(d, 0.0);
  if (d == 0) return out;

  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += gram(i, i);
  if (!(trace > 0.0)) return out;  // all-zero design: the zero vector is a least-squares solution
  if (!std::isfinite(trace)) throw NumericError("non-finite Gram matrix");
  const double scale = trace / static_cast<double>(d);

  if (auto l = factor(gram, 0.0, kPivotTolerance * scale)) {
    std::copy(rhs.begin(), rhs.end(), out.x.begin());
    cholesky_solve(*l, d, out.x);
    return out;
  }

  double eta = kRidgeScale * scale;
  std::optional<std::vector<double>> l;
  for (int attempt = 0; attempt < 8 && !l; ++attempt, eta *= 10.0) l = factor(gram, eta, 0.0);
  if (!l) throw NumericError("ridge-regularized Gram matrix is not positive definite");
  eta /= 10.0;
  out.eta = eta;

  // x_{t+1} = x_t + (G + eta I)^{-1} (b - G x_t), starting from x_0 = 0.
  Vector residual(d);
  for (int step = 0; step <= kRefinementSteps; ++step) {
    for (std::size_t i = 0; i < d; ++i) {
      residual[i] = rhs[i] - simd::dot(gram.row(i), out.x);
    }
    cholesky_solve(*l, d, residual);
    for (std::size_t i = 0; i < d; ++i) out.x[i] += residual[i];
  }
  for (double v : out.x) {
    if (!std::isfinite(v)) throw NumericError("least-squares solution is not finite");
  }
  return out;
}

double LinearModel::predict(std::span<const double> x) const {
  if (x.size() != n_features()) {
    throw ConfigError("linear model expects " + std::to_string(n_features()) + " features, got " +
                      std::to_string(x.size()));
  }
  return simd::dot(std::span<const double>(coef).first(x.size()), x) + intercept();
}

LinearModel fit_linear(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                       bool intercept) {
  if (y.size() != X.rows()) throw ConfigError("fit_linear: y length does not match X rows");
  if (rows.empty()) throw ConfigError("fit_linear: no rows");
  const std::size_t p = X.cols();
  const std::size_t d = p + (intercept ? 1 : 0);

  // Upper triangle of [X 1]^T [X 1] via rank-one row updates.
  Matrix gram(d, d);
  Vector rhs(d, 0.0);
  Vector xt(d, 1.0);
  for (std::size_t r : rows) {
    const auto src = X.row(r);
    std::copy(src.begin(), src.end(), xt.begin());
    for (std::size_t i = 0; i < d; ++i) {
      simd::axpy(xt[i], std::span<const double>(xt).subspan(i), gram.row(i).subspan(i));
    }
    simd::axpy(y[r], xt, rhs);
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);
  }

  SpdSolution sol = solve_spd_with_ridge(gram, rhs);
  LinearModel model;
  model.coef = std::move(sol.x);
  model.fit_intercept = intercept;
  model.ridge_eta = sol.eta;
  return model;
}

LinearModel fit_linear(const Matrix& X, std::span<const double> y, bool intercept) {
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_linear(X, y, rows, intercept);
}

}  // namespace less
