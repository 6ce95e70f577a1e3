#include "less/dataset.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "less/errors.hpp"

namespace less {

void Dataset::validate() const {
  if (X.rows() == 0) throw DataError("dataset is empty (no rows)");
  if (X.cols() == 0) throw DataError("dataset has no feature columns");
  if (y.size() != X.rows()) {
    throw DataError("target length " + std::to_string(y.size()) + " does not match row count " +
                    std::to_string(X.rows()));
  }
  if (!feature_names.empty() && feature_names.size() != X.cols()) {
    throw DataError("feature name count does not match column count");
  }
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < X.cols(); ++j) {
      if (!std::isfinite(X(i, j))) {
        throw DataError("non-finite value at row " + std::to_string(i) + ", column " +
                        std::to_string(j));
      }
    }
    if (!std::isfinite(y[i])) throw DataError("non-finite target at row " + std::to_string(i));
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.X = X.select_rows(rows);
  out.y.reserve(rows.size());
  for (std::size_t r : rows) out.y.push_back(y[r]);
  out.feature_names = feature_names;
  out.target_name = target_name;
  return out;
}

NormStats NormStats::identity(std::size_t p) {
  NormStats s;
  s.x_mean.assign(p, 0.0);
  s.x_std.assign(p, 1.0);
  return s;
}

void NormStats::apply_to_row(std::span<const double> raw, std::span<double> out) const {
  if (raw.size() != x_mean.size() || out.size() != raw.size()) {
    throw ConfigError("feature dimension " + std::to_string(raw.size()) + " does not match model (" +
                      std::to_string(x_mean.size()) + ")");
  }
  for (std::size_t j = 0; j < raw.size(); ++j) out[j] = (raw[j] - x_mean[j]) / x_std[j];
}

Vector NormStats::apply_to_row(std::span<const double> raw) const {
  Vector out(raw.size());
  apply_to_row(raw, out);
  return out;
}

Matrix NormStats::apply(const Matrix& X) const {
  Matrix out(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.rows(); ++i) apply_to_row(X.row(i), out.row(i));
  return out;
}

namespace {

// Two-pass population mean/std; a column with zero spread gets std 1.
std::pair<double, double> mean_std(std::span<const double> values, std::size_t stride,
                                   std::size_t count) {
  double mean = 0.0;
  for (std::size_t i = 0; i < count; ++i) mean += values[i * stride];
  mean /= static_cast<double>(count);
  double ss = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = values[i * stride] - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / static_cast<double>(count));
  if (!(sd > 0.0)) sd = 1.0;
  return {mean, sd};
}

}  // namespace

NormStats compute_norm_stats(const Dataset& data) {
  data.validate();
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  NormStats s;
  s.x_mean.resize(p);
  s.x_std.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto [m, sd] = mean_std(data.X.values().subspan(j), p, n);
    s.x_mean[j] = m;
    s.x_std[j] = sd;
  }
  std::tie(s.y_mean, s.y_std) = mean_std(data.y, 1, n);
  return s;
}

std::pair<Dataset, NormStats> normalize(const Dataset& data) {
  NormStats stats = compute_norm_stats(data);
  Dataset out;
  out.X = stats.apply(data.X);
  out.y.resize(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) out.y[i] = stats.normalize_target(data.y[i]);
  out.feature_names = data.feature_names;
  out.target_name = data.target_name;
  return {std::move(out), std::move(stats)};
}

}  // namespace less
