#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "less/matrix.hpp"

namespace less {

struct Dataset {
  Matrix X;
  Vector y;
  std::vector<std::string> feature_names;  // empty or one per column
  std::string target_name;

  std::size_t n() const { return X.rows(); }
  std::size_t p() const { return X.cols(); }

  // Throws DataError unless n >= 1, p >= 1, |y| == n and every entry is finite.
  void validate() const;

  Dataset subset(std::span<const std::size_t> rows) const;
};

// Column statistics used to standardize inputs and output. Standard
// deviations are population (divide-by-n) values; zero-variance columns are
// stored with std 1 so they map to all zeros.
struct NormStats {
  Vector x_mean;
  Vector x_std;
  double y_mean = 0.0;
  double y_std = 1.0;

  static NormStats identity(std::size_t p);

  void apply_to_row(std::span<const double> raw, std::span<double> out) const;
  Vector apply_to_row(std::span<const double> raw) const;
  Matrix apply(const Matrix& X) const;
  double normalize_target(double y) const { return (y - y_mean) / y_std; }

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

NormStats compute_norm_stats(const Dataset& data);

// Standardized copy of `data` plus the statistics that produced it.
std::pair<Dataset, NormStats> normalize(const Dataset& data);

inline double denormalize_prediction(double yhat_norm, const NormStats& norm) {
  return yhat_norm * norm.y_std + norm.y_mean;
}

}  // namespace less
