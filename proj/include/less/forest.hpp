#pragma once

#include <span>
#include <vector>

#include "less/matrix.hpp"
#include "less/random.hpp"
#include "less/tree.hpp"

namespace less {

struct ForestModel {
  std::vector<TreeModel> trees;
  std::size_t max_features = 0;  // features examined per split

  // Arithmetic mean of the tree predictions.
  double predict(std::span<const double> x) const;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

// Regression forest: each tree is grown to purity (min_samples_split 2) on a
// bootstrap resample of n rows drawn with replacement, examining ceil(p/3)
// features per split. Tree t draws from its own stream derived from one
// value taken from `rng`, so trees are independent of construction order.
ForestModel fit_forest(const Matrix& X, std::span<const double> y, int n_estimators, Rng& rng);

}  // namespace less
