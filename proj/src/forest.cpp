#include "less/forest.hpp"

#include <string>

#include "less/errors.hpp"

namespace less {

double ForestModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const TreeModel& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

ForestModel fit_forest(const Matrix& X, std::span<const double> y, int n_estimators, Rng& rng) {
  if (n_estimators < 1) throw ConfigError("n_estimators must be positive");
  if (X.rows() == 0) throw ConfigError("fit_forest: no rows");
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();

  ForestModel forest;
  forest.max_features = (p + 2) / 3;
  const TreeParams params{2, forest.max_features};
  const std::uint64_t base = rng();
  forest.trees.reserve(static_cast<std::size_t>(n_estimators));
  std::vector<std::size_t> sample(n);
  for (int t = 0; t < n_estimators; ++t) {
    Rng tree_rng = make_rng(base, {static_cast<std::uint64_t>(t)});
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    for (auto& s : sample) s = draw(tree_rng);
    forest.trees.push_back(fit_tree(X, y, sample, params, tree_rng));
  }
  return forest;
}

}  // namespace less
