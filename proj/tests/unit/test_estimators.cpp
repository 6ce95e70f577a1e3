#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gen.hpp"
#include "less/errors.hpp"
#include "less/forest.hpp"
#include "less/linear.hpp"
#include "less/tree.hpp"
#include "oracles.hpp"

using namespace less;

TEST_SUITE("estimators") {

TEST_CASE("fit_linear recovers exact linear data") {
  const Matrix X{{1}, {2}, {3}};
  const std::vector<double> y{2, 4, 6};
  const LinearModel m = fit_linear(X, y);
  REQUIRE(m.coef.size() == 2);
  CHECK(std::abs(m.coef[0] - 2.0) < 1e-9);
  CHECK(std::abs(m.intercept()) < 1e-9);
  CHECK(m.ridge_eta == 0.0);
  CHECK(predict_linear(m, std::vector<double>{3.0}) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("fit_linear on a duplicated column falls back to ridge") {
  const Matrix X{{1, 1}, {2, 2}, {3, 3}};
  const std::vector<double> y{1, 2, 3};
  const LinearModel m = fit_linear(X, y);
  CHECK(m.ridge_eta > 0.0);
  for (double c : m.coef) CHECK(std::isfinite(c));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(m.predict(X.row(i)) - y[i]) < 1e-6);
}

TEST_CASE("fit_linear with one row or all-equal rows stays finite") {
  const Matrix X{{2.0, -1.0}};
  const LinearModel m = fit_linear(X, std::vector<double>{4.0});
  for (double c : m.coef) CHECK(std::isfinite(c));
  CHECK(std::abs(m.predict(X.row(0)) - 4.0) < 1e-6);
}

TEST_CASE("fit_linear matches the normal-equations oracle") {
  gen::Source src(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = src.size(1, 4);
    const std::size_t n = p + 1 + src.size(0, 10);
    const Matrix X = src.matrix(n, p);
    const auto y = src.vector(n);
    const auto want = oracle::ols(gen::rows_of(X), y, true);
    const LinearModel got = fit_linear(X, y);
    REQUIRE(got.ridge_eta == 0.0);
    for (std::size_t j = 0; j <= p; ++j) CHECK(std::abs(got.coef[j] - want[j]) < 1e-8 * (1 + std::abs(want[j])));
  }
  // The five-point 2-D case.
  const Matrix X = src.matrix(5, 2);
  const auto y = src.vector(5);
  const auto want = oracle::ols(gen::rows_of(X), y, true);
  const LinearModel got = fit_linear(X, y);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(got.coef[j] - want[j]) < 1e-8);
}

TEST_CASE("property: full-rank fits satisfy the normal equations") {
  gen::Source src(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = src.size(1, 8);
    const std::size_t n = p + 2 + src.size(0, 40);
    const Matrix X = src.matrix(n, p, src.uniform(0.1, 10.0));
    const auto y = src.vector(n, src.uniform(0.1, 10.0));
    const LinearModel m = fit_linear(X, y);
    std::vector<double> grad(p + 1, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = m.predict(X.row(i)) - y[i];
      for (std::size_t j = 0; j < p; ++j) grad[j] += X(i, j) * r;
      grad[p] += r;
      scale = std::max(scale, std::abs(y[i]));
      for (std::size_t j = 0; j < p; ++j) scale = std::max(scale, std::abs(X(i, j)));
    }
    for (double g : grad) CHECK(std::abs(g) / (scale * scale * n) < 1e-6);
  }
}

TEST_CASE("fit_linear on listed rows equals fitting the gathered rows") {
  gen::Source src(9);
  const Matrix X = src.matrix(30, 3);
  const auto y = src.vector(30);
  const std::vector<std::size_t> rows{0, 3, 3, 7, 12, 19, 25, 29};
  std::vector<double> ys;
  for (auto r : rows) ys.push_back(y[r]);
  const LinearModel a = fit_linear(X, y, rows);
  const LinearModel b = fit_linear(X.select_rows(rows), ys);
  for (std::size_t j = 0; j < a.coef.size(); ++j) CHECK(a.coef[j] == doctest::Approx(b.coef[j]).epsilon(1e-12));
}

TEST_CASE("predict_linear examples") {
  LinearModel zero{{0.0, 0.0, 0.0}, true, 0.0};
  CHECK(zero.predict(std::vector<double>{5.0, -3.0}) == 0.0);
  CHECK_THROWS_AS(zero.predict(std::vector<double>{1.0}), ConfigError);
  gen::Source src(10);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = src.size(1, 20);
    LinearModel m{src.vector(p + 1), true, 0.0};
    const auto x = src.vector(p);
    auto xa = x;
    xa.push_back(1.0);
    CHECK(std::abs(m.predict(x) - oracle::dot(m.coef, xa)) < 1e-12 * (1 + std::abs(oracle::dot(m.coef, xa))));
  }
  LinearModel no_icpt{{2.0, 1.0}, false, 0.0};
  CHECK(no_icpt.predict(std::vector<double>{1.0, 1.0}) == 3.0);
}

TEST_CASE("solve_spd_with_ridge on a singular system returns the least-squares fit") {
  // Gram of [1 1; 2 2; 3 3] with rhs X^T y for y = [1, 2, 3].
  const Matrix G{{14, 14}, {14, 14}};
  const std::vector<double> rhs{14, 14};
  const SpdSolution s = solve_spd_with_ridge(G, rhs);
  CHECK(s.eta > 0.0);
  CHECK(std::abs(s.x[0] + s.x[1] - 1.0) < 1e-8);
}

TEST_CASE("tree: constant target gives one leaf") {
  Rng rng(1);
  const Matrix X{{1}, {2}, {3}, {4}};
  const TreeModel t = fit_tree(X, std::vector<double>{5, 5, 5, 5}, TreeParams{}, rng);
  CHECK(t.nodes.size() == 1);
  CHECK(t.predict(std::vector<double>{100.0}) == 5.0);
}

TEST_CASE("tree: step data splits once between 1 and 2") {
  Rng rng(1);
  const Matrix X{{0}, {1}, {2}, {3}};
  const std::vector<double> y{0, 0, 10, 10};
  const TreeModel t = fit_tree(X, y, TreeParams{}, rng);
  REQUIRE(t.nodes.size() == 3);
  const auto want = oracle::best_split(gen::rows_of(X), y);
  CHECK(t.nodes[0].feature == want.feature);
  CHECK(t.nodes[0].threshold == want.threshold);
  CHECK(t.nodes[0].threshold == 1.5);
  CHECK(t.predict(std::vector<double>{0.5}) == 0.0);
  CHECK(t.predict(std::vector<double>{2.5}) == 10.0);
}

TEST_CASE("tree root split matches the exhaustive oracle") {
  gen::Source src(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = src.size(2, 20);
    const std::size_t p = src.size(1, 4);
    Matrix X(n, p);
    std::vector<double> y(n);
    // Coarse values create ties in both features and scores.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) X(i, j) = static_cast<double>(src.size(0, 5));
      y[i] = trial % 3 == 0 ? static_cast<double>(src.size(0, 3)) : src.normal();
    }
    Rng rng(trial);
    const TreeModel t = fit_tree(X, y, TreeParams{}, rng);
    const auto want = oracle::best_split(gen::rows_of(X), y);
    const bool constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (want.feature < 0 || constant) {
      CHECK(t.nodes.size() == 1);
      continue;
    }
    CAPTURE(trial);
    CHECK(t.nodes[0].feature == want.feature);
    CHECK(t.nodes[0].threshold == want.threshold);
  }
}

TEST_CASE("tree: fully grown tree interpolates distinct inputs") {
  gen::Source src(13);
  const Matrix X = src.matrix(40, 3);
  const auto y = src.vector(40);
  Rng rng(2);
  const TreeModel t = fit_tree(X, y, TreeParams{2, 0}, rng);
  for (std::size_t i = 0; i < 40; ++i) CHECK(t.predict(X.row(i)) == y[i]);
}

TEST_CASE("tree structural invariants and min_samples_split") {
  gen::Source src(14);
  for (int mss : {2, 4, 10}) {
    const Matrix X = src.matrix(60, 2);
    const auto y = src.vector(60);
    Rng rng(3);
    const TreeModel t = fit_tree(X, y, TreeParams{mss, 0}, rng);
    for (const TreeNode& node : t.nodes) {
      CHECK(node.n_samples >= 1);
      if (!node.is_leaf()) {
        CHECK(node.n_samples >= static_cast<unsigned>(mss));
        CHECK(t.nodes[node.left].n_samples + t.nodes[node.right].n_samples == node.n_samples);
      }
    }
  }
}

TEST_CASE("property: tree predictions are piecewise constant") {
  gen::Source src(15);
  const Matrix X = src.matrix(50, 2);
  const auto y = src.vector(50);
  Rng rng(4);
  const TreeModel t = fit_tree(X, y, TreeParams{4, 0}, rng);
  std::vector<double> thresholds;
  for (const auto& n : t.nodes) {
    if (!n.is_leaf()) thresholds.push_back(n.threshold);
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x{src.normal(), src.normal()};
    std::vector<double> x2 = x;
    const double eps = 1e-9;
    bool crosses = false;
    for (double thr : thresholds) {
      for (std::size_t j = 0; j < 2; ++j) crosses = crosses || (x[j] <= thr) != (x[j] + eps <= thr);
    }
    if (crosses) continue;
    x2[0] += eps;
    x2[1] += eps;
    CHECK(t.predict(x) == t.predict(x2));
  }
}

TEST_CASE("forest: single tree and constant target") {
  gen::Source src(16);
  const Matrix X = src.matrix(30, 3);
  Rng rng(5);
  const ForestModel f = fit_forest(X, std::vector<double>(30, 2.5), 7, rng);
  CHECK(f.trees.size() == 7);
  CHECK(f.max_features == 1);
  CHECK(f.predict(std::vector<double>{0.3, -1.0, 2.0}) == 2.5);

  const auto y = src.vector(30);
  Rng a(6), b(6);
  const ForestModel one = fit_forest(X, y, 1, a);
  const ForestModel again = fit_forest(X, y, 1, b);
  CHECK(one == again);
  for (std::size_t i = 0; i < 30; ++i) CHECK(one.predict(X.row(i)) == one.trees[0].predict(X.row(i)));
}

TEST_CASE("property: forest prediction is the mean of its trees") {
  gen::Source src(17);
  const Matrix X = src.matrix(40, 4);
  const auto y = src.vector(40);
  Rng rng(8);
  const ForestModel f = fit_forest(X, y, 25, rng);
  CHECK(f.max_features == 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = src.vector(4);
    double sum = 0.0;
    for (const auto& t : f.trees) sum += t.predict(x);
    CHECK(std::abs(f.predict(x) - sum / f.trees.size()) < 1e-12);
  }
}

TEST_CASE("forest beats a single tree on a held-out noisy quadratic") {
  std::vector<double> forest_mse, tree_mse;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    gen::Source src(100 + seed);
    auto draw = [&](std::size_t n, Matrix& X, std::vector<double>& y) {
      X = Matrix(n, 2);
      y.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = src.uniform(-2, 2);
        X(i, 1) = src.uniform(-2, 2);
        y[i] = X(i, 0) * X(i, 0) + 0.5 * X(i, 1) + src.normal(0.5);
      }
    };
    Matrix Xtr, Xte;
    std::vector<double> ytr, yte;
    draw(200, Xtr, ytr);
    draw(200, Xte, yte);
    Rng r1(seed), r2(seed);
    const ForestModel f = fit_forest(Xtr, ytr, 50, r1);
    const TreeModel t = fit_tree(Xtr, ytr, TreeParams{}, r2);
    double ef = 0.0, et = 0.0;
    for (std::size_t i = 0; i < 200; ++i) {
      const double clean = Xte(i, 0) * Xte(i, 0) + 0.5 * Xte(i, 1);
      ef += std::pow(f.predict(Xte.row(i)) - clean, 2);
      et += std::pow(t.predict(Xte.row(i)) - clean, 2);
    }
    forest_mse.push_back(ef / 200);
    tree_mse.push_back(et / 200);
  }
  std::sort(forest_mse.begin(), forest_mse.end());
  std::sort(tree_mse.begin(), tree_mse.end());
  CHECK(forest_mse[5] <= tree_mse[5]);
}

}
