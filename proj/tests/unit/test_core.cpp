#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gen.hpp"
#include "less/config.hpp"
#include "less/dataset.hpp"
#include "less/errors.hpp"
#include "less/matrix.hpp"
#include "less/random.hpp"

using namespace less;

TEST_SUITE("core") {

TEST_CASE("matrix basics") {
  Matrix M{{1, 2, 3}, {4, 5, 6}};
  CHECK(M.rows() == 2);
  CHECK(M.cols() == 3);
  CHECK(M(1, 2) == 6);
  const std::vector<std::size_t> pick{1, 1, 0};
  const Matrix S = M.select_rows(pick);
  CHECK(S.rows() == 3);
  CHECK(S(0, 0) == 4);
  CHECK(S(2, 2) == 3);
  M.append_row(std::vector<double>{7, 8, 9});
  CHECK(M.rows() == 3);
  CHECK(M(2, 1) == 8);
}

TEST_CASE("dataset validation") {
  Dataset d;
  CHECK_THROWS_AS(d.validate(), DataError);
  d.X = Matrix{{1.0}, {2.0}};
  d.y = {1.0};
  CHECK_THROWS_AS(d.validate(), DataError);
  d.y = {1.0, NAN};
  CHECK_THROWS_AS(d.validate(), DataError);
  d.y = {1.0, 2.0};
  CHECK_NOTHROW(d.validate());
  d.X(1, 0) = INFINITY;
  CHECK_THROWS_AS(d.validate(), DataError);
}

TEST_CASE("normalize: column [2,4,6] maps to population z-scores") {
  Dataset d;
  d.X = Matrix{{2.0, 5.0}, {4.0, 5.0}, {6.0, 5.0}};
  d.y = {1.0, 2.0, 3.0};
  const auto [nd, stats] = normalize(d);
  const double z = 2.0 / std::sqrt(8.0 / 3.0);  // (6-4)/std, std = sqrt(8/3)
  CHECK(nd.X(0, 0) == doctest::Approx(-z).epsilon(1e-12));
  CHECK(nd.X(1, 0) == doctest::Approx(0.0));
  CHECK(nd.X(2, 0) == doctest::Approx(z).epsilon(1e-12));
  CHECK(z == doctest::Approx(1.2247).epsilon(1e-4));
  // Constant column collapses to zeros with std clamped to 1.
  CHECK(stats.x_std[1] == 1.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(nd.X(i, 1) == 0.0);
}

TEST_CASE("denormalize_prediction examples") {
  NormStats s = NormStats::identity(1);
  s.y_mean = 3.0;
  s.y_std = 2.0;
  CHECK(denormalize_prediction(0.0, s) == 3.0);
  CHECK(denormalize_prediction(1.0, s) == 5.0);
}

TEST_CASE("property: normalized columns are standardized and invertible") {
  gen::Source src(42);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = src.size(2, 60);
    const std::size_t p = src.size(1, 6);
    Dataset d = src.dataset(n, p);
    if (src.coin()) {
      for (std::size_t i = 0; i < n; ++i) d.X(i, 0) = 7.5;
    }
    const auto [nd, s] = normalize(d);
    for (std::size_t j = 0; j < p; ++j) {
      CHECK(s.x_std[j] > 0.0);
      double mean = 0.0, var = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += nd.X(i, j);
      mean /= n;
      for (std::size_t i = 0; i < n; ++i) var += (nd.X(i, j) - mean) * (nd.X(i, j) - mean);
      const double sd = std::sqrt(var / n);
      CHECK(std::abs(mean) < 1e-10);
      if (sd > 0.0) CHECK(std::abs(sd - 1.0) < 1e-10);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double back = denormalize_prediction(nd.y[i], s);
      CHECK(std::abs(back - d.y[i]) <= 1e-12 * std::max(1.0, std::abs(d.y[i])));
    }
  }
}

TEST_CASE("norm stats reject wrong row width") {
  const NormStats s = NormStats::identity(2);
  CHECK_THROWS_AS(s.apply_to_row(std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("resolve_plan: k floor, ceil m and default lambda") {
  LessConfig c;
  c.frac_of_samples = 0.05;
  auto plan = resolve_plan(c, 200);
  CHECK(plan.k == 10);
  CHECK(plan.m == 20);
  CHECK(plan.lambda == doctest::Approx(1.0 / 400.0));

  c.frac_of_samples = 0.001;  // round(0.2) = 0 -> floor of 2
  plan = resolve_plan(c, 200);
  CHECK(plan.k == 2);
  CHECK(plan.m == 100);

  c.frac_of_samples = 0.3;  // k = 3, m = ceil(10/3) = 4
  plan = resolve_plan(c, 10);
  CHECK(plan.k == 3);
  CHECK(plan.m == 4);

  c.frac_of_samples = 1.0;
  plan = resolve_plan(c, 1);  // k clamped to n
  CHECK(plan.k == 1);
  CHECK(plan.m == 1);

  c.lambda = 0.25;
  CHECK(resolve_plan(c, 50).lambda == 0.25);

  c.subsets = SubsetStrategy::kmeans;
  c.n_clusters = 7;
  CHECK(resolve_plan(c, 50).m == 7);
  c.n_clusters = 60;
  CHECK_THROWS_AS(resolve_plan(c, 50), ConfigError);
}

TEST_CASE("config validation and string forms") {
  LessConfig c;
  CHECK_NOTHROW(c.validate());
  c.frac_of_samples = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.n_replications = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.lambda = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  CHECK(parse_ablation("now-g") == Ablation::no_weighting);
  CHECK(parse_ablation("w-nog") == Ablation::no_global);
  CHECK(parse_ablation("now-nog") == Ablation::neither);
  CHECK(parse_local("dt") == LocalEstimator::decision_tree);
  CHECK(parse_global("rf") == GlobalEstimator::random_forest);
  CHECK(parse_subsets("kmeans") == SubsetStrategy::kmeans);
  CHECK_THROWS_AS(parse_local("svm"), ConfigError);
  for (auto a : {Ablation::full, Ablation::no_weighting, Ablation::no_global, Ablation::neither}) {
    CHECK(parse_ablation(to_string(a)) == a);
  }
}

TEST_CASE("derived seeds depend on every path element") {
  CHECK(derive_seed(1, {0}) != derive_seed(1, {1}));
  CHECK(derive_seed(1, {0}) != derive_seed(2, {0}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(9, {4, 5}) == derive_seed(9, {4, 5}));
}

}
