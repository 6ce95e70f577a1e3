#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gen.hpp"
#include "less/errors.hpp"
#include "less/model.hpp"
#include "less/weighting.hpp"
#include "oracles.hpp"

using namespace less;

namespace {

LessConfig linear_config(double frac, int r, std::optional<double> lambda, std::uint64_t seed) {
  LessConfig c;
  c.frac_of_samples = frac;
  c.n_replications = r;
  c.lambda = lambda;
  c.seed = seed;
  return c;
}

ReplicationModel two_local_rep(double a, double b) {
  ReplicationModel rep;
  rep.locals = {LinearModel{{0.0, a}, true, 0.0}, LinearModel{{0.0, b}, true, 0.0}};
  rep.centroids = Matrix{{-1.0}, {1.0}};
  rep.lambda = 0.0;
  return rep;
}

}  // namespace

TEST_SUITE("less") {

TEST_CASE("generate_features examples") {
  ReplicationModel one;
  one.locals = {LinearModel{{2.0, 1.0}, true, 0.0}};
  one.centroids = Matrix{{0.0}};
  one.lambda = 3.0;
  CHECK(generate_features(std::vector<double>{4.0}, one) == Vector{9.0});

  const ReplicationModel rep = two_local_rep(4.0, 8.0);
  CHECK(generate_features(std::vector<double>{0.3}, rep) == Vector{2.0, 4.0});
  CHECK_THROWS_AS(generate_features(std::vector<double>{0.3, 1.0}, rep), ConfigError);

  ReplicationModel unit = rep;
  unit.ablation = Ablation::no_weighting;
  unit.lambda = 5.0;
  CHECK(generate_features(std::vector<double>{0.3}, unit) == Vector{4.0, 8.0});
}

TEST_CASE("generate_features is the componentwise product of weights and local predictions") {
  gen::Source src(1);
  const Dataset d = src.dataset(120, 3);
  const LessModel model = fit(d, linear_config(0.1, 2, 0.7, 3));
  for (int t = 0; t < 30; ++t) {
    const auto x = src.vector(3);
    for (const auto& rep : model.replications) {
      const Vector z = generate_features(x, rep);
      const Vector w = compute_weights(x, rep.centroids, rep.lambda, true);
      for (std::size_t j = 0; j < rep.m(); ++j) {
        const double want = w[j] * predict_local(rep.locals[j], x);
        CHECK(std::abs(z[j] - want) < 1e-12 * (1 + std::abs(want)));
      }
    }
  }
}

TEST_CASE("fit: replication count, m and centroids") {
  gen::Source src(2);
  const Dataset d = src.dataset(200, 2);
  const LessModel model = fit(d, linear_config(0.05, 4, std::nullopt, 1));
  CHECK(model.replications.size() == 4);
  CHECK(model.plan.m == 20);
  CHECK(model.plan.lambda == doctest::Approx(1.0 / 400.0));
  for (const auto& rep : model.replications) {
    CHECK(rep.m() == 20);
    CHECK(rep.centroids.rows() == 20);
    CHECK(rep.lambda == model.plan.lambda);
  }
}

TEST_CASE("lambda = 0 with linear learners reproduces OLS") {
  gen::Source src(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t p = src.size(1, 3);
    const std::size_t n = src.size(60, 200);
    const Dataset d = src.dataset(n, p);
    const LessModel model = fit(d, linear_config(0.1, 1, 0.0, trial));
    REQUIRE(model.plan.m >= p + 1);
    const auto [nd, stats] = normalize(d);
    const auto beta = oracle::ols(gen::rows_of(nd.X), nd.y, true);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> x0 = src.vector(p, 3.0);
      for (std::size_t j = 0; j < p; ++j) x0[j] = stats.x_mean[j] + stats.x_std[j] * x0[j];
      const Vector xn = stats.apply_to_row(x0);
      auto xa = xn;
      xa.push_back(1.0);
      const double want = oracle::dot(beta, xa);
      const double got = stats.normalize_target(predict(model, x0));
      CHECK(std::abs(got - want) < 1e-8);
      const LocalExplanation e = local_coefficients(model, x0);
      for (std::size_t j = 0; j <= p; ++j) CHECK(std::abs(e.normalized[j] - beta[j]) < 1e-8);
    }
  }
}

TEST_CASE("kmeans subsets with lambda at the cap pick the nearest local model") {
  gen::Source src(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset d = src.dataset(150, 2);
    LessConfig c = linear_config(0.1, 1, kLambdaCap, trial);
    c.subsets = SubsetStrategy::kmeans;
    c.n_clusters = 5;
    const LessModel model = fit(d, c);
    const auto& rep = model.replications.front();
    for (int t = 0; t < 50; ++t) {
      const auto xn = src.vector(2, 1.5);
      std::size_t best = 0;
      for (std::size_t j = 1; j < rep.m(); ++j) {
        if (distance(xn, rep.centroids.row(j)) < distance(xn, rep.centroids.row(best))) best = j;
      }
      CHECK(std::abs(predict_replication(rep, xn) - predict_local(rep.locals[best], xn)) < 1e-6);
    }
  }
}

TEST_CASE("averaging identical replications is the identity") {
  gen::Source src(5);
  const Dataset d = src.dataset(80, 2);
  const LessModel one = fit(d, linear_config(0.1, 1, std::nullopt, 9));
  LessModel two = one;
  two.replications.push_back(one.replications.front());
  for (int t = 0; t < 20; ++t) {
    const auto x = src.vector(2);
    CHECK(predict(two, x) == doctest::Approx(predict(one, x)).epsilon(1e-15));
  }
  // Same construction via fit_replication with the same seed twice.
  const auto [nd, stats] = normalize(d);
  const ReplicationModel a = fit_replication(nd.X, nd.y, one.config, replication_seed(9, 0));
  CHECK(a == one.replications.front());
}

TEST_CASE("property: averaged prediction lies between replication extremes") {
  gen::Source src(6);
  const Dataset d = src.dataset(150, 3);
  LessConfig c = linear_config(0.05, 7, std::nullopt, 2);
  c.local = LocalEstimator::decision_tree;
  const LessModel model = fit(d, c);
  for (int t = 0; t < 100; ++t) {
    const auto x = src.vector(3, 3.0);
    const Vector per = predict_replications(model, x);
    const double avg = model.norm.normalize_target(predict(model, x));
    const auto [lo, hi] = std::minmax_element(per.begin(), per.end());
    CHECK(avg >= *lo - 1e-12);
    CHECK(avg <= *hi + 1e-12);
  }
}

TEST_CASE("constant target predicts that constant") {
  gen::Source src(7);
  Dataset d = src.dataset(60, 2);
  std::fill(d.y.begin(), d.y.end(), 4.25);
  for (auto local : {LocalEstimator::linear, LocalEstimator::decision_tree}) {
    LessConfig c = linear_config(0.2, 3, std::nullopt, 1);
    c.local = local;
    const LessModel model = fit(d, c);
    CHECK(predict(model, std::vector<double>{0.5, -2.0}) == doctest::Approx(4.25).epsilon(1e-12));
  }
}

TEST_CASE("r = 1 prediction equals a hand-unrolled pipeline on six points") {
  Dataset d;
  d.X = Matrix{{0.0, 1.0}, {1.0, 0.5}, {2.0, 2.0}, {3.0, 1.0}, {4.0, 3.5}, {5.0, 2.0}};
  d.y = {1.0, 2.5, 2.0, 4.0, 3.0, 6.5};
  LessConfig c = linear_config(0.5, 1, 0.8, 17);  // k = 3, m = 2
  const LessModel model = fit(d, c);

  // Normalize by hand.
  const auto [nd, stats] = normalize(d);
  const auto subsets = replication_subsets(nd.X, c, replication_seed(17, 0));
  REQUIRE(subsets.size() == 2);
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> cents;
  for (const auto& s : subsets) {
    std::vector<std::vector<double>> Xs;
    std::vector<double> ys;
    for (auto i : s.indices) {
      Xs.emplace_back(nd.X.row(i).begin(), nd.X.row(i).end());
      ys.push_back(nd.y[i]);
    }
    // Three points in two dimensions: exactly determined when not collinear.
    v.push_back(oracle::ols(Xs, ys, true));
    std::vector<double> cent(2, 0.0);
    for (const auto& row : Xs) {
      cent[0] += row[0] / 3.0;
      cent[1] += row[1] / 3.0;
    }
    cents.push_back(cent);
  }
  auto features = [&](const std::vector<double>& xn) {
    std::vector<double> dist{oracle::euclid(xn, cents[0]), oracle::euclid(xn, cents[1])};
    const double dmin = std::min(dist[0], dist[1]);
    const double e0 = std::exp(-0.8 * (dist[0] - dmin)), e1 = std::exp(-0.8 * (dist[1] - dmin));
    auto xa = xn;
    xa.push_back(1.0);
    return std::vector<double>{e0 / (e0 + e1) * oracle::dot(v[0], xa), e1 / (e0 + e1) * oracle::dot(v[1], xa)};
  };
  std::vector<std::vector<double>> Z;
  for (std::size_t i = 0; i < 6; ++i) Z.push_back(features({nd.X(i, 0), nd.X(i, 1)}));
  const auto beta = oracle::ols(Z, nd.y, false);
  for (const std::vector<double>& x0 : {std::vector<double>{2.5, 1.5}, std::vector<double>{-1.0, 4.0}}) {
    const Vector xn = stats.apply_to_row(x0);
    const double want = denormalize_prediction(oracle::dot(beta, features({xn[0], xn[1]})), stats);
    CHECK(predict(model, x0) == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("ablation rules") {
  gen::Source src(8);
  const Dataset d = src.dataset(100, 2);
  for (auto mode : {Ablation::no_global, Ablation::neither, Ablation::no_weighting}) {
    LessConfig c = linear_config(0.1, 2, 0.5, 4);
    c.ablation = mode;
    const LessModel model = fit(d, c);
    for (const auto& rep : model.replications) {
      CHECK(rep.ablation == mode);
      CHECK(std::holds_alternative<std::monostate>(rep.global) == (mode != Ablation::no_weighting));
    }
    for (int t = 0; t < 30; ++t) {
      const auto x = src.vector(2);
      for (const auto& rep : model.replications) {
        Vector preds(rep.m());
        for (std::size_t j = 0; j < rep.m(); ++j) preds[j] = predict_local(rep.locals[j], x);
        const double got = predict_replication(rep, x);
        if (mode == Ablation::neither) {
          const double mean = std::accumulate(preds.begin(), preds.end(), 0.0) / preds.size();
          CHECK(std::abs(got - mean) < 1e-12);
        } else if (mode == Ablation::no_global) {
          const Vector w = compute_weights(x, rep.centroids, rep.lambda, true);
          double s = 0.0;
          for (std::size_t j = 0; j < rep.m(); ++j) s += w[j] * preds[j];
          CHECK(std::abs(got - s) < 1e-12);
        } else {
          const auto& g = std::get<LinearModel>(rep.global);
          CHECK(std::abs(got - oracle::dot(g.coef, preds)) < 1e-12 * (1 + std::abs(got)));
        }
      }
    }
  }
}

TEST_CASE("kernel: symmetry, positivity and z.z consistency") {
  gen::Source src(9);
  const Dataset d = src.dataset(100, 3);
  for (auto mode : {Ablation::full, Ablation::no_weighting}) {
    LessConfig c = linear_config(0.1, 1, std::nullopt, 5);
    c.ablation = mode;
    const LessModel model = fit(d, c);
    const auto& rep = model.replications.front();
    for (int t = 0; t < 200; ++t) {
      const auto xs = src.vector(3), xt = src.vector(3);
      const double kst = kernel(rep, xs, xt);
      CHECK(std::abs(kst - kernel(rep, xt, xs)) < 1e-12 * (1 + std::abs(kst)));
      CHECK(kernel(rep, xs, xs) >= 0.0);
      const double want = oracle::dot(generate_features(xs, rep), generate_features(xt, rep));
      CHECK(std::abs(kst - want) < 1e-12 * (1 + std::abs(want)));
    }
    CHECK_THROWS_AS(kernel(rep, std::vector<double>{1.0}, std::vector<double>{1.0}), ConfigError);
  }
}

TEST_CASE("local_coefficients reconstruct predictions") {
  gen::Source src(10);
  const Dataset d = src.dataset(150, 3);
  for (auto mode : {Ablation::full, Ablation::no_weighting, Ablation::no_global, Ablation::neither}) {
    for (bool icpt : {false, true}) {
      LessConfig c = linear_config(0.05, 3, std::nullopt, 6);
      c.ablation = mode;
      c.global_intercept = icpt;
      const LessModel model = fit(d, c);
      for (int t = 0; t < 20; ++t) {
        std::vector<double> x0 = src.vector(3, 4.0);
        const LocalExplanation e = local_coefficients(model, x0);
        Vector xa = model.norm.apply_to_row(x0);
        xa.push_back(1.0);
        const double yn = model.norm.normalize_target(predict(model, x0));
        CHECK(std::abs(oracle::dot(e.normalized, xa) - yn) < 1e-10);
        std::vector<double> raw = x0;
        raw.push_back(1.0);
        const double y = predict(model, x0);
        CHECK(std::abs(oracle::dot(e.raw, raw) - y) < 1e-8 * (1 + std::abs(y)));
      }
    }
  }
}

TEST_CASE("local_coefficients with m = 1 is v1 * beta1") {
  gen::Source src(11);
  const Dataset d = src.dataset(40, 2);
  const LessModel model = fit(d, linear_config(1.0, 1, std::nullopt, 1));
  REQUIRE(model.plan.m == 1);
  const auto& rep = model.replications.front();
  const auto& v = std::get<LinearModel>(rep.locals[0]).coef;
  const double beta = std::get<LinearModel>(rep.global).coef[0];
  const LocalExplanation e = local_coefficients(model, std::vector<double>{0.1, 0.2});
  for (std::size_t j = 0; j < 3; ++j) CHECK(e.normalized[j] == v[j] * beta);
}

TEST_CASE("local_coefficients refuse non-linear learners") {
  gen::Source src(12);
  const Dataset d = src.dataset(60, 2);
  LessConfig c = linear_config(0.2, 1, std::nullopt, 1);
  c.local = LocalEstimator::decision_tree;
  CHECK_THROWS_WITH_AS(local_coefficients(fit(d, c), std::vector<double>{0, 0}),
                       doctest::Contains("explanations unavailable"), ConfigError);
  c.local = LocalEstimator::linear;
  c.global = GlobalEstimator::random_forest;
  c.n_estimators = 5;
  CHECK_THROWS_WITH_AS(local_coefficients(fit(d, c), std::vector<double>{0, 0}),
                       doctest::Contains("explanations unavailable"), ConfigError);
}

TEST_CASE("fit_global_linear examples") {
  gen::Source src(13);
  const auto y = src.vector(12);
  Matrix Z(12, 1);
  for (std::size_t i = 0; i < 12; ++i) Z(i, 0) = y[i];
  const auto g = fit_global_linear(Z, y);
  CHECK(std::abs(g.beta[0] - 1.0) < 1e-12);

  Matrix Zd(12, 2);
  for (std::size_t i = 0; i < 12; ++i) Zd(i, 0) = Zd(i, 1) = Z(i, 0) + 0.5 * src.normal();
  const auto gd = fit_global_linear(Zd, y);
  CHECK(gd.ridge_eta > 0.0);
  // Fitted values equal the projection onto the single distinct column.
  const auto b = oracle::ols({{Zd(0, 0)}, {Zd(1, 0)}, {Zd(2, 0)}, {Zd(3, 0)}, {Zd(4, 0)}, {Zd(5, 0)},
                              {Zd(6, 0)}, {Zd(7, 0)}, {Zd(8, 0)}, {Zd(9, 0)}, {Zd(10, 0)}, {Zd(11, 0)}},
                             y, false);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(std::abs(gd.beta[0] * Zd(i, 0) + gd.beta[1] * Zd(i, 1) - b[0] * Zd(i, 0)) < 1e-6);
  }

  const Matrix R = src.matrix(10, 3);
  const auto yr = src.vector(10);
  const auto want = oracle::ols(gen::rows_of(R), yr, false);
  const auto got = fit_global_linear(R, yr);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(got.beta[j] - want[j]) < 1e-8);
}

TEST_CASE("fit is independent of the thread count") {
  gen::Source src(14);
  const Dataset d = src.dataset(700, 4);
  for (auto local : {LocalEstimator::linear, LocalEstimator::decision_tree}) {
    LessConfig c = linear_config(0.05, 5, std::nullopt, 21);
    c.local = local;
    c.global = local == LocalEstimator::linear ? GlobalEstimator::linear : GlobalEstimator::random_forest;
    c.n_estimators = 10;
    c.use_validation_split = local == LocalEstimator::decision_tree;
    const LessModel a = fit(d, c, {1});
    for (unsigned t : {2u, 3u, 8u}) {
      const LessModel b = fit(d, c, {t});
      CHECK(a.replications == b.replications);
      CHECK(predict(a, d.X, {1}) == predict(b, d.X, {t}));
    }
  }
}

TEST_CASE("validation split: locals see 70%, global rows are the rest") {
  gen::Source src(15);
  const Dataset d = src.dataset(100, 2);
  LessConfig c = linear_config(0.1, 1, std::nullopt, 3);
  c.use_validation_split = true;
  const LessModel model = fit(d, c);
  CHECK(model.plan.k == 7);   // round(0.1 * 70)
  CHECK(model.plan.m == 10);  // ceil(70 / 7)
  const auto [nd, stats] = normalize(d);
  const auto subsets = replication_subsets(nd.X, c, replication_seed(3, 0));
  CHECK(subsets.size() == 10);
  Dataset tiny = src.dataset(9, 2);
  CHECK_THROWS_AS(fit(tiny, c), ConfigError);
}

TEST_CASE("kmeans strategy uses n_clusters subsets, m = 1 is a single pipeline") {
  gen::Source src(16);
  const Dataset d = src.dataset(90, 2);
  LessConfig c = linear_config(0.1, 2, std::nullopt, 3);
  c.subsets = SubsetStrategy::kmeans;
  c.n_clusters = 1;
  const LessModel model = fit(d, c);
  CHECK(model.plan.m == 1);
  // One subset holding every row: the local model is plain OLS and the
  // global learner rescales it by beta = 1.
  const auto [nd, stats] = normalize(d);
  const auto beta = oracle::ols(gen::rows_of(nd.X), nd.y, true);
  const auto& rep = model.replications.front();
  CHECK(std::abs(std::get<LinearModel>(rep.global).coef[0] - 1.0) < 1e-10);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(std::get<LinearModel>(rep.locals[0]).coef[j] - beta[j]) < 1e-10);
}

TEST_CASE("prediction input checks") {
  gen::Source src(17);
  const Dataset d = src.dataset(50, 2);
  const LessModel model = fit(d, linear_config(0.2, 1, std::nullopt, 1));
  CHECK_THROWS_AS(predict(model, std::vector<double>{1.0}), ConfigError);
  CHECK_THROWS_AS(predict(model, Matrix(3, 5)), ConfigError);
  CHECK(predict(model, Matrix(0, 2)).empty());
  LessConfig bad;
  bad.frac_of_samples = 0.01;
  bad.subsets = SubsetStrategy::kmeans;
  bad.n_clusters = 51;
  CHECK_THROWS_AS(fit(d, bad), ConfigError);
}

}
