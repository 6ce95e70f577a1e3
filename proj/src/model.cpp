#include "less/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "less/errors.hpp"
#include "less/parallel.hpp"
#include "less/random.hpp"
#include "less/simd.hpp"
#include "less/weighting.hpp"

namespace less {

namespace {

// Stream identifiers below a replication seed.
enum Stream : std::uint64_t { kSplitStream = 0, kSubsetStream = 1, kLocalStream = 2, kGlobalStream = 3 };

constexpr std::size_t kRowBlock = 256;

struct RowSplit {
  std::vector<std::size_t> local_rows;
  std::vector<std::size_t> global_rows;
};

std::size_t global_share(const LessConfig& config, std::size_t n) {
  return static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(n)));
}

std::size_t local_pool_size(const LessConfig& config, std::size_t n) {
  if (!config.use_validation_split) return n;
  if (n < 10) throw ConfigError("validation split needs at least 10 rows, got " + std::to_string(n));
  return n - global_share(config, n);
}

RowSplit split_rows(const LessConfig& config, std::size_t n, std::uint64_t seed) {
  RowSplit s;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (!config.use_validation_split) {
    s.local_rows = all;
    s.global_rows = std::move(all);
    return s;
  }
  Rng rng = make_rng(seed, {kSplitStream});
  std::shuffle(all.begin(), all.end(), rng);
  const std::size_t n_local = local_pool_size(config, n);
  s.local_rows.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_local));
  s.global_rows.assign(all.begin() + static_cast<std::ptrdiff_t>(n_local), all.end());
  std::sort(s.local_rows.begin(), s.local_rows.end());
  std::sort(s.global_rows.begin(), s.global_rows.end());
  return s;
}

// Subsets over the local pool, with indices mapped back to rows of X.
std::vector<SubsetSpec> select_subsets(const Matrix& X, const RowSplit& split, const LessConfig& config,
                                       const SubsetPlan& plan, std::uint64_t seed) {
  const Matrix pool = split.local_rows.size() == X.rows() ? Matrix() : X.select_rows(split.local_rows);
  const Matrix& source = pool.empty() ? X : pool;
  Rng rng = make_rng(seed, {kSubsetStream});
  std::vector<SubsetSpec> subsets = config.subsets == SubsetStrategy::kmeans
                                        ? select_kmeans_subsets(source, plan.m, rng)
                                        : select_random_anchor_subsets(source, plan.m, plan.k, rng);
  if (!pool.empty()) {
    for (auto& s : subsets) {
      for (auto& i : s.indices) i = split.local_rows[i];
    }
  }
  return subsets;
}

LocalModel fit_local(const Matrix& X, std::span<const double> y, const SubsetSpec& subset,
                     const LessConfig& config, std::uint64_t seed, std::size_t j) {
  if (config.local == LocalEstimator::linear) return fit_linear(X, y, subset.indices, true);
  Rng rng = make_rng(seed, {kLocalStream, j});
  return fit_tree(X, y, subset.indices, TreeParams{config.min_samples_split, 0}, rng);
}

bool uses_weights(Ablation a) { return a == Ablation::full || a == Ablation::no_global; }
bool uses_global(Ablation a) { return a == Ablation::full || a == Ablation::no_weighting; }

// Local predictions and (possibly unit) weights at x.
void local_outputs(const ReplicationModel& rep, std::span<const double> x, std::span<double> preds,
                   std::span<double> weights) {
  if (x.size() != rep.centroids.cols()) {
    throw ConfigError("input has " + std::to_string(x.size()) + " features, model expects " +
                      std::to_string(rep.centroids.cols()));
  }
  for (std::size_t j = 0; j < rep.m(); ++j) preds[j] = predict_local(rep.locals[j], x);
  if (uses_weights(rep.ablation)) {
    distances_to(x, rep.centroids, weights);
    weights_from_distances(weights, rep.lambda, rep.normalize_weights, weights);
  } else {
    std::fill(weights.begin(), weights.end(), 1.0);
  }
}

double predict_global(const GlobalModel& g, std::span<const double> z) {
  if (const auto* lin = std::get_if<LinearModel>(&g)) return lin->predict(z);
  if (const auto* rf = std::get_if<ForestModel>(&g)) return rf->predict(z);
  throw ConfigError("replication has no global model");
}

struct Workspace {
  std::vector<SubsetSpec> subsets;
  RowSplit split;
  ReplicationModel rep;
  Matrix Z;
  Vector y_global;
};

// Three phases shared by fit() and fit_replication(); every task writes only
// to its own replication / subset / row-block slot.
std::vector<ReplicationModel> fit_all(const Matrix& X, std::span<const double> y, const LessConfig& config,
                                      const SubsetPlan& plan, const std::vector<std::uint64_t>& seeds,
                                      unsigned threads) {
  const std::size_t r = seeds.size();
  std::vector<Workspace> ws(r);

  parallel_for(r, threads, [&](std::size_t l) {
    ws[l].split = split_rows(config, X.rows(), seeds[l]);
    ws[l].subsets = select_subsets(X, ws[l].split, config, plan, seeds[l]);
    ReplicationModel& rep = ws[l].rep;
    rep.lambda = plan.lambda;
    rep.normalize_weights = config.normalize_weights;
    rep.ablation = config.ablation;
    rep.centroids = Matrix(plan.m, X.cols());
    for (std::size_t j = 0; j < plan.m; ++j) {
      const auto& c = ws[l].subsets[j].centroid;
      std::copy(c.begin(), c.end(), rep.centroids.row(j).begin());
    }
    rep.locals.resize(plan.m);
  });

  parallel_for(r * plan.m, threads, [&](std::size_t task) {
    const std::size_t l = task / plan.m;
    const std::size_t j = task % plan.m;
    ws[l].rep.locals[j] = fit_local(X, y, ws[l].subsets[j], config, seeds[l], j);
  });

  if (uses_global(config.ablation)) {
    std::vector<std::size_t> blocks_before(r + 1, 0);
    for (std::size_t l = 0; l < r; ++l) {
      const std::size_t rows = ws[l].split.global_rows.size();
      ws[l].Z = Matrix(rows, plan.m);
      ws[l].y_global.resize(rows);
      blocks_before[l + 1] = blocks_before[l] + (rows + kRowBlock - 1) / kRowBlock;
    }
    parallel_for(blocks_before[r], threads, [&](std::size_t task) {
      const auto l = static_cast<std::size_t>(
          std::upper_bound(blocks_before.begin(), blocks_before.end(), task) - blocks_before.begin() - 1);
      Workspace& w = ws[l];
      const std::size_t begin = (task - blocks_before[l]) * kRowBlock;
      const std::size_t end = std::min(begin + kRowBlock, w.split.global_rows.size());
      Vector weights(plan.m);
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t row = w.split.global_rows[i];
        auto z = w.Z.row(i);
        local_outputs(w.rep, X.row(row), z, weights);
        for (std::size_t j = 0; j < plan.m; ++j) z[j] *= weights[j];
        w.y_global[i] = y[row];
      }
    });
    parallel_for(r, threads, [&](std::size_t l) {
      Workspace& w = ws[l];
      if (config.global == GlobalEstimator::linear) {
        w.rep.global = fit_linear(w.Z, w.y_global, config.global_intercept);
      } else {
        Rng rng = make_rng(seeds[l], {kGlobalStream});
        w.rep.global = fit_forest(w.Z, w.y_global, config.n_estimators, rng);
      }
      w.Z = Matrix();
    });
  }

  std::vector<ReplicationModel> out;
  out.reserve(r);
  for (auto& w : ws) out.push_back(std::move(w.rep));
  return out;
}

}  // namespace

double predict_local(const LocalModel& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) {
  return derive_seed(seed, {static_cast<std::uint64_t>(replication)});
}

LessModel fit(const Dataset& data, const LessConfig& config, ExecPolicy exec) {
  config.validate();
  data.validate();
  auto [normalized, stats] = normalize(data);

  LessModel model;
  model.config = config;
  model.norm = std::move(stats);
  model.feature_names = data.feature_names;
  model.target_name = data.target_name;
  model.plan = resolve_plan(config, local_pool_size(config, data.n()));

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(config.n_replications));
  for (std::size_t l = 0; l < seeds.size(); ++l) seeds[l] = replication_seed(config.seed, l);
  model.replications = fit_all(normalized.X, normalized.y, config, model.plan, seeds, exec.threads);
  return model;
}

ReplicationModel fit_replication(const Matrix& X_norm, std::span<const double> y_norm,
                                 const LessConfig& config, std::uint64_t seed, ExecPolicy exec) {
  if (y_norm.size() != X_norm.rows()) throw ConfigError("fit_replication: y length mismatch");
  const SubsetPlan plan = resolve_plan(config, local_pool_size(config, X_norm.rows()));
  return std::move(fit_all(X_norm, y_norm, config, plan, {seed}, exec.threads).front());
}

std::vector<SubsetSpec> replication_subsets(const Matrix& X_norm, const LessConfig& config,
                                            std::uint64_t seed) {
  const SubsetPlan plan = resolve_plan(config, local_pool_size(config, X_norm.rows()));
  return select_subsets(X_norm, split_rows(config, X_norm.rows(), seed), config, plan, seed);
}

Vector generate_features(std::span<const double> x_norm, const ReplicationModel& rep) {
  Vector z(rep.m());
  Vector w(rep.m());
  local_outputs(rep, x_norm, z, w);
  for (std::size_t j = 0; j < z.size(); ++j) z[j] *= w[j];
  return z;
}

double predict_replication(const ReplicationModel& rep, std::span<const double> x_norm) {
  const std::size_t m = rep.m();
  Vector preds(m);
  Vector w(m);
  local_outputs(rep, x_norm, preds, w);
  switch (rep.ablation) {
    case Ablation::full:
    case Ablation::no_weighting: {
      for (std::size_t j = 0; j < m; ++j) preds[j] *= w[j];
      return predict_global(rep.global, preds);
    }
    case Ablation::no_global:
      return simd::dot(preds, w);
    case Ablation::neither:
      return std::accumulate(preds.begin(), preds.end(), 0.0) / static_cast<double>(m);
  }
  return 0.0;
}

Vector predict_replications(const LessModel& model, std::span<const double> x0) {
  const Vector xn = model.norm.apply_to_row(x0);
  Vector out(model.replications.size());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = predict_replication(model.replications[l], xn);
  return out;
}

double predict(const LessModel& model, std::span<const double> x0) {
  const Vector per_rep = predict_replications(model, x0);
  double sum = 0.0;
  for (double v : per_rep) sum += v;
  return denormalize_prediction(sum / static_cast<double>(per_rep.size()), model.norm);
}

Vector predict(const LessModel& model, const Matrix& X, ExecPolicy exec) {
  if (X.rows() > 0 && X.cols() != model.n_features()) {
    throw ConfigError("input has " + std::to_string(X.cols()) + " features, model expects " +
                      std::to_string(model.n_features()));
  }
  Vector out(X.rows());
  const std::size_t blocks = (X.rows() + kRowBlock - 1) / kRowBlock;
  parallel_for(blocks, exec.threads, [&](std::size_t b) {
    const std::size_t end = std::min((b + 1) * kRowBlock, X.rows());
    for (std::size_t i = b * kRowBlock; i < end; ++i) out[i] = predict(model, X.row(i));
  });
  return out;
}

double kernel(const ReplicationModel& rep, std::span<const double> xs, std::span<const double> xt) {
  const Vector zs = generate_features(xs, rep);
  const Vector zt = generate_features(xt, rep);
  return simd::dot(zs, zt);
}

LocalExplanation local_coefficients(const LessModel& model, std::span<const double> x0) {
  const std::size_t p = model.n_features();
  const Vector xn = model.norm.apply_to_row(x0);
  Vector c(p + 1, 0.0);
  for (const ReplicationModel& rep : model.replications) {
    const std::size_t m = rep.m();
    const LinearModel* global = nullptr;
    if (uses_global(rep.ablation)) {
      global = std::get_if<LinearModel>(&rep.global);
      if (global == nullptr) throw ConfigError("explanations unavailable: global estimator is not linear");
    }
    Vector preds(m);
    Vector w(m);
    local_outputs(rep, xn, preds, w);
    if (rep.ablation == Ablation::neither) std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(m));
    Vector rep_coef(p + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const auto* local = std::get_if<LinearModel>(&rep.locals[j]);
      if (local == nullptr) throw ConfigError("explanations unavailable: local estimator is not linear");
      const double beta = global ? global->coef[j] : 1.0;
      simd::axpy(w[j] * beta, local->coef, rep_coef);
    }
    if (global && global->fit_intercept) rep_coef[p] += global->intercept();
    simd::axpy(1.0, rep_coef, c);
  }
  for (double& v : c) v /= static_cast<double>(model.replications.size());

  LocalExplanation out;
  out.normalized = c;
  out.raw.assign(p + 1, 0.0);
  const NormStats& s = model.norm;
  double shift = 0.0;
  for (std::size_t f = 0; f < p; ++f) {
    out.raw[f] = s.y_std * c[f] / s.x_std[f];
    shift += c[f] * s.x_mean[f] / s.x_std[f];
  }
  out.raw[p] = s.y_std * (c[p] - shift) + s.y_mean;
  return out;
}

GlobalLinearCoefficients fit_global_linear(const Matrix& Z, std::span<const double> y) {
  LinearModel lm = fit_linear(Z, y, false);
  return {std::move(lm.coef), lm.ridge_eta};
}

}  // namespace less
