#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "less/config.hpp"
#include "less/dataset.hpp"
#include "less/forest.hpp"
#include "less/linear.hpp"
#include "less/matrix.hpp"
#include "less/subsets.hpp"
#include "less/tree.hpp"

namespace less {

using LocalModel = std::variant<LinearModel, TreeModel>;
// std::monostate for the ablations that skip global learning.
using GlobalModel = std::variant<std::monostate, LinearModel, ForestModel>;

double predict_local(const LocalModel& model, std::span<const double> x);

// One replication: m local models with their subset centroids (normalized
// feature space) and the global learner fitted on their weighted outputs.
struct ReplicationModel {
  std::vector<LocalModel> locals;
  Matrix centroids;
  double lambda = 0.0;
  bool normalize_weights = true;
  Ablation ablation = Ablation::full;
  GlobalModel global;

  std::size_t m() const { return locals.size(); }
  friend bool operator==(const ReplicationModel&, const ReplicationModel&) = default;
};

struct LessModel {
  std::vector<ReplicationModel> replications;
  NormStats norm;
  LessConfig config;
  SubsetPlan plan;  // resolved k, m and lambda
  std::vector<std::string> feature_names;
  std::string target_name;

  std::size_t n_features() const { return norm.x_mean.size(); }
};

struct ExecPolicy {
  unsigned threads = 1;
};

// Normalizes `data`, then for each replication selects subsets, fits the local
// models, builds the weighted feature matrix and fits the global learner.
// Replication l uses seeds derived from (config.seed, l); the result does
// not depend on exec.threads.
LessModel fit(const Dataset& data, const LessConfig& config, ExecPolicy exec = {});

// Fits a single replication on already-normalized data with an explicit seed.
ReplicationModel fit_replication(const Matrix& X_norm, std::span<const double> y_norm,
                                 const LessConfig& config, std::uint64_t replication_seed,
                                 ExecPolicy exec = {});

// Subsets drawn for one replication, for inspection and plotting. Indices
// refer to rows of X_norm.
std::vector<SubsetSpec> replication_subsets(const Matrix& X_norm, const LessConfig& config,
                                            std::uint64_t replication_seed);

// Seed used for replication l of a fit with master seed `seed`.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication);

// z_j = w_j(x) * L_j(x) on a normalized input; unit weights under the
// no_weighting and neither ablations.
Vector generate_features(std::span<const double> x_norm, const ReplicationModel& rep);

// Replication output in normalized target units.
double predict_replication(const ReplicationModel& rep, std::span<const double> x_norm);

// Raw-unit prediction averaged over replications.
double predict(const LessModel& model, std::span<const double> x0);
Vector predict(const LessModel& model, const Matrix& X, ExecPolicy exec = {});
// Per-replication predictions in normalized target units.
Vector predict_replications(const LessModel& model, std::span<const double> x0);

// z(xs) . z(xt) for normalized inputs.
double kernel(const ReplicationModel& rep, std::span<const double> xs, std::span<const double> xt);

// Prediction at x0 written as a linear function of x0. `normalized` holds p
// feature coefficients and an intercept in standardized units, so that
// [x0_norm; 1] . normalized equals the normalized prediction; `raw` is the
// same map in original units.
struct LocalExplanation {
  Vector normalized;
  Vector raw;
};

// Throws ConfigError unless every local model and the global model are linear.
LocalExplanation local_coefficients(const LessModel& model, std::span<const double> x0);

struct GlobalLinearCoefficients {
  Vector beta;
  double ridge_eta = 0.0;
};

// Least squares on the feature matrix without an added intercept column.
GlobalLinearCoefficients fit_global_linear(const Matrix& Z, std::span<const double> y);

}  // namespace less
