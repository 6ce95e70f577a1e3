#include "less/config.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "less/errors.hpp"

namespace less {

void LessConfig::validate() const {
  if (!(frac_of_samples > 0.0 && frac_of_samples <= 1.0)) {
    throw ConfigError("frac_of_samples must lie in (0, 1]");
  }
  if (n_replications < 1) throw ConfigError("n_replications must be positive");
  if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) {
    throw ConfigError("lambda must be finite and >= 0");
  }
  if (min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
  if (n_estimators < 1) throw ConfigError("n_estimators must be positive");
  if (n_clusters < 1) throw ConfigError("n_clusters must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
}

SubsetPlan resolve_plan(const LessConfig& config, std::size_t n_local) {
  config.validate();
  if (n_local == 0) throw ConfigError("no rows available for local learning");
  SubsetPlan plan;
  if (config.subsets == SubsetStrategy::kmeans) {
    plan.m = static_cast<std::size_t>(config.n_clusters);
    plan.k = 0;
  } else {
    const auto rounded = static_cast<std::size_t>(std::llround(config.frac_of_samples * n_local));
    plan.k = std::min(std::max<std::size_t>(2, rounded), n_local);
    plan.m = (n_local + plan.k - 1) / plan.k;
  }
  if (plan.m > n_local) {
    throw ConfigError("number of subsets m=" + std::to_string(plan.m) + " exceeds available rows n=" +
                      std::to_string(n_local));
  }
  plan.lambda = config.lambda ? *config.lambda
                              : 1.0 / (static_cast<double>(plan.m) * static_cast<double>(plan.m));
  return plan;
}

std::string_view to_string(LocalEstimator v) {
  return v == LocalEstimator::linear ? "linear" : "dt";
}
std::string_view to_string(GlobalEstimator v) {
  return v == GlobalEstimator::linear ? "linear" : "rf";
}
std::string_view to_string(SubsetStrategy v) {
  return v == SubsetStrategy::random_anchors ? "random" : "kmeans";
}
std::string_view to_string(DistanceMetric) { return "euclidean"; }
std::string_view to_string(Ablation v) {
  switch (v) {
    case Ablation::full:
      return "full";
    case Ablation::no_weighting:
      return "now-g";
    case Ablation::no_global:
      return "w-nog";
    case Ablation::neither:
      return "now-nog";
  }
  return "full";
}

namespace {
[[noreturn]] void bad(std::string_view what, std::string_view s) {
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}
}  // namespace

LocalEstimator parse_local(std::string_view s) {
  if (s == "linear") return LocalEstimator::linear;
  if (s == "dt" || s == "decision_tree") return LocalEstimator::decision_tree;
  bad("local estimator", s);
}
GlobalEstimator parse_global(std::string_view s) {
  if (s == "linear") return GlobalEstimator::linear;
  if (s == "rf" || s == "random_forest") return GlobalEstimator::random_forest;
  bad("global estimator", s);
}
SubsetStrategy parse_subsets(std::string_view s) {
  if (s == "random" || s == "random_anchors") return SubsetStrategy::random_anchors;
  if (s == "kmeans") return SubsetStrategy::kmeans;
  bad("subset strategy", s);
}
Ablation parse_ablation(std::string_view s) {
  if (s == "full") return Ablation::full;
  if (s == "now-g" || s == "no_weighting") return Ablation::no_weighting;
  if (s == "w-nog" || s == "no_global") return Ablation::no_global;
  if (s == "now-nog" || s == "neither") return Ablation::neither;
  bad("ablation mode", s);
}
DistanceMetric parse_distance(std::string_view s) {
  if (s == "euclidean") return DistanceMetric::euclidean;
  bad("distance metric", s);
}

}  // namespace less
