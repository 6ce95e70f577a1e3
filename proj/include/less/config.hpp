#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace less {

enum class LocalEstimator { linear, decision_tree };
enum class GlobalEstimator { linear, random_forest };
enum class SubsetStrategy { random_anchors, kmeans };
enum class DistanceMetric { euclidean };

// full: weighted features + global learner (default LESS)
// no_weighting: unit weights + global learner            (NoW-G)
// no_global: weighted sum of local predictions           (W-NoG)
// neither: plain mean of local predictions               (NoW-NoG)
enum class Ablation { full, no_weighting, no_global, neither };

struct LessConfig {
  double frac_of_samples = 0.05;
  int n_replications = 20;
  std::optional<double> lambda;  // nullopt: 1/m^2 once m is resolved
  DistanceMetric distance = DistanceMetric::euclidean;
  bool normalize_weights = true;
  LocalEstimator local = LocalEstimator::linear;
  int min_samples_split = 2;
  GlobalEstimator global = GlobalEstimator::linear;
  int n_estimators = 100;
  SubsetStrategy subsets = SubsetStrategy::random_anchors;
  int n_clusters = 10;
  bool use_validation_split = false;
  double validation_fraction = 0.3;  // share of rows reserved for the global learner
  Ablation ablation = Ablation::full;
  bool global_intercept = false;
  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-range values.
  void validate() const;

  friend bool operator==(const LessConfig&, const LessConfig&) = default;
};

// k and m for a local-learning pool of n rows.
struct SubsetPlan {
  std::size_t k = 0;  // neighbours per anchor (random anchors only)
  std::size_t m = 0;  // number of subsets
  double lambda = 0.0;
};

// k = max(2, round(frac*n)) clamped to n, m = ceil(n/k); with k-means m is
// n_clusters. Throws ConfigError when m > n.
SubsetPlan resolve_plan(const LessConfig& config, std::size_t n_local);

std::string_view to_string(LocalEstimator v);
std::string_view to_string(GlobalEstimator v);
std::string_view to_string(SubsetStrategy v);
std::string_view to_string(Ablation v);
std::string_view to_string(DistanceMetric v);

LocalEstimator parse_local(std::string_view s);
GlobalEstimator parse_global(std::string_view s);
SubsetStrategy parse_subsets(std::string_view s);
Ablation parse_ablation(std::string_view s);
DistanceMetric parse_distance(std::string_view s);

}  // namespace less
