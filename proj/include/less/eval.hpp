#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "less/config.hpp"
#include "less/dataset.hpp"
#include "less/model.hpp"

namespace less {

// Mean squared error. Throws ConfigError on empty or unequal-length inputs.
double mse(std::span<const double> yhat, std::span<const double> y);

// Outer folds partition 0..n-1; inner[f] partitions the training side of
// outer fold f. All lists hold dataset row indices in ascending order.
struct FoldPlan {
  std::vector<std::vector<std::size_t>> outer;
  std::vector<std::vector<std::vector<std::size_t>>> inner;
  std::uint64_t seed = 0;

  std::size_t n() const;
  std::vector<std::size_t> outer_train(std::size_t f) const;
  std::vector<std::size_t> inner_train(std::size_t f, std::size_t g) const;
};

// Shuffled partition; fold sizes differ by at most one. Throws ConfigError
// unless n >= outer * inner.
FoldPlan make_folds(std::size_t n, std::size_t outer, std::size_t inner, std::uint64_t seed);

// One candidate: each engaged field overrides the base configuration.
struct GridPoint {
  std::optional<double> frac;
  std::optional<std::optional<double>> lambda;  // engaged nullopt selects 1/m^2
  std::optional<LocalEstimator> local;
  std::optional<GlobalEstimator> global;
  std::optional<int> n_clusters;

  LessConfig apply(LessConfig base) const;
  std::string label() const;
};

struct GridSpec {
  std::vector<GridPoint> points;

  // frac {1,5,10,20}% x lambda {1/m^2, 0.01, 0.1} x local {linear, dt}
  // x global {linear, rf}.
  static GridSpec comparison();
  // frac {1,5,10,20}% only.
  static GridSpec fractions();
  // k-means cluster counts {5, 10, 20, 100}.
  static GridSpec clusters();
  // The base configuration alone.
  static GridSpec single();
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t chosen = 0;
  std::string chosen_label;
  LessConfig chosen_config;
  std::vector<double> inner_mse;  // mean over inner folds per grid point; +inf if infeasible
  double test_mse = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double tune_seconds = 0.0;
  double fit_seconds = 0.0;
};

struct CVReport {
  std::vector<FoldResult> folds;
  double mean_mse = 0.0;
  double std_mse = 0.0;  // population standard deviation over folds
  std::size_t outer = 0;
  std::size_t inner = 0;
  std::uint64_t seed = 0;
  double total_seconds = 0.0;

  // Timings are omitted unless requested so that reports of identical runs
  // compare equal byte-for-byte.
  nlohmann::json to_json(bool with_timings = false) const;
};

struct FitAudit {
  std::size_t outer_fold;
  std::optional<std::size_t> inner_fold;  // nullopt for the outer refit
  std::span<const std::size_t> train_rows;
  std::span<const std::size_t> test_rows;
};

struct CVOptions {
  std::size_t outer = 5;
  std::size_t inner = 4;
  std::uint64_t seed = 0;
  ExecPolicy exec;
  std::function<void(const FitAudit&)> audit;  // called before every fit, serially
};

// Test-fold MSE of `config` fitted on train_rows, in units of the training
// split's target standard deviation.
double holdout_mse(const Dataset& data, std::span<const std::size_t> train_rows,
                   std::span<const std::size_t> test_rows, const LessConfig& config, ExecPolicy exec = {});

// For each outer fold: pick the grid point with the lowest mean inner-fold
// MSE (first in grid order on ties; skipped for a singleton grid), refit it
// on the whole outer training split and score the outer test fold. Grid
// points whose subset count exceeds the available rows are ineligible.
CVReport nested_cv(const Dataset& data, const GridSpec& grid, const LessConfig& base,
                   const CVOptions& options = {});

struct ComparisonRow {
  std::string name;
  CVReport report;
  double scaled = 0.0;  // mean_mse divided by the largest mean in the table
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  nlohmann::json to_json(bool with_timings = false) const;
  const ComparisonRow& at(std::string_view name) const;
};

// Default LESS against NoW-G, W-NoG and NoW-NoG, tuning frac only.
ComparisonTable run_ablation(const Dataset& data, const LessConfig& base, const CVOptions& options = {});

// LESS, LESS-V (70/30 validation split), LESS-C (k-means subsets) and
// LESS-C-V. Anchor variants tune frac, clustering variants n_clusters.
ComparisonTable run_variants(const Dataset& data, const LessConfig& base, const CVOptions& options = {});

}  // namespace less
