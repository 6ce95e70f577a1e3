#include "less/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "less/errors.hpp"
#include "less/parallel.hpp"
#include "less/random.hpp"
#include "less/serialize.hpp"

namespace less {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::vector<std::size_t>> partition(std::vector<std::size_t> rows, std::size_t folds, Rng& rng) {
  std::shuffle(rows.begin(), rows.end(), rng);
  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t base = rows.size() / folds;
  const std::size_t extra = rows.size() % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    out[f].assign(rows.begin() + static_cast<std::ptrdiff_t>(pos),
                  rows.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(out[f].begin(), out[f].end());
    pos += size;
  }
  return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& excluded_sorted) {
  std::vector<std::size_t> out;
  out.reserve(n - excluded_sorted.size());
  std::size_t e = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (e < excluded_sorted.size() && excluded_sorted[e] == i) {
      ++e;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool feasible(const LessConfig& config, std::size_t n_train) {
  try {
    std::size_t pool = n_train;
    if (config.use_validation_split) {
      if (n_train < 10) return false;
      pool = n_train - static_cast<std::size_t>(std::llround(config.validation_fraction * n_train));
    }
    resolve_plan(config, pool);
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

template <class Fn>
auto with_context(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(context + ": " + e.what());
  }
}

}  // namespace

double mse(std::span<const double> yhat, std::span<const double> y) {
  if (yhat.size() != y.size()) {
    throw ConfigError("mse: length mismatch (" + std::to_string(yhat.size()) + " vs " +
                      std::to_string(y.size()) + ")");
  }
  if (y.empty()) throw ConfigError("mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = yhat[i] - y[i];
    sum += d * d;
  }
  return sum / static_cast<double>(y.size());
}

std::size_t FoldPlan::n() const {
  std::size_t total = 0;
  for (const auto& f : outer) total += f.size();
  return total;
}

std::vector<std::size_t> FoldPlan::outer_train(std::size_t f) const { return complement(n(), outer.at(f)); }

std::vector<std::size_t> FoldPlan::inner_train(std::size_t f, std::size_t g) const {
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < inner.at(f).size(); ++h) {
    if (h == g) continue;
    out.insert(out.end(), inner[f][h].begin(), inner[f][h].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldPlan make_folds(std::size_t n, std::size_t outer, std::size_t inner, std::uint64_t seed) {
  if (outer < 2 || inner < 2) throw ConfigError("make_folds: need at least 2 outer and 2 inner folds");
  if (n < outer * inner) {
    throw ConfigError("make_folds: " + std::to_string(n) + " rows cannot fill " + std::to_string(outer) +
                      "x" + std::to_string(inner) + " nested folds");
  }
  FoldPlan plan;
  plan.seed = seed;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng = make_rng(seed, {0});
  plan.outer = partition(std::move(all), outer, rng);
  for (std::size_t f = 0; f < outer; ++f) {
    Rng inner_rng = make_rng(seed, {1, f});
    plan.inner.push_back(partition(complement(n, plan.outer[f]), inner, inner_rng));
  }
  return plan;
}

LessConfig GridPoint::apply(LessConfig base) const {
  if (frac) base.frac_of_samples = *frac;
  if (lambda) base.lambda = *lambda;
  if (local) base.local = *local;
  if (global) base.global = *global;
  if (n_clusters) {
    base.n_clusters = *n_clusters;
    base.subsets = SubsetStrategy::kmeans;
  }
  return base;
}

std::string GridPoint::label() const {
  std::string out;
  auto add = [&](const std::string& s) { out += (out.empty() ? "" : " ") + s; };
  if (frac) add("frac=" + format_double(*frac));
  if (lambda) add("lambda=" + (*lambda ? format_double(**lambda) : std::string("auto")));
  if (local) add("local=" + std::string(to_string(*local)));
  if (global) add("global=" + std::string(to_string(*global)));
  if (n_clusters) add("clusters=" + std::to_string(*n_clusters));
  return out.empty() ? "base" : out;
}

GridSpec GridSpec::comparison() {
  GridSpec g;
  for (double frac : {0.01, 0.05, 0.10, 0.20}) {
    for (std::optional<double> lambda : {std::optional<double>{}, std::optional<double>{0.01},
                                         std::optional<double>{0.1}}) {
      for (auto local : {LocalEstimator::linear, LocalEstimator::decision_tree}) {
        for (auto global : {GlobalEstimator::linear, GlobalEstimator::random_forest}) {
          GridPoint p;
          p.frac = frac;
          p.lambda = lambda;
          p.local = local;
          p.global = global;
          g.points.push_back(p);
        }
      }
    }
  }
  return g;
}

GridSpec GridSpec::fractions() {
  GridSpec g;
  for (double frac : {0.01, 0.05, 0.10, 0.20}) {
    GridPoint p;
    p.frac = frac;
    g.points.push_back(p);
  }
  return g;
}

GridSpec GridSpec::clusters() {
  GridSpec g;
  for (int c : {5, 10, 20, 100}) {
    GridPoint p;
    p.n_clusters = c;
    g.points.push_back(p);
  }
  return g;
}

GridSpec GridSpec::single() { return GridSpec{{GridPoint{}}}; }

double holdout_mse(const Dataset& data, std::span<const std::size_t> train_rows,
                   std::span<const std::size_t> test_rows, const LessConfig& config, ExecPolicy exec) {
  const Dataset train = data.subset(train_rows);
  const LessModel model = fit(train, config, exec);
  const Matrix X_test = data.X.select_rows(test_rows);
  const Vector yhat = predict(model, X_test, exec);
  double sum = 0.0;
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    const double d = (yhat[i] - data.y[test_rows[i]]) / model.norm.y_std;
    sum += d * d;
  }
  return sum / static_cast<double>(test_rows.size());
}

CVReport nested_cv(const Dataset& data, const GridSpec& grid, const LessConfig& base, const CVOptions& options) {
  data.validate();
  if (grid.points.empty()) throw ConfigError("nested_cv: empty grid");
  const auto start = Clock::now();
  const FoldPlan plan = make_folds(data.n(), options.outer, options.inner, options.seed);
  std::vector<LessConfig> configs;
  for (const GridPoint& p : grid.points) configs.push_back(p.apply(base));
  for (const LessConfig& c : configs) c.validate();

  CVReport report;
  report.outer = options.outer;
  report.inner = options.inner;
  report.seed = options.seed;
  for (std::size_t f = 0; f < options.outer; ++f) {
    const std::string context = "outer fold " + std::to_string(f);
    FoldResult fr;
    fr.fold = f;
    const std::vector<std::size_t> train = plan.outer_train(f);
    const std::vector<std::size_t>& test = plan.outer[f];
    fr.n_train = train.size();
    fr.n_test = test.size();

    const auto tune_start = Clock::now();
    const std::size_t g_count = configs.size();
    fr.inner_mse.assign(g_count, std::numeric_limits<double>::infinity());
    if (g_count > 1) {
      // Dataset rows for every (grid point, inner fold) task.
      std::vector<std::vector<std::size_t>> inner_train(options.inner);
      for (std::size_t h = 0; h < options.inner; ++h) inner_train[h] = plan.inner_train(f, h);
      std::vector<double> scores(g_count * options.inner, std::numeric_limits<double>::infinity());
      std::vector<char> eligible(g_count, 0);
      for (std::size_t g = 0; g < g_count; ++g) {
        eligible[g] = std::all_of(inner_train.begin(), inner_train.end(),
                                  [&](const auto& rows) { return feasible(configs[g], rows.size()); });
      }
      if (options.audit) {
        for (std::size_t g = 0; g < g_count; ++g) {
          if (!eligible[g]) continue;
          for (std::size_t h = 0; h < options.inner; ++h) {
            options.audit({f, h, inner_train[h], plan.inner[f][h]});
          }
        }
      }
      parallel_for(g_count * options.inner, options.exec.threads, [&](std::size_t task) {
        const std::size_t g = task / options.inner;
        const std::size_t h = task % options.inner;
        if (!eligible[g]) return;
        scores[task] = with_context(context + ", inner fold " + std::to_string(h) + ", " +
                                        grid.points[g].label(),
                                    [&] { return holdout_mse(data, inner_train[h], plan.inner[f][h], configs[g]); });
      });
      for (std::size_t g = 0; g < g_count; ++g) {
        if (!eligible[g]) continue;
        double sum = 0.0;
        for (std::size_t h = 0; h < options.inner; ++h) sum += scores[g * options.inner + h];
        fr.inner_mse[g] = sum / static_cast<double>(options.inner);
      }
      if (std::none_of(eligible.begin(), eligible.end(), [](char e) { return e != 0; })) {
        throw ConfigError(context + ": no grid point is feasible for " + std::to_string(train.size()) + " rows");
      }
      fr.chosen = static_cast<std::size_t>(std::min_element(fr.inner_mse.begin(), fr.inner_mse.end()) -
                                           fr.inner_mse.begin());
    }
    fr.tune_seconds = seconds_since(tune_start);
    fr.chosen_label = grid.points[fr.chosen].label();
    fr.chosen_config = configs[fr.chosen];

    if (options.audit) options.audit({f, std::nullopt, train, test});
    const auto fit_start = Clock::now();
    fr.test_mse = with_context(context, [&] { return holdout_mse(data, train, test, fr.chosen_config, options.exec); });
    fr.fit_seconds = seconds_since(fit_start);
    report.folds.push_back(std::move(fr));
  }

  double sum = 0.0;
  for (const auto& fr : report.folds) sum += fr.test_mse;
  report.mean_mse = sum / static_cast<double>(report.folds.size());
  double ss = 0.0;
  for (const auto& fr : report.folds) ss += (fr.test_mse - report.mean_mse) * (fr.test_mse - report.mean_mse);
  report.std_mse = std::sqrt(ss / static_cast<double>(report.folds.size()));
  report.total_seconds = seconds_since(start);
  return report;
}

nlohmann::json CVReport::to_json(bool with_timings) const {
  nlohmann::json folds_json = nlohmann::json::array();
  for (const FoldResult& fr : folds) {
    nlohmann::json inner_json = nlohmann::json::array();
    for (double v : fr.inner_mse) inner_json.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    nlohmann::json j = {{"fold", fr.fold},
                        {"chosen_index", fr.chosen},
                        {"chosen_label", fr.chosen_label},
                        {"chosen_config", config_to_json(fr.chosen_config)},
                        {"inner_mse", inner_json},
                        {"test_mse", fr.test_mse},
                        {"n_train", fr.n_train},
                        {"n_test", fr.n_test}};
    if (with_timings) j["timings"] = {{"tune_seconds", fr.tune_seconds}, {"fit_seconds", fr.fit_seconds}};
    folds_json.push_back(std::move(j));
  }
  nlohmann::json out = {{"outer_folds", outer}, {"inner_folds", inner}, {"seed", seed},
                        {"mse_mean", mean_mse},  {"mse_std", std_mse},  {"folds", folds_json}};
  if (with_timings) out["total_seconds"] = total_seconds;
  return out;
}

const ComparisonRow& ComparisonTable::at(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ConfigError("no row named '" + std::string(name) + "'");
}

nlohmann::json ComparisonTable::to_json(bool with_timings) const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"name", r.name},
                   {"mse_mean", r.report.mean_mse},
                   {"mse_std", r.report.std_mse},
                   {"scaled", r.scaled},
                   {"report", r.report.to_json(with_timings)}});
  }
  return out;
}

namespace {

void scale_rows(ComparisonTable& table) {
  double max_mse = 0.0;
  for (const auto& r : table.rows) max_mse = std::max(max_mse, r.report.mean_mse);
  for (auto& r : table.rows) r.scaled = max_mse > 0.0 ? r.report.mean_mse / max_mse : 0.0;
}

}  // namespace

ComparisonTable run_ablation(const Dataset& data, const LessConfig& base, const CVOptions& options) {
  ComparisonTable table;
  const std::pair<const char*, Ablation> modes[] = {{"LESS", Ablation::full},
                                                    {"NoW-G", Ablation::no_weighting},
                                                    {"W-NoG", Ablation::no_global},
                                                    {"NoW-NoG", Ablation::neither}};
  for (const auto& [name, mode] : modes) {
    LessConfig config = base;
    config.ablation = mode;
    table.rows.push_back({name, nested_cv(data, GridSpec::fractions(), config, options), 0.0});
  }
  scale_rows(table);
  return table;
}

ComparisonTable run_variants(const Dataset& data, const LessConfig& base, const CVOptions& options) {
  ComparisonTable table;
  struct Variant {
    const char* name;
    bool clustering;
    bool validation;
  };
  for (const Variant& v : {Variant{"LESS", false, false}, Variant{"LESS-V", false, true},
                           Variant{"LESS-C", true, false}, Variant{"LESS-C-V", true, true}}) {
    LessConfig config = base;
    config.ablation = Ablation::full;
    config.use_validation_split = v.validation;
    config.subsets = v.clustering ? SubsetStrategy::kmeans : SubsetStrategy::random_anchors;
    const GridSpec grid = v.clustering ? GridSpec::clusters() : GridSpec::fractions();
    table.rows.push_back({v.name, nested_cv(data, grid, config, options), 0.0});
  }
  scale_rows(table);
  return table;
}

}  // namespace less
