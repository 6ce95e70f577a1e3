// less_cli: fit, predict, cross-validate and benchmark LESS models on CSV data.
//
// Every command writes a run manifest (JSON) next to its main output that
// records the full argument vector, the resolved configuration, a
// fingerprint of each input file and the SIMD backend in use.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "less/csv.hpp"
#include "less/errors.hpp"
#include "less/eval.hpp"
#include "less/model.hpp"
#include "less/serialize.hpp"
#include "less/simd.hpp"
#include "less/synthetic.hpp"

#ifndef LESS_VERSION
#define LESS_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigFlags {
  std::string config_file;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double frac = 0.0;
  int replications = 0;
  std::string lambda;
  std::string local;
  std::string global;
  std::string subsets;
  int n_clusters = 0;
  bool validation_split = false;
  std::string ablation;
  int min_samples_split = 0;
  int n_estimators = 0;
  bool global_intercept = false;
  bool unnormalized_weights = false;

  std::vector<CLI::Option*> options;
  CLI::Option* opt(const std::string& name) const {
    for (auto* o : options) {
      if (o->check_name(name)) return o;
    }
    return nullptr;
  }
  bool given(const std::string& name) const {
    auto* o = opt(name);
    return o != nullptr && o->count() > 0;
  }

  void attach(CLI::App* app) {
    options.push_back(app->add_option("--config", config_file, "JSON config file; flags override it"));
    options.push_back(app->add_option("--seed", seed, "Master seed"));
    options.push_back(app->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber));
    options.push_back(app->add_option("--frac", frac, "Fraction of samples per subset"));
    options.push_back(app->add_option("--replications", replications, "Number of replications r"));
    options.push_back(app->add_option("--lambda", lambda, "auto (1/m^2) or a non-negative float"));
    options.push_back(app->add_option("--local", local, "Local learner")->check(CLI::IsMember({"linear", "dt"})));
    options.push_back(app->add_option("--global", global, "Global learner")->check(CLI::IsMember({"linear", "rf"})));
    options.push_back(
        app->add_option("--subsets", subsets, "Subset strategy")->check(CLI::IsMember({"random", "kmeans"})));
    options.push_back(app->add_option("--n-clusters", n_clusters, "Clusters for k-means subsets"));
    options.push_back(app->add_flag("--validation-split", validation_split, "Reserve 30% of rows for the global fit"));
    options.push_back(app->add_option("--ablation", ablation, "Ablation mode")
                          ->check(CLI::IsMember({"full", "now-g", "w-nog", "now-nog"})));
    options.push_back(app->add_option("--min-samples-split", min_samples_split, "Tree split threshold"));
    options.push_back(app->add_option("--n-estimators", n_estimators, "Trees in the global forest"));
    options.push_back(app->add_flag("--global-intercept", global_intercept, "Fit an intercept in the global model"));
    options.push_back(app->add_flag("--unnormalized-weights", unnormalized_weights, "Skip the softmax normalization"));
  }

  less::LessConfig resolve() const {
    less::LessConfig config;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw less::DataError("cannot open config file '" + config_file + "'");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw less::DataError("config file '" + config_file + "': " + e.what());
      }
      config = less::config_from_json(doc, config);
    }
    if (given("--seed")) config.seed = seed;
    if (given("--frac")) config.frac_of_samples = frac;
    if (given("--replications")) config.n_replications = replications;
    if (given("--lambda")) {
      if (lambda == "auto") {
        config.lambda.reset();
      } else {
        try {
          std::size_t used = 0;
          config.lambda = std::stod(lambda, &used);
          if (used != lambda.size()) throw std::invalid_argument(lambda);
        } catch (const std::exception&) {
          throw less::ConfigError("--lambda expects 'auto' or a number, got '" + lambda + "'");
        }
      }
    }
    if (given("--local")) config.local = less::parse_local(local);
    if (given("--global")) config.global = less::parse_global(global);
    if (given("--subsets")) config.subsets = less::parse_subsets(subsets);
    if (given("--n-clusters")) config.n_clusters = n_clusters;
    if (given("--validation-split")) config.use_validation_split = validation_split;
    if (given("--ablation")) config.ablation = less::parse_ablation(ablation);
    if (given("--min-samples-split")) config.min_samples_split = min_samples_split;
    if (given("--n-estimators")) config.n_estimators = n_estimators;
    if (given("--global-intercept")) config.global_intercept = global_intercept;
    if (given("--unnormalized-weights")) config.normalize_weights = !unnormalized_weights;
    config.validate();
    return config;
  }
};

struct Manifest {
  json doc;

  Manifest(const std::string& command, int argc, char** argv) {
    doc["command"] = command;
    doc["argv"] = std::vector<std::string>(argv + 1, argv + argc);
    doc["version"] = LESS_VERSION;
    doc["simd_backend"] = std::string(less::simd::backend_name(less::simd::active().backend));
    doc["inputs"] = json::array();
    doc["outputs"] = json::array();
  }

  void input(const std::string& role, const std::string& path, std::optional<std::size_t> rows = {},
             std::optional<std::size_t> cols = {}) {
    json j = {{"role", role}, {"path", path}, {"content_hash", less::file_fingerprint(path)}};
    if (rows) j["rows"] = *rows;
    if (cols) j["cols"] = *cols;
    doc["inputs"].push_back(std::move(j));
  }

  void config(const less::LessConfig& c, unsigned threads) {
    doc["config"] = less::config_to_json(c);
    doc["seed"] = c.seed;
    doc["threads"] = threads;
  }

  void output(const std::string& path) { doc["outputs"].push_back(path); }

  void write(const std::string& path) const { write_json(path, doc); }

  static void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw less::DataError("cannot write '" + path + "'");
    out << j.dump(1) << '\n';
    if (!out) throw less::DataError("write failed for '" + path + "'");
  }
};

std::string manifest_path(const std::string& explicit_path, const std::string& out) {
  return explicit_path.empty() ? out + ".manifest.json" : explicit_path;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw less::DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw less::DataError("write failed for '" + path + "'");
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

less::GridSpec grid_by_name(const std::string& name) {
  if (name == "comparison") return less::GridSpec::comparison();
  if (name == "fractions") return less::GridSpec::fractions();
  if (name == "clusters") return less::GridSpec::clusters();
  if (name == "single") return less::GridSpec::single();
  throw less::ConfigError("unknown grid '" + name + "'");
}

std::vector<std::size_t> parse_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw less::ConfigError(std::string(what) + ": expected comma-separated positive integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw less::ConfigError(std::string(what) + ": empty list");
  return out;
}

// Fits one sinusoid model per (m, r) cell and writes its predictions on an
// evenly spaced grid, plus the raw samples and the local lines of the first
// replication for each m.
void demo_sinusoid(const std::string& out_dir, const std::vector<std::size_t>& ms,
                   const std::vector<std::size_t>& rs, std::size_t n, std::size_t grid_points, double noise,
                   const less::LessConfig& base, unsigned threads, json& summary) {
  fs::create_directories(out_dir);
  const auto sample = less::synthetic::sinusoid(n, base.seed, noise);
  {
    std::string text = "x\ty_true\ty_noisy\n";
    for (std::size_t i = 0; i < n; ++i) {
      text += g17(sample.data.X(i, 0)) + "\t" + g17(sample.y_clean[i]) + "\t" + g17(sample.data.y[i]) + "\n";
    }
    write_text((fs::path(out_dir) / "samples.tsv").string(), text);
  }
  const less::Vector grid = less::synthetic::sinusoid_grid(grid_points);
  less::Matrix Xg(grid.size(), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) Xg(i, 0) = grid[i];
  // Nearest training sample supplies the noisy value shown alongside the grid.
  std::vector<double> nearest_noisy(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < n; ++s) {
      if (std::abs(sample.data.X(s, 0) - grid[i]) < std::abs(sample.data.X(best, 0) - grid[i])) best = s;
    }
    nearest_noisy[i] = sample.data.y[best];
  }

  summary["cells"] = json::array();
  for (std::size_t m : ms) {
    if (m > n) throw less::ConfigError("m=" + std::to_string(m) + " exceeds n=" + std::to_string(n));
    for (std::size_t r : rs) {
      less::LessConfig config = base;
      config.frac_of_samples = 1.0 / static_cast<double>(m);
      config.n_replications = static_cast<int>(r);
      const less::LessModel model = less::fit(sample.data, config, {threads});
      const less::Vector pred = less::predict(model, Xg, {threads});
      std::string text = "x\ty_true\ty_noisy\ty_pred\n";
      double err = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double truth = less::synthetic::sinusoid_clean(grid[i]);
        err += (pred[i] - truth) * (pred[i] - truth);
        text += g17(grid[i]) + "\t" + g17(truth) + "\t" + g17(nearest_noisy[i]) + "\t" + g17(pred[i]) + "\n";
      }
      const std::string name = "pred_m" + std::to_string(m) + "_r" + std::to_string(r) + ".tsv";
      write_text((fs::path(out_dir) / name).string(), text);
      summary["cells"].push_back({{"m", m},
                                  {"m_resolved", model.plan.m},
                                  {"r", r},
                                  {"file", name},
                                  {"clean_mse", err / static_cast<double>(grid.size())}});

      if (r != rs.front()) continue;
      const less::Matrix X_norm = model.norm.apply(sample.data.X);
      const auto subsets =
          less::replication_subsets(X_norm, config, less::replication_seed(config.seed, 0));
      const auto& rep = model.replications.front();
      std::string seg = "subset\tx0\ty0\tx1\ty1\n";
      for (std::size_t j = 0; j < subsets.size(); ++j) {
        const auto* lin = std::get_if<less::LinearModel>(&rep.locals[j]);
        if (lin == nullptr) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t idx : subsets[j].indices) {
          lo = std::min(lo, sample.data.X(idx, 0));
          hi = std::max(hi, sample.data.X(idx, 0));
        }
        auto line_at = [&](double x) {
          const less::Vector xn = model.norm.apply_to_row(std::vector<double>{x});
          return less::denormalize_prediction(lin->predict(xn), model.norm);
        };
        seg += std::to_string(j) + "\t" + g17(lo) + "\t" + g17(line_at(lo)) + "\t" + g17(hi) + "\t" +
               g17(line_at(hi)) + "\n";
      }
      write_text((fs::path(out_dir) / ("segments_m" + std::to_string(m) + ".tsv")).string(), seg);
    }
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const less::NumericError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const less::DataError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) return 1;
  if (dynamic_cast<const fs::filesystem_error*>(&e) != nullptr) return 2;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LESS regression: fit, predict, cross-validate and benchmark"};
  app.require_subcommand(1);
  if (const char* env = std::getenv("LESS_SIMD"); env != nullptr && *env != '\0') {
    try {
      less::simd::set_backend(less::simd::parse_backend(env));
    } catch (const std::exception& e) {
      std::cerr << "error: LESS_SIMD: " << e.what() << '\n';
      return 1;
    }
  }

  std::string data_path;
  std::string target;
  std::string out_path;
  std::string manifest_file;
  std::string model_path;

  // fit
  ConfigFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write it as JSON");
  fit_cmd->add_option("--data", data_path, "Training CSV")->required();
  fit_cmd->add_option("--target", target, "Target column")->required();
  fit_cmd->add_option("--out", out_path, "Model file")->required();
  fit_cmd->add_option("--manifest", manifest_file, "Manifest file (default <out>.manifest.json)");
  fit_flags.attach(fit_cmd);

  // predict
  unsigned predict_threads = 1;
  auto* predict_cmd = app.add_subcommand("predict", "Predict one value per CSV row");
  predict_cmd->add_option("--model", model_path, "Model file")->required();
  predict_cmd->add_option("--data", data_path, "Input CSV with the model's feature columns")->required();
  predict_cmd->add_option("--out", out_path, "Predictions file")->required();
  predict_cmd->add_option("--manifest", manifest_file, "Manifest file (default <out>.manifest.json)");
  predict_cmd->add_option("--threads", predict_threads, "Worker threads")->check(CLI::PositiveNumber);

  // cv, ablation, variants
  std::string grid_name = "comparison";
  std::size_t outer = 5;
  std::size_t inner = 4;
  bool timings = false;
  ConfigFlags cv_flags;
  auto* cv_cmd = app.add_subcommand("cv", "Nested cross-validation over a hyperparameter grid");
  auto* ablation_cmd = app.add_subcommand("ablation", "Compare LESS with its weighting/global ablations");
  auto* variants_cmd = app.add_subcommand("variants", "Compare LESS, LESS-V, LESS-C and LESS-C-V");
  for (auto* cmd : {cv_cmd, ablation_cmd, variants_cmd}) {
    cmd->add_option("--data", data_path, "Dataset CSV")->required();
    cmd->add_option("--target", target, "Target column")->required();
    cmd->add_option("--out", out_path, "Report file")->required();
    cmd->add_option("--manifest", manifest_file, "Manifest file (default <out>.manifest.json)");
    cmd->add_option("--outer", outer, "Outer folds");
    cmd->add_option("--inner", inner, "Inner folds");
    cmd->add_flag("--timings", timings, "Include wall-clock timings in the report");
  }
  cv_cmd->add_option("--grid", grid_name, "comparison | fractions | clusters | single")
      ->check(CLI::IsMember({"comparison", "fractions", "clusters", "single"}));
  cv_flags.attach(cv_cmd);
  ConfigFlags ablation_flags;
  ablation_flags.attach(ablation_cmd);
  ConfigFlags variants_flags;
  variants_flags.attach(variants_cmd);

  // demo-sinusoid
  std::string out_dir;
  std::string m_list = "1,20,100";
  std::string r_list = "1,20";
  std::size_t demo_n = 200;
  std::size_t grid_points = 400;
  double noise = 0.3;
  ConfigFlags demo_flags;
  auto* demo_cmd = app.add_subcommand("demo-sinusoid", "Write plot data for the noisy sine example");
  demo_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  demo_cmd->add_option("--m", m_list, "Comma-separated subset counts (k = n/m)");
  demo_cmd->add_option("--r", r_list, "Comma-separated replication counts");
  demo_cmd->add_option("--n", demo_n, "Training samples");
  demo_cmd->add_option("--grid-points", grid_points, "Evaluation grid size");
  demo_cmd->add_option("--noise", noise, "Noise standard deviation");
  demo_flags.attach(demo_cmd);

  // bench-parallel
  std::string thread_list = "1,2,4,8";
  std::size_t synth_n = 20000;
  std::size_t synth_p = 10;
  ConfigFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench-parallel", "Time one fit across thread counts");
  bench_cmd->add_option("--data", data_path, "Dataset CSV (default: synthetic)");
  bench_cmd->add_option("--target", target, "Target column (with --data)");
  bench_cmd->add_option("--synthetic-n", synth_n, "Rows of the synthetic dataset");
  bench_cmd->add_option("--synthetic-p", synth_p, "Columns of the synthetic dataset");
  bench_cmd->add_option("--thread-list", thread_list, "Comma-separated thread counts");
  bench_cmd->add_option("--out", out_path, "Timing table (JSON)")->required();
  bench_cmd->add_option("--manifest", manifest_file, "Manifest file (default <out>.manifest.json)");
  bench_flags.attach(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (fit_cmd->parsed()) {
      const less::LessConfig config = fit_flags.resolve();
      const less::Dataset data = less::load_dataset(data_path, target);
      Manifest manifest("fit", argc, argv);
      manifest.input("train", data_path, data.n(), data.p() + 1);
      manifest.config(config, fit_flags.threads);
      const less::LessModel model = less::fit(data, config, {fit_flags.threads});
      less::save_model(model, out_path);
      manifest.doc["resolved_plan"] = {{"k", model.plan.k}, {"m", model.plan.m}, {"lambda", model.plan.lambda}};
      manifest.output(out_path);
      manifest.write(manifest_path(manifest_file, out_path));
    } else if (predict_cmd->parsed()) {
      const less::LessModel model = less::load_model(model_path);
      const less::CsvTable table = less::read_csv(data_path);
      const less::Matrix X = less::select_features(table, model.feature_names, model.target_name);
      const less::Vector yhat = X.rows() == 0 ? less::Vector{} : less::predict(model, X, {predict_threads});
      less::write_predictions(out_path, yhat);
      Manifest manifest("predict", argc, argv);
      manifest.input("model", model_path);
      manifest.input("data", data_path, table.values.rows(), table.header.size());
      manifest.config(model.config, predict_threads);
      manifest.output(out_path);
      manifest.write(manifest_path(manifest_file, out_path));
    } else if (cv_cmd->parsed() || ablation_cmd->parsed() || variants_cmd->parsed()) {
      const ConfigFlags& flags = cv_cmd->parsed() ? cv_flags : ablation_cmd->parsed() ? ablation_flags : variants_flags;
      const std::string command = cv_cmd->parsed() ? "cv" : ablation_cmd->parsed() ? "ablation" : "variants";
      const less::LessConfig config = flags.resolve();
      const less::Dataset data = less::load_dataset(data_path, target);
      less::CVOptions options;
      options.outer = outer;
      options.inner = inner;
      options.seed = config.seed;
      options.exec.threads = flags.threads;
      json report;
      if (command == "cv") {
        report = less::nested_cv(data, grid_by_name(grid_name), config, options).to_json(timings);
        report["grid"] = grid_name;
      } else if (command == "ablation") {
        report = {{"rows", less::run_ablation(data, config, options).to_json(timings)}};
      } else {
        report = {{"rows", less::run_variants(data, config, options).to_json(timings)}};
      }
      Manifest::write_json(out_path, report);
      Manifest manifest(command, argc, argv);
      manifest.input("data", data_path, data.n(), data.p() + 1);
      manifest.config(config, flags.threads);
      manifest.doc["folds"] = {{"outer", outer}, {"inner", inner}};
      manifest.output(out_path);
      manifest.write(manifest_path(manifest_file, out_path));
    } else if (demo_cmd->parsed()) {
      const less::LessConfig config = demo_flags.resolve();
      json summary;
      demo_sinusoid(out_dir, parse_list(m_list, "--m"), parse_list(r_list, "--r"), demo_n, grid_points, noise,
                    config, demo_flags.threads, summary);
      Manifest manifest("demo-sinusoid", argc, argv);
      manifest.config(config, demo_flags.threads);
      manifest.doc["cells"] = summary["cells"];
      manifest.write(manifest_path(manifest_file, (fs::path(out_dir) / "demo").string()));
    } else if (bench_cmd->parsed()) {
      less::LessConfig config = bench_flags.resolve();
      less::Dataset data;
      Manifest manifest("bench-parallel", argc, argv);
      if (!data_path.empty()) {
        if (target.empty()) throw less::ConfigError("--data requires --target");
        data = less::load_dataset(data_path, target);
        manifest.input("data", data_path, data.n(), data.p() + 1);
      } else {
        data = less::synthetic::friedman_like(synth_n, synth_p, config.seed).data;
        manifest.doc["synthetic"] = {{"generator", "friedman_like"}, {"n", synth_n}, {"p", synth_p}};
      }
      const auto threads = parse_list(thread_list, "--thread-list");
      json rows = json::array();
      std::optional<std::string> reference_model;
      std::optional<less::Vector> reference_pred;
      double base_seconds = 0.0;
      bool all_identical = true;
      for (std::size_t t : threads) {
        const auto start = std::chrono::steady_clock::now();
        const less::LessModel model = less::fit(data, config, {static_cast<unsigned>(t)});
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const less::Vector pred = less::predict(model, data.X, {static_cast<unsigned>(t)});
        const std::string bytes = less::serialize_model(model);
        if (!reference_model) {
          reference_model = bytes;
          reference_pred = pred;
          base_seconds = seconds;
        }
        const bool identical = bytes == *reference_model && pred == *reference_pred;
        all_identical = all_identical && identical;
        rows.push_back({{"threads", t},
                        {"seconds", seconds},
                        {"speedup", seconds > 0.0 ? base_seconds / seconds : 0.0},
                        {"identical_to_first", identical}});
      }
      json report = {{"rows", rows},
                     {"all_identical", all_identical},
                     {"hardware_threads", std::thread::hardware_concurrency()},
                     {"n", data.n()},
                     {"p", data.p()}};
      Manifest::write_json(out_path, report);
      manifest.config(config, static_cast<unsigned>(threads.front()));
      manifest.output(out_path);
      manifest.write(manifest_path(manifest_file, out_path));
      if (!all_identical) {
        std::cerr << "error: results differ across thread counts\n";
        return 3;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
