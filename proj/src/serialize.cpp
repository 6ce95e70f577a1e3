#include "less/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "less/errors.hpp"

namespace less {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", json(m.values())}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) throw DataError("matrix payload size does not match its shape");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json linear_to_json(const LinearModel& lm) {
  return {{"type", "linear"}, {"coef", lm.coef}, {"intercept", lm.fit_intercept}, {"ridge_eta", lm.ridge_eta}};
}

LinearModel linear_from_json(const json& j) {
  LinearModel lm;
  lm.coef = j.at("coef").get<Vector>();
  lm.fit_intercept = j.at("intercept").get<bool>();
  lm.ridge_eta = j.at("ridge_eta").get<double>();
  if (lm.fit_intercept && lm.coef.empty()) throw DataError("linear model with intercept has no coefficients");
  return lm;
}

json tree_to_json(const TreeModel& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       value = json::array(), samples = json::array();
  for (const TreeNode& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    samples.push_back(n.n_samples);
  }
  return {{"type", "tree"},
          {"min_samples_split", t.min_samples_split},
          {"n_features", t.n_features},
          {"nodes",
           {{"feature", feature},
            {"threshold", threshold},
            {"left", left},
            {"right", right},
            {"value", value},
            {"n_samples", samples}}}};
}

TreeModel tree_from_json(const json& j) {
  TreeModel t;
  t.min_samples_split = j.at("min_samples_split").get<int>();
  t.n_features = j.at("n_features").get<std::size_t>();
  const json& nodes = j.at("nodes");
  const auto feature = nodes.at("feature").get<std::vector<std::int32_t>>();
  const auto threshold = nodes.at("threshold").get<std::vector<double>>();
  const auto left = nodes.at("left").get<std::vector<std::int32_t>>();
  const auto right = nodes.at("right").get<std::vector<std::int32_t>>();
  const auto value = nodes.at("value").get<std::vector<double>>();
  const auto samples = nodes.at("n_samples").get<std::vector<std::uint32_t>>();
  const std::size_t count = feature.size();
  if (count == 0 || threshold.size() != count || left.size() != count || right.size() != count ||
      value.size() != count || samples.size() != count) {
    throw DataError("tree node arrays are empty or of unequal length");
  }
  const auto n = static_cast<std::int32_t>(count);
  for (std::size_t i = 0; i < count; ++i) {
    TreeNode node{feature[i], threshold[i], left[i], right[i], value[i], samples[i]};
    if (!node.is_leaf() &&
        (node.feature >= static_cast<std::int32_t>(t.n_features) || node.left <= static_cast<std::int32_t>(i) ||
         node.right <= static_cast<std::int32_t>(i) || node.left >= n || node.right >= n)) {
      throw DataError("tree node " + std::to_string(i) + " has invalid links");
    }
    t.nodes.push_back(node);
  }
  return t;
}

json forest_to_json(const ForestModel& f) {
  json trees = json::array();
  for (const TreeModel& t : f.trees) trees.push_back(tree_to_json(t));
  return {{"type", "forest"}, {"max_features", f.max_features}, {"trees", trees}};
}

ForestModel forest_from_json(const json& j) {
  ForestModel f;
  f.max_features = j.at("max_features").get<std::size_t>();
  for (const json& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
  if (f.trees.empty()) throw DataError("forest has no trees");
  return f;
}

json local_to_json(const LocalModel& m) {
  if (const auto* lm = std::get_if<LinearModel>(&m)) return linear_to_json(*lm);
  return tree_to_json(std::get<TreeModel>(m));
}

LocalModel local_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "linear") return linear_from_json(j);
  if (type == "tree") return tree_from_json(j);
  throw DataError("unknown local model type '" + type + "'");
}

json global_to_json(const GlobalModel& g) {
  if (const auto* lm = std::get_if<LinearModel>(&g)) return linear_to_json(*lm);
  if (const auto* rf = std::get_if<ForestModel>(&g)) return forest_to_json(*rf);
  return {{"type", "none"}};
}

GlobalModel global_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "none") return std::monostate{};
  if (type == "linear") return linear_from_json(j);
  if (type == "forest") return forest_from_json(j);
  throw DataError("unknown global model type '" + type + "'");
}

}  // namespace

json config_to_json(const LessConfig& c) {
  return {{"frac_of_samples", c.frac_of_samples},
          {"n_replications", c.n_replications},
          {"lambda", c.lambda ? json(*c.lambda) : json(nullptr)},
          {"distance", std::string(to_string(c.distance))},
          {"normalize_weights", c.normalize_weights},
          {"local", std::string(to_string(c.local))},
          {"min_samples_split", c.min_samples_split},
          {"global", std::string(to_string(c.global))},
          {"n_estimators", c.n_estimators},
          {"subsets", std::string(to_string(c.subsets))},
          {"n_clusters", c.n_clusters},
          {"use_validation_split", c.use_validation_split},
          {"validation_fraction", c.validation_fraction},
          {"ablation", std::string(to_string(c.ablation))},
          {"global_intercept", c.global_intercept},
          {"seed", c.seed}};
}

LessConfig config_from_json(const json& doc, LessConfig c) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "frac_of_samples", "n_replications", "lambda",          "distance",         "normalize_weights",
      "local",           "min_samples_split", "global",       "n_estimators",     "subsets",
      "n_clusters",      "use_validation_split", "validation_fraction", "ablation", "global_intercept",
      "seed"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (doc.contains("frac_of_samples")) c.frac_of_samples = doc["frac_of_samples"].get<double>();
    if (doc.contains("n_replications")) c.n_replications = doc["n_replications"].get<int>();
    if (doc.contains("lambda")) {
      const json& l = doc["lambda"];
      if (l.is_null() || (l.is_string() && l.get<std::string>() == "auto")) {
        c.lambda.reset();
      } else {
        c.lambda = l.get<double>();
      }
    }
    if (doc.contains("distance")) c.distance = parse_distance(doc["distance"].get<std::string>());
    if (doc.contains("normalize_weights")) c.normalize_weights = doc["normalize_weights"].get<bool>();
    if (doc.contains("local")) c.local = parse_local(doc["local"].get<std::string>());
    if (doc.contains("min_samples_split")) c.min_samples_split = doc["min_samples_split"].get<int>();
    if (doc.contains("global")) c.global = parse_global(doc["global"].get<std::string>());
    if (doc.contains("n_estimators")) c.n_estimators = doc["n_estimators"].get<int>();
    if (doc.contains("subsets")) c.subsets = parse_subsets(doc["subsets"].get<std::string>());
    if (doc.contains("n_clusters")) c.n_clusters = doc["n_clusters"].get<int>();
    if (doc.contains("use_validation_split")) c.use_validation_split = doc["use_validation_split"].get<bool>();
    if (doc.contains("validation_fraction")) c.validation_fraction = doc["validation_fraction"].get<double>();
    if (doc.contains("ablation")) c.ablation = parse_ablation(doc["ablation"].get<std::string>());
    if (doc.contains("global_intercept")) c.global_intercept = doc["global_intercept"].get<bool>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

json model_to_json(const LessModel& model) {
  json reps = json::array();
  for (const ReplicationModel& rep : model.replications) {
    json locals = json::array();
    for (const LocalModel& lm : rep.locals) locals.push_back(local_to_json(lm));
    reps.push_back({{"lambda", rep.lambda},
                    {"normalize_weights", rep.normalize_weights},
                    {"ablation", std::string(to_string(rep.ablation))},
                    {"centroids", matrix_to_json(rep.centroids)},
                    {"locals", locals},
                    {"global", global_to_json(rep.global)}});
  }
  return {{"format", kModelFormat},
          {"version", kModelFormatVersion},
          {"n_features", model.n_features()},
          {"feature_names", model.feature_names},
          {"target_name", model.target_name},
          {"config", config_to_json(model.config)},
          {"plan", {{"k", model.plan.k}, {"m", model.plan.m}, {"lambda", model.plan.lambda}}},
          {"norm",
           {{"x_mean", model.norm.x_mean},
            {"x_std", model.norm.x_std},
            {"y_mean", model.norm.y_mean},
            {"y_std", model.norm.y_std}}},
          {"replications", reps}};
}

LessModel model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kModelFormat) throw DataError("not a LESS model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format version " + std::to_string(version));
    }
    LessModel model;
    model.config = config_from_json(doc.at("config"));
    const json& plan = doc.at("plan");
    model.plan = {plan.at("k").get<std::size_t>(), plan.at("m").get<std::size_t>(),
                  plan.at("lambda").get<double>()};
    const json& norm = doc.at("norm");
    model.norm.x_mean = norm.at("x_mean").get<Vector>();
    model.norm.x_std = norm.at("x_std").get<Vector>();
    model.norm.y_mean = norm.at("y_mean").get<double>();
    model.norm.y_std = norm.at("y_std").get<double>();
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.target_name = doc.at("target_name").get<std::string>();
    const auto p = doc.at("n_features").get<std::size_t>();
    if (model.norm.x_mean.size() != p || model.norm.x_std.size() != p) {
      throw DataError("normalization statistics do not match n_features");
    }
    for (const json& r : doc.at("replications")) {
      ReplicationModel rep;
      rep.lambda = r.at("lambda").get<double>();
      rep.normalize_weights = r.at("normalize_weights").get<bool>();
      rep.ablation = parse_ablation(r.at("ablation").get<std::string>());
      rep.centroids = matrix_from_json(r.at("centroids"));
      for (const json& l : r.at("locals")) rep.locals.push_back(local_from_json(l));
      rep.global = global_from_json(r.at("global"));
      if (rep.locals.empty() || rep.centroids.rows() != rep.locals.size() || rep.centroids.cols() != p) {
        throw DataError("replication centroids do not match its local models");
      }
      model.replications.push_back(std::move(rep));
    }
    if (model.replications.empty()) throw DataError("model has no replications");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

std::string serialize_model(const LessModel& model) { return model_to_json(model).dump(1) + "\n"; }

LessModel deserialize_model(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw DataError("model file is not valid JSON");
  return model_from_json(doc);
}

void save_model(const LessModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << serialize_model(model);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

LessModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace less
