#include "less/tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "less/errors.hpp"

namespace less {

namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double score = -std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const double> y, const TreeParams& params, Rng& rng)
      : X_(X), y_(y), params_(params), rng_(rng), order_(X.cols()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  TreeModel build(std::vector<std::size_t> rows) {
    rows_ = std::move(rows);
    TreeModel model;
    model.min_samples_split = params_.min_samples_split;
    model.n_features = X_.cols();

    struct Pending {
      std::size_t begin, end;
      std::int32_t node;
    };
    model.nodes.push_back({});
    std::vector<Pending> stack{{0, rows_.size(), 0}};
    while (!stack.empty()) {
      const Pending task = stack.back();
      stack.pop_back();
      const std::size_t count = task.end - task.begin;

      double sum = 0.0;
      bool constant = true;
      const double first = y_[rows_[task.begin]];
      for (std::size_t i = task.begin; i < task.end; ++i) {
        sum += y_[rows_[i]];
        constant = constant && y_[rows_[i]] == first;
      }
      TreeNode& node = model.nodes[task.node];
      node.value = sum / static_cast<double>(count);
      node.n_samples = static_cast<std::uint32_t>(count);
      if (constant || count < static_cast<std::size_t>(params_.min_samples_split)) continue;

      const Split split = best_split(task.begin, task.end, node.value);
      if (split.feature < 0) continue;

      const auto mid_it = std::stable_partition(
          rows_.begin() + task.begin, rows_.begin() + task.end,
          [&](std::size_t r) { return X_(r, split.feature) <= split.threshold; });
      const std::size_t mid = static_cast<std::size_t>(mid_it - rows_.begin());

      const auto left = static_cast<std::int32_t>(model.nodes.size());
      model.nodes.push_back({});
      model.nodes.push_back({});
      TreeNode& parent = model.nodes[task.node];
      parent.feature = split.feature;
      parent.threshold = split.threshold;
      parent.left = left;
      parent.right = left + 1;
      // Right first so the left subtree is grown (and numbered) first.
      stack.push_back({mid, task.end, left + 1});
      stack.push_back({task.begin, mid, left});
    }
    return model;
  }

 private:
  std::size_t features_to_draw() const {
    const std::size_t p = X_.cols();
    return params_.max_features == 0 ? p : std::min(params_.max_features, p);
  }

  Split best_split(std::size_t begin, std::size_t end, double mean) {
    const std::size_t p = X_.cols();
    const std::size_t draw = features_to_draw();
    if (draw < p) {
      // Partial Fisher-Yates: order_[0..draw) is the sampled feature set.
      for (std::size_t i = 0; i < draw; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, p - 1);
        std::swap(order_[i], order_[pick(rng_)]);
      }
    }
    std::vector<std::size_t> candidates(order_.begin(), order_.begin() + draw);
    std::sort(candidates.begin(), candidates.end());

    Split best;
    for (std::size_t f : candidates) consider_feature(f, begin, end, mean, best);
    for (std::size_t i = draw; i < p && best.feature < 0; ++i) {
      consider_feature(order_[i], begin, end, mean, best);
    }
    return best;
  }

  // Updates `best` with the best threshold on feature f. The score is
  // sL^2/nL + sR^2/nR on node-centred targets, which differs from the
  // reduction in squared error by a node constant.
  void consider_feature(std::size_t f, std::size_t begin, std::size_t end, double mean, Split& best) {
    const std::size_t count = end - begin;
    pairs_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t r = rows_[begin + i];
      pairs_[i] = {X_(r, f), y_[r] - mean};
    }
    std::sort(pairs_.begin(), pairs_.end());
    double total = 0.0;
    for (const auto& pr : pairs_) total += pr.second;

    Split local;
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i) {
      left_sum += pairs_[i].second;
      if (!(pairs_[i].first < pairs_[i + 1].first)) continue;
      const double n_left = static_cast<double>(i + 1);
      const double n_right = static_cast<double>(count - i - 1);
      const double right_sum = total - left_sum;
      const double score = left_sum * left_sum / n_left + right_sum * right_sum / n_right;
      if (score > local.score) {
        double threshold = 0.5 * (pairs_[i].first + pairs_[i + 1].first);
        if (!(threshold < pairs_[i + 1].first)) threshold = pairs_[i].first;
        local = {static_cast<std::int32_t>(f), threshold, score};
      }
    }
    if (local.feature < 0) return;
    if (local.score > best.score ||
        (local.score == best.score && local.feature < best.feature)) {
      best = local;
    }
  }

  const Matrix& X_;
  std::span<const double> y_;
  const TreeParams& params_;
  Rng& rng_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rows_;
  std::vector<std::pair<double, double>> pairs_;
};

}  // namespace

double TreeModel::predict(std::span<const double> x) const { return nodes[leaf_for(x)].value; }

std::size_t TreeModel::leaf_for(std::span<const double> x) const {
  if (x.size() != n_features) {
    throw ConfigError("tree expects " + std::to_string(n_features) + " features, got " +
                      std::to_string(x.size()));
  }
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return i;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeModel fit_tree(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                   const TreeParams& params, Rng& rng) {
  if (y.size() != X.rows()) throw ConfigError("fit_tree: y length does not match X rows");
  if (rows.empty()) throw ConfigError("fit_tree: no rows");
  if (params.min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
  TreeBuilder builder(X, y, params, rng);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

TreeModel fit_tree(const Matrix& X, std::span<const double> y, const TreeParams& params, Rng& rng) {
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(X, y, rows, params, rng);
}

}  // namespace less
