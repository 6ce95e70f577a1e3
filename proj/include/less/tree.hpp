#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "less/matrix.hpp"
#include "less/random.hpp"

namespace less {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // mean target of the node's samples
  std::uint32_t n_samples = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeParams {
  int min_samples_split = 2;
  std::size_t max_features = 0;  // features drawn per split; 0 means all
};

// CART regression tree grown by greedy variance reduction. nodes[0] is the root.
struct TreeModel {
  std::vector<TreeNode> nodes;
  int min_samples_split = 2;
  std::size_t n_features = 0;

  double predict(std::span<const double> x) const;
  std::size_t leaf_for(std::span<const double> x) const;
  std::size_t leaf_count() const;

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

// Candidate thresholds are midpoints of consecutive distinct values; the
// largest reduction in squared error wins, ties going to the lowest feature
// index and then the lowest threshold. A node is a leaf when it holds fewer
// than min_samples_split samples, its targets are all equal, or no feature
// separates its samples. With max_features < p a random subset of features
// is examined per split, extended one feature at a time if none of the drawn
// features can separate the node.
TreeModel fit_tree(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                   const TreeParams& params, Rng& rng);
TreeModel fit_tree(const Matrix& X, std::span<const double> y, const TreeParams& params, Rng& rng);

}  // namespace less
