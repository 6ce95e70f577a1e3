#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "less/matrix.hpp"
#include "less/random.hpp"

namespace less {

// Row indices of one localized subset and the mean of those rows.
struct SubsetSpec {
  std::vector<std::size_t> indices;
  Vector centroid;

  friend bool operator==(const SubsetSpec&, const SubsetSpec&) = default;
};

Vector centroid_of(const Matrix& X, std::span<const std::size_t> indices);

// The min(k, n) rows closest to X.row(anchor), ordered by (distance, index).
SubsetSpec nearest_neighbour_subset(const Matrix& X, std::size_t anchor, std::size_t k);

// m distinct anchors drawn uniformly, each expanded to its k nearest rows.
// Subsets may overlap and need not cover X. Throws ConfigError if m > n.
std::vector<SubsetSpec> select_random_anchor_subsets(const Matrix& X, std::size_t m, std::size_t k,
                                                     Rng& rng);

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  std::vector<double> sse_history;  // within-cluster SSE after each centroid update
  int iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm from a k-means++ start. Stops when assignments repeat or
// after max_iterations. Nearest-centroid ties go to the lower cluster index;
// a cluster left empty is re-seeded with the point farthest from its own
// centroid (taken from a cluster with at least two members).
KMeansResult kmeans(const Matrix& X, std::size_t m, Rng& rng, int max_iterations = 300);

// k-means clusters as subsets: a partition of the rows, indices ascending.
std::vector<SubsetSpec> select_kmeans_subsets(const Matrix& X, std::size_t m, Rng& rng);

}  // namespace less
