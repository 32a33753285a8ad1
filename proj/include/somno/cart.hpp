#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "somno/matrix.hpp"
#include "somno/rng.hpp"

namespace somno {

// Binary CART node. Leaves keep an inclusive [value_begin, value_end) window
// into Tree::leaf_values (a class distribution for classifiers, a single
// prediction for regression trees).
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int value_begin = -1;
  int value_end = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<double> leaf_values;

  int leaf_index(std::span<const double> x) const;
  std::span<const double> leaf_value(int node) const {
    const TreeNode& n = nodes[std::size_t(node)];
    return {leaf_values.data() + n.value_begin, std::size_t(n.value_end - n.value_begin)};
  }
  std::span<const double> predict(std::span<const double> x) const {
    return leaf_value(leaf_index(x));
  }
};

struct TreeConfig {
  int max_depth = 0;  // 0 = grow to purity
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int mtry = 0;  // features tried per split; 0 = all
};

// Gini-impurity classification tree on the rows listed in `samples`
// (repeats allowed, as produced by a bootstrap draw). When `importance` is
// non-null, accumulates the weighted impurity decrease per feature.
Tree fit_classification_tree(const Matrix& X, std::span<const int> y,
                             std::span<const double> weights, int n_classes,
                             std::span<const std::size_t> samples,
                             const TreeConfig& config, Rng& rng,
                             std::vector<double>* importance);

// Squared-error regression tree on weighted targets. `leaf_of_row[i]` reports
// the leaf node index for samples[i], so boosting can re-derive leaf values.
Tree fit_regression_tree(const Matrix& X, std::span<const double> targets,
                         std::span<const double> weights,
                         std::span<const std::size_t> samples,
                         const TreeConfig& config, Rng& rng,
                         std::vector<int>* leaf_of_row);

}  // namespace somno
