#include "somno/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "somno/error.hpp"

namespace somno {

namespace {

struct WorkItem {
  std::size_t begin = 0, end = 0;
  int depth = 0;
  int parent = -1;
  bool is_left = false;
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;       // impurity decrease, weighted by node fraction
  std::size_t split_pos = 0;  // elements in the left child after partition
};

// Draws `take` distinct feature indices (partial Fisher-Yates).
void sample_features(std::vector<int>& perm, int take, Rng& rng) {
  const int d = int(perm.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < take; ++i) {
    const int j = i + int(rng.below(std::uint64_t(d - i)));
    std::swap(perm[std::size_t(i)], perm[std::size_t(j)]);
  }
}

}  // namespace

int Tree::leaf_index(std::span<const double> x) const {
  int at = 0;
  while (nodes[std::size_t(at)].feature >= 0) {
    const TreeNode& n = nodes[std::size_t(at)];
    at = x[std::size_t(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return at;
}

Tree fit_classification_tree(const Matrix& X, std::span<const int> y,
                             std::span<const double> weights, int n_classes,
                             std::span<const std::size_t> samples,
                             const TreeConfig& config, Rng& rng,
                             std::vector<double>* importance) {
  if (samples.empty()) raise(ErrorCode::Internal, "empty sample set for tree fit");
  const int d = int(X.cols);
  const int mtry = config.mtry > 0 ? std::min(config.mtry, d) : d;

  Tree tree;
  std::vector<std::size_t> pos(samples.size());
  std::iota(pos.begin(), pos.end(), 0);

  std::vector<int> perm(static_cast<std::size_t>(d));
  std::vector<std::size_t> scratch;
  std::vector<double> left_w(static_cast<std::size_t>(n_classes));
  std::vector<double> node_w(static_cast<std::size_t>(n_classes));

  double root_weight = 0.0;
  for (std::size_t s : samples) root_weight += weights[s];

  auto node_counts = [&](std::size_t begin, std::size_t end) {
    std::fill(node_w.begin(), node_w.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t row = samples[pos[i]];
      node_w[std::size_t(y[row])] += weights[row];
      total += weights[row];
    }
    return total;
  };

  auto gini = [&](const std::vector<double>& w, double total) {
    if (total <= 0) return 0.0;
    double sq = 0.0;
    for (double v : w) sq += v * v;
    return 1.0 - sq / (total * total);
  };

  std::vector<WorkItem> stack;
  stack.push_back({0, samples.size(), 0, -1, false});

  while (!stack.empty()) {
    const WorkItem item = stack.back();
    stack.pop_back();

    const double total = node_counts(item.begin, item.end);
    const double parent_gini = gini(node_w, total);
    const std::size_t count = item.end - item.begin;

    const bool depth_stop = config.max_depth > 0 && item.depth >= config.max_depth;
    const bool size_stop = count < std::size_t(config.min_samples_split);
    const bool pure = parent_gini <= 1e-12;

    SplitChoice best;
    if (!depth_stop && !size_stop && !pure) {
      sample_features(perm, mtry, rng);
      for (int fi = 0; fi < mtry; ++fi) {
        const int f = perm[std::size_t(fi)];
        scratch.assign(pos.begin() + std::ptrdiff_t(item.begin),
                       pos.begin() + std::ptrdiff_t(item.end));
        std::sort(scratch.begin(), scratch.end(), [&](std::size_t a, std::size_t b) {
          return X.at(samples[a], std::size_t(f)) < X.at(samples[b], std::size_t(f));
        });
        std::fill(left_w.begin(), left_w.end(), 0.0);
        double left_total = 0.0;
        for (std::size_t i = 0; i + 1 < count; ++i) {
          const std::size_t row = samples[scratch[i]];
          left_w[std::size_t(y[row])] += weights[row];
          left_total += weights[row];
          const double v = X.at(row, std::size_t(f));
          const double v_next = X.at(samples[scratch[i + 1]], std::size_t(f));
          if (v == v_next) continue;
          const std::size_t n_left = i + 1;
          if (n_left < std::size_t(config.min_samples_leaf) ||
              count - n_left < std::size_t(config.min_samples_leaf))
            continue;
          double left_sq = 0.0, right_sq = 0.0;
          for (int c = 0; c < n_classes; ++c) {
            left_sq += left_w[std::size_t(c)] * left_w[std::size_t(c)];
            const double rw = node_w[std::size_t(c)] - left_w[std::size_t(c)];
            right_sq += rw * rw;
          }
          const double right_total = total - left_total;
          const double g_left = 1.0 - left_sq / (left_total * left_total);
          const double g_right = 1.0 - right_sq / (right_total * right_total);
          const double decrease =
              parent_gini - (left_total / total) * g_left - (right_total / total) * g_right;
          if (decrease > best.gain + 1e-15) {
            best.gain = decrease;
            best.feature = f;
            best.threshold = 0.5 * (v + v_next);
            best.split_pos = n_left;
          }
        }
      }
    }

    const int node_id = int(tree.nodes.size());
    tree.nodes.emplace_back();
    if (item.parent >= 0) {
      (item.is_left ? tree.nodes[std::size_t(item.parent)].left
                    : tree.nodes[std::size_t(item.parent)].right) = node_id;
    }

    if (best.feature < 0) {
      TreeNode& leaf = tree.nodes.back();
      leaf.value_begin = int(tree.leaf_values.size());
      for (int c = 0; c < n_classes; ++c)
        tree.leaf_values.push_back(total > 0 ? node_w[std::size_t(c)] / total : 0.0);
      leaf.value_end = int(tree.leaf_values.size());
      continue;
    }

    TreeNode& node = tree.nodes.back();
    node.feature = best.feature;
    node.threshold = best.threshold;
    if (importance) (*importance)[std::size_t(best.feature)] += (total / root_weight) * best.gain;

    const auto mid = std::stable_partition(
        pos.begin() + std::ptrdiff_t(item.begin), pos.begin() + std::ptrdiff_t(item.end),
        [&](std::size_t p) {
          return X.at(samples[p], std::size_t(best.feature)) <= best.threshold;
        });
    const auto split = std::size_t(mid - pos.begin());
    // right child first so the left is processed next (purely cosmetic order)
    stack.push_back({split, item.end, item.depth + 1, node_id, false});
    stack.push_back({item.begin, split, item.depth + 1, node_id, true});
  }
  return tree;
}

Tree fit_regression_tree(const Matrix& X, std::span<const double> targets,
                         std::span<const double> weights,
                         std::span<const std::size_t> samples,
                         const TreeConfig& config, Rng& rng,
                         std::vector<int>* leaf_of_row) {
  if (samples.empty()) raise(ErrorCode::Internal, "empty sample set for tree fit");
  const int d = int(X.cols);
  const int mtry = config.mtry > 0 ? std::min(config.mtry, d) : d;

  Tree tree;
  std::vector<std::size_t> pos(samples.size());
  std::iota(pos.begin(), pos.end(), 0);
  if (leaf_of_row) leaf_of_row->assign(samples.size(), -1);

  std::vector<int> perm(static_cast<std::size_t>(d));
  std::vector<std::size_t> scratch;

  std::vector<WorkItem> stack;
  stack.push_back({0, samples.size(), 0, -1, false});

  while (!stack.empty()) {
    const WorkItem item = stack.back();
    stack.pop_back();
    const std::size_t count = item.end - item.begin;

    double total_w = 0.0, total_s = 0.0, total_sq = 0.0;
    for (std::size_t i = item.begin; i < item.end; ++i) {
      const std::size_t row = samples[pos[i]];
      const double w = weights[row];
      total_w += w;
      total_s += w * targets[row];
      total_sq += w * targets[row] * targets[row];
    }
    const double node_sse = total_sq - total_s * total_s / std::max(total_w, 1e-300);

    const bool depth_stop = config.max_depth > 0 && item.depth >= config.max_depth;
    const bool size_stop = count < std::size_t(config.min_samples_split);
    const bool pure = node_sse <= 1e-12;

    SplitChoice best;
    if (!depth_stop && !size_stop && !pure) {
      sample_features(perm, mtry, rng);
      const double base_score = total_s * total_s / total_w;
      for (int fi = 0; fi < mtry; ++fi) {
        const int f = perm[std::size_t(fi)];
        scratch.assign(pos.begin() + std::ptrdiff_t(item.begin),
                       pos.begin() + std::ptrdiff_t(item.end));
        std::sort(scratch.begin(), scratch.end(), [&](std::size_t a, std::size_t b) {
          return X.at(samples[a], std::size_t(f)) < X.at(samples[b], std::size_t(f));
        });
        double left_w = 0.0, left_s = 0.0;
        for (std::size_t i = 0; i + 1 < count; ++i) {
          const std::size_t row = samples[scratch[i]];
          left_w += weights[row];
          left_s += weights[row] * targets[row];
          const double v = X.at(row, std::size_t(f));
          const double v_next = X.at(samples[scratch[i + 1]], std::size_t(f));
          if (v == v_next) continue;
          const std::size_t n_left = i + 1;
          if (n_left < std::size_t(config.min_samples_leaf) ||
              count - n_left < std::size_t(config.min_samples_leaf))
            continue;
          const double right_w = total_w - left_w;
          const double right_s = total_s - left_s;
          if (left_w <= 0 || right_w <= 0) continue;
          const double gain =
              left_s * left_s / left_w + right_s * right_s / right_w - base_score;
          if (gain > best.gain + 1e-15) {
            best.gain = gain;
            best.feature = f;
            best.threshold = 0.5 * (v + v_next);
            best.split_pos = n_left;
          }
        }
      }
    }

    const int node_id = int(tree.nodes.size());
    tree.nodes.emplace_back();
    if (item.parent >= 0) {
      (item.is_left ? tree.nodes[std::size_t(item.parent)].left
                    : tree.nodes[std::size_t(item.parent)].right) = node_id;
    }

    if (best.feature < 0) {
      TreeNode& leaf = tree.nodes.back();
      leaf.value_begin = int(tree.leaf_values.size());
      tree.leaf_values.push_back(total_w > 0 ? total_s / total_w : 0.0);
      leaf.value_end = int(tree.leaf_values.size());
      if (leaf_of_row) {
        for (std::size_t i = item.begin; i < item.end; ++i)
          (*leaf_of_row)[pos[i]] = node_id;
      }
      continue;
    }

    TreeNode& node = tree.nodes.back();
    node.feature = best.feature;
    node.threshold = best.threshold;
    const auto mid = std::stable_partition(
        pos.begin() + std::ptrdiff_t(item.begin), pos.begin() + std::ptrdiff_t(item.end),
        [&](std::size_t p) {
          return X.at(samples[p], std::size_t(best.feature)) <= best.threshold;
        });
    const auto split = std::size_t(mid - pos.begin());
    stack.push_back({split, item.end, item.depth + 1, node_id, false});
    stack.push_back({item.begin, split, item.depth + 1, node_id, true});
  }
  return tree;
}

}  // namespace somno
