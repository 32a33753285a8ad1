#include <algorithm>
#include <cmath>
#include <numeric>

#include "somno/error.hpp"
#include "somno/model.hpp"

namespace somno {

namespace {

constexpr double kLeafClamp = 8.0;
constexpr double kDenomFloor = 1e-12;

void softmax_rows(Matrix& scores) {
  for (std::size_t r = 0; r < scores.rows; ++r) {
    auto row = scores.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (double& v : row) v /= total;
  }
}

double weighted_deviance(const Matrix& proba, std::span<const int> y,
                         std::span<const double> weights) {
  double loss = 0.0, total_w = 0.0;
  for (std::size_t r = 0; r < proba.rows; ++r) {
    loss -= weights[r] * std::log(std::max(proba.at(r, std::size_t(y[r])), 1e-15));
    total_w += weights[r];
  }
  return loss / total_w;
}

}  // namespace

GbModel fit_gradient_boosting(const GradientBoostingConfig& config,
                              const Matrix& X, std::span<const int> y,
                              std::span<const double> weights, int n_classes,
                              std::uint64_t seed) {
  const std::size_t n = X.rows;
  const std::size_t k = std::size_t(n_classes);

  GbModel model;
  model.n_classes = n_classes;
  model.learning_rate = config.learning_rate;

  // log-prior initial scores
  std::vector<double> prior(k, 0.0);
  double total_w = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    prior[std::size_t(y[r])] += weights[r];
    total_w += weights[r];
  }
  model.init_scores.resize(k);
  for (std::size_t c = 0; c < k; ++c)
    model.init_scores[c] = std::log(std::max(prior[c] / total_w, 1e-12));

  Matrix scores(n, k);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < k; ++c) scores.at(r, c) = model.init_scores[c];

  TreeConfig tree_cfg;
  tree_cfg.max_depth = config.max_depth;
  tree_cfg.min_samples_leaf = config.min_samples_leaf;

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  Matrix proba = scores;
  softmax_rows(proba);
  model.train_loss.push_back(weighted_deviance(proba, y, weights));

  std::vector<double> residual(n);
  std::vector<int> leaf_of_row;
  const double k_factor = double(n_classes - 1) / double(n_classes);

  for (int stage = 0; stage < config.n_stages; ++stage) {
    std::vector<Tree> stage_trees(k);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t r = 0; r < n; ++r)
        residual[r] = (std::size_t(y[r]) == c ? 1.0 : 0.0) - proba.at(r, c);

      Rng rng(Rng::mix(seed, std::uint64_t(stage) * k + c));
      Tree tree = fit_regression_tree(X, residual, weights, all_rows, tree_cfg,
                                      rng, &leaf_of_row);

      // Friedman leaf update for the multinomial deviance
      std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const auto leaf = std::size_t(leaf_of_row[r]);
        num[leaf] += weights[r] * residual[r];
        den[leaf] += weights[r] * std::abs(residual[r]) * (1.0 - std::abs(residual[r]));
      }
      for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
        if (tree.nodes[node].feature >= 0) continue;
        double value = k_factor * num[node] / std::max(den[node], kDenomFloor);
        value = std::clamp(value, -kLeafClamp, kLeafClamp);
        tree.leaf_values[std::size_t(tree.nodes[node].value_begin)] = value;
      }
      for (std::size_t r = 0; r < n; ++r) {
        const auto leaf = std::size_t(leaf_of_row[r]);
        scores.at(r, c) += config.learning_rate *
                           tree.leaf_values[std::size_t(tree.nodes[leaf].value_begin)];
      }
      stage_trees[c] = std::move(tree);
    }
    model.stages.push_back(std::move(stage_trees));
    proba = scores;
    softmax_rows(proba);
    model.train_loss.push_back(weighted_deviance(proba, y, weights));
  }
  return model;
}

Matrix gb_predict_proba(const GbModel& model, const Matrix& X) {
  const std::size_t k = std::size_t(model.n_classes);
  Matrix scores(X.rows, k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < std::ptrdiff_t(X.rows); ++r) {
    auto row = scores.row(std::size_t(r));
    const auto x = X.row(std::size_t(r));
    for (std::size_t c = 0; c < k; ++c) row[c] = model.init_scores[c];
    for (const auto& stage : model.stages)
      for (std::size_t c = 0; c < k; ++c)
        row[c] += model.learning_rate * stage[c].predict(x)[0];
  }
  softmax_rows(scores);
  return scores;
}

}  // namespace somno
