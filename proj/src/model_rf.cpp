#include <algorithm>
#include <cmath>

#include "somno/error.hpp"
#include "somno/model.hpp"

namespace somno {

RandomForestModel fit_random_forest(const RandomForestConfig& config,
                                    const Matrix& X, std::span<const int> y,
                                    std::span<const double> weights,
                                    int n_classes, std::uint64_t seed,
                                    bool parallel) {
  RandomForestModel model;
  model.n_classes = n_classes;
  model.trees.resize(std::size_t(config.n_trees));

  TreeConfig tree_cfg;
  tree_cfg.max_depth = config.max_depth;
  tree_cfg.min_samples_leaf = config.min_samples_leaf;
  tree_cfg.mtry = config.mtry > 0 ? config.mtry
                                  : std::max(1, int(std::floor(std::sqrt(double(X.cols)))));

  const std::size_t n = X.rows;
  const std::size_t draw =
      std::max<std::size_t>(1, std::size_t(std::lround(config.max_samples * double(n))));

  std::vector<std::vector<double>> tree_importance(static_cast<std::size_t>(config.n_trees));

  // Each tree owns a seed derived from its index, so results do not depend
  // on the thread schedule.
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int t = 0; t < config.n_trees; ++t) {
    Rng rng(Rng::mix(seed, std::uint64_t(t)));
    std::vector<std::size_t> bootstrap(draw);
    for (std::size_t i = 0; i < draw; ++i) bootstrap[i] = std::size_t(rng.below(n));
    std::vector<double> importance(X.cols, 0.0);
    model.trees[std::size_t(t)] = fit_classification_tree(
        X, y, weights, n_classes, bootstrap, tree_cfg, rng, &importance);
    tree_importance[std::size_t(t)] = std::move(importance);
  }

  // Reduce in tree order: normalize each tree's importance, then average.
  model.importances.assign(X.cols, 0.0);
  for (const auto& imp : tree_importance) {
    double total = 0.0;
    for (double v : imp) total += v;
    if (total <= 0) continue;
    for (std::size_t f = 0; f < imp.size(); ++f)
      model.importances[f] += imp[f] / total;
  }
  for (double& v : model.importances) v /= double(config.n_trees);
  return model;
}

Matrix rf_predict_proba(const RandomForestModel& model, const Matrix& X) {
  Matrix proba(X.rows, std::size_t(model.n_classes));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < std::ptrdiff_t(X.rows); ++r) {
    auto out = proba.row(std::size_t(r));
    for (const Tree& tree : model.trees) {
      const auto leaf = tree.predict(X.row(std::size_t(r)));
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += leaf[c];
    }
    double total = 0.0;
    for (double v : out) total += v;
    if (total > 0)
      for (double& v : out) v /= total;
    else
      for (double& v : out) v = 1.0 / double(out.size());
  }
  return proba;
}

}  // namespace somno
