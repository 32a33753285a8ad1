#include "somno/select.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "somno/error.hpp"
#include "somno/eval.hpp"

namespace somno {

namespace {

double macro_f1_int(std::span<const int> y_true, std::span<const int> y_pred,
                    int n_classes) {
  std::vector<double> tp(static_cast<std::size_t>(n_classes), 0.0);
  std::vector<double> fp(std::size_t(n_classes), 0.0);
  std::vector<double> fn(std::size_t(n_classes), 0.0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == y_pred[i]) {
      tp[std::size_t(y_true[i])] += 1.0;
    } else {
      fp[std::size_t(y_pred[i])] += 1.0;
      fn[std::size_t(y_true[i])] += 1.0;
    }
  }
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < n_classes; ++c) {
    const double support = tp[std::size_t(c)] + fn[std::size_t(c)];
    if (support == 0) continue;
    ++present;
    const double denom_p = tp[std::size_t(c)] + fp[std::size_t(c)];
    const double precision = denom_p > 0 ? tp[std::size_t(c)] / denom_p : 0.0;
    const double recall = tp[std::size_t(c)] / support;
    if (precision + recall > 0) sum += 2.0 * precision * recall / (precision + recall);
  }
  return present > 0 ? sum / double(present) : 0.0;
}

std::vector<int> rf_predict_labels(const RandomForestModel& model, const Matrix& X) {
  const Matrix proba = rf_predict_proba(model, X);
  std::vector<int> labels(X.rows);
  for (std::size_t r = 0; r < X.rows; ++r) {
    const auto row = proba.row(r);
    labels[r] = int(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return labels;
}

// One elimination path: returns the per-size scores when test rows are given,
// or the per-size active sets of the unscored final pass otherwise.
struct EliminationResult {
  std::map<std::size_t, double> score_by_size;
  std::map<std::size_t, std::vector<std::size_t>> active_by_size;
};

EliminationResult run_elimination(const Matrix& X, std::span<const int> y,
                                  std::span<const std::size_t> train_rows,
                                  std::span<const std::size_t> test_rows,
                                  int n_classes, const RfecvConfig& config,
                                  std::uint64_t seed) {
  EliminationResult result;
  std::vector<std::size_t> active(X.cols);
  std::iota(active.begin(), active.end(), 0);

  std::vector<int> y_train(train_rows.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];
  std::vector<int> y_test(test_rows.size());
  for (std::size_t i = 0; i < test_rows.size(); ++i) y_test[i] = y[test_rows[i]];
  const std::vector<double> weights(train_rows.size(), 1.0);

  int round = 0;
  while (!active.empty()) {
    const Matrix x_train = X.select_rows(train_rows).select_columns(active);
    const RandomForestModel rf =
        fit_random_forest(config.estimator, x_train, y_train, weights, n_classes,
                          Rng::mix(seed, std::uint64_t(round)), /*parallel=*/true);

    if (!test_rows.empty()) {
      const Matrix x_test = X.select_rows(test_rows).select_columns(active);
      result.score_by_size[active.size()] =
          macro_f1_int(y_test, rf_predict_labels(rf, x_test), n_classes);
    }
    result.active_by_size[active.size()] = active;

    if (active.size() == 1) break;
    // rank ascending by (importance, column index); drop the lowest `step`
    std::vector<std::size_t> order(active.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (rf.importances[a] != rf.importances[b])
        return rf.importances[a] < rf.importances[b];
      return active[a] > active[b];
    });
    const std::size_t drop = std::min<std::size_t>(std::size_t(std::max(1, config.step)),
                                                   active.size() - 1);
    std::set<std::size_t> dropped;
    for (std::size_t i = 0; i < drop; ++i) dropped.insert(active[order[i]]);
    std::vector<std::size_t> next;
    for (std::size_t col : active)
      if (!dropped.count(col)) next.push_back(col);
    active = std::move(next);
    ++round;
  }
  return result;
}

}  // namespace

SelectionModel rfecv_select(const Matrix& X, std::span<const int> y,
                            std::span<const std::string> groups, int n_classes,
                            const RfecvConfig& config, std::uint64_t seed) {
  if (X.rows == 0 || X.cols == 0)
    raise(ErrorCode::EmptyInput, "empty feature matrix");
  std::set<int> present(y.begin(), y.end());
  if (present.size() < 2)
    raise(ErrorCode::DegenerateLabels, "RFECV needs at least 2 classes");

  // subject-grouped folds
  std::vector<std::string> unique_groups;
  for (const auto& g : groups)
    if (std::find(unique_groups.begin(), unique_groups.end(), g) == unique_groups.end())
      unique_groups.push_back(g);
  const int k = std::min<int>(config.folds, int(unique_groups.size()));

  SelectionModel model;
  model.folds = k;

  std::map<std::size_t, double> mean_scores;
  if (k >= 2) {
    const auto folds = kfold_plan(unique_groups, k, seed);
    std::map<std::size_t, double> score_sum;
    std::map<std::size_t, int> score_count;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::set<std::string> test_set(folds[f].test_subjects.begin(),
                                     folds[f].test_subjects.end());
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t r = 0; r < X.rows; ++r)
        (test_set.count(groups[r]) ? test_rows : train_rows).push_back(r);
      const auto fold_result =
          run_elimination(X, y, train_rows, test_rows, n_classes, config,
                          Rng::mix(seed, 77 + f));
      for (const auto& [size, score] : fold_result.score_by_size) {
        score_sum[size] += score;
        ++score_count[size];
      }
    }
    for (const auto& [size, sum] : score_sum) mean_scores[size] = sum / score_count[size];
  } else {
    // too few groups to cross-validate: fall back to in-sample scoring
    std::vector<std::size_t> all(X.rows);
    std::iota(all.begin(), all.end(), 0);
    const auto result = run_elimination(X, y, all, all, n_classes, config, seed);
    mean_scores = result.score_by_size;
  }

  std::size_t best_size = 0;
  double best_score = -1.0;
  for (const auto& [size, score] : mean_scores) {  // ascending size: ties keep fewer
    model.cv_curve.emplace_back(size, score);
    if (score > best_score + 1e-12) {
      best_score = score;
      best_size = size;
    }
  }

  // final elimination over all rows down to the chosen size
  std::vector<std::size_t> all(X.rows);
  std::iota(all.begin(), all.end(), 0);
  const auto final_path =
      run_elimination(X, y, all, {}, n_classes, config, Rng::mix(seed, 9999));
  const auto it = final_path.active_by_size.find(best_size);
  if (it == final_path.active_by_size.end())
    raise(ErrorCode::Internal, "elimination path missing the chosen size");
  model.selected = it->second;
  std::sort(model.selected.begin(), model.selected.end());
  return model;
}

PcaModel pca_fit(const Matrix& X, double variance_target, bool standardize) {
  if (X.rows < 2) raise(ErrorCode::EmptyInput, "PCA needs at least 2 rows");
  const std::size_t d = X.cols;

  PcaModel model;
  model.dim = d;
  model.variance_target = variance_target;
  model.standardized = standardize;
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 1.0);

  for (std::size_t r = 0; r < X.rows; ++r)
    for (std::size_t c = 0; c < d; ++c) model.mean[c] += X.at(r, c);
  for (double& m : model.mean) m /= double(X.rows);

  if (standardize) {
    std::vector<double> var(d, 0.0);
    for (std::size_t r = 0; r < X.rows; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double z = X.at(r, c) - model.mean[c];
        var[c] += z * z;
      }
    for (std::size_t c = 0; c < d; ++c) {
      const double s = std::sqrt(var[c] / double(X.rows));
      model.scale[c] = s > 0 ? s : 1.0;
    }
  }

  Eigen::MatrixXd z(X.rows, d);
  for (std::size_t r = 0; r < X.rows; ++r)
    for (std::size_t c = 0; c < d; ++c)
      z(long(r), long(c)) = (X.at(r, c) - model.mean[c]) / model.scale[c];
  const Eigen::MatrixXd cov = (z.transpose() * z) / double(X.rows);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    raise(ErrorCode::Internal, "eigendecomposition failed");

  // Eigen returns ascending eigenvalues; store them descending.
  model.eigenvalues.resize(d);
  model.components.assign(d * d, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const long src = long(d - 1 - i);
    model.eigenvalues[i] = std::max(0.0, solver.eigenvalues()(src));
    total += model.eigenvalues[i];
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    // deterministic sign: first entry of meaningful magnitude is positive
    for (long j = 0; j < v.size(); ++j) {
      if (std::abs(v(j)) > 1e-12) {
        if (v(j) < 0) v = -v;
        break;
      }
    }
    for (std::size_t c = 0; c < d; ++c) model.components[i * d + c] = v(long(c));
  }
  if (total <= 1e-300) raise(ErrorCode::RankZero, "all rows identical");

  double cum = 0.0;
  model.retained = d;
  for (std::size_t i = 0; i < d; ++i) {
    cum += model.eigenvalues[i];
    if (cum / total >= variance_target) {
      model.retained = i + 1;
      break;
    }
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& X) {
  if (X.cols != model.dim)
    raise(ErrorCode::DimensionMismatch,
          "PCA fitted on " + std::to_string(model.dim) + " columns, got " +
              std::to_string(X.cols));
  Matrix out(X.rows, model.retained);
  for (std::size_t r = 0; r < X.rows; ++r) {
    for (std::size_t k = 0; k < model.retained; ++k) {
      double acc = 0.0;
      const double* comp = model.components.data() + k * model.dim;
      for (std::size_t c = 0; c < model.dim; ++c)
        acc += comp[c] * (X.at(r, c) - model.mean[c]) / model.scale[c];
      out.at(r, k) = acc;
    }
  }
  return out;
}

void write_cv_curve_csv(const SelectionModel& model,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "n_features,mean_macro_f1\n";
  for (const auto& [size, score] : model.cv_curve) out << size << ',' << score << '\n';
}

}  // namespace somno
