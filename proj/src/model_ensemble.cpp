#include <algorithm>
#include <cmath>

#include "somno/error.hpp"
#include "somno/model.hpp"

namespace somno {

const char* classifier_kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::RandomForest: return "random_forest";
    case ClassifierKind::GradientBoosting: return "gradient_boosting";
    case ClassifierKind::SvmRbf: return "svm_rbf";
  }
  return "?";
}

ClassifierKind classifier_kind_from_name(const std::string& name) {
  if (name == "random_forest" || name == "rf") return ClassifierKind::RandomForest;
  if (name == "gradient_boosting" || name == "gb") return ClassifierKind::GradientBoosting;
  if (name == "svm_rbf" || name == "svm") return ClassifierKind::SvmRbf;
  raise(ErrorCode::ConfigError, "unknown classifier kind '" + name + "'");
}

void ClassifierSpec::validate() const {
  if (rf.n_trees < 1) raise(ErrorCode::ConfigError, "random forest needs >= 1 tree");
  if (rf.max_samples <= 0.0 || rf.max_samples > 1.0)
    raise(ErrorCode::ConfigError, "rf max_samples must be in (0, 1]");
  if (gb.n_stages < 1) raise(ErrorCode::ConfigError, "boosting needs >= 1 stage");
  if (gb.learning_rate <= 0.0 || gb.learning_rate > 1.0)
    raise(ErrorCode::ConfigError, "learning_rate must be in (0, 1]");
  if (gb.max_depth < 1) raise(ErrorCode::ConfigError, "boosting depth must be >= 1");
  if (svm.c <= 0.0) raise(ErrorCode::ConfigError, "svm C must be positive");
  if (svm.gamma < 0.0) raise(ErrorCode::ConfigError, "svm gamma must be >= 0");
}

std::vector<double> class_weights(std::span<const int> y, int n_classes,
                                  ClassWeighting weighting) {
  std::vector<double> weights(y.size(), 1.0);
  if (weighting == ClassWeighting::None) return weights;
  std::vector<double> counts(std::size_t(n_classes), 0.0);
  for (int label : y) counts[std::size_t(label)] += 1.0;
  const double n = double(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double c = counts[std::size_t(y[i])];
    weights[i] = n / (double(n_classes) * c);
  }
  return weights;
}

TrainedClassifier train_classifier(const ClassifierSpec& spec, const Matrix& X,
                                   std::span<const SleepStage> y) {
  spec.validate();
  if (X.rows == 0 || X.rows != y.size())
    raise(ErrorCode::DimensionMismatch, "label count does not match row count");
  for (double v : X.values)
    if (!std::isfinite(v)) raise(ErrorCode::NonFiniteInput, "training matrix holds a non-finite value");

  TrainedClassifier model;
  model.kind = spec.kind;
  model.spec = spec;
  model.n_features = X.cols;

  // canonical stage order keeps class lists stable across members
  for (SleepStage s : kScoredStages)
    if (std::find(y.begin(), y.end(), s) != y.end()) model.classes.push_back(s);
  if (model.classes.empty())
    raise(ErrorCode::DegenerateLabels, "no scored stages in the label vector");
  if (model.single_class()) return model;  // constant predictor

  std::vector<int> encoded(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto it = std::find(model.classes.begin(), model.classes.end(), y[i]);
    encoded[i] = int(it - model.classes.begin());
  }
  const int k = int(model.classes.size());
  const auto weights = class_weights(encoded, k, spec.weighting);

  switch (spec.kind) {
    case ClassifierKind::RandomForest:
      model.rf = fit_random_forest(spec.rf, X, encoded, weights, k, spec.seed);
      break;
    case ClassifierKind::GradientBoosting:
      model.gb = fit_gradient_boosting(spec.gb, X, encoded, weights, k, spec.seed);
      break;
    case ClassifierKind::SvmRbf:
      model.svm = fit_svm_ovr(spec.svm, X, encoded, weights, k, spec.seed);
      break;
  }
  return model;
}

Matrix predict_proba(const TrainedClassifier& model, const Matrix& X) {
  if (X.cols != model.n_features)
    raise(ErrorCode::DimensionMismatch,
          "expected " + std::to_string(model.n_features) + " features, got " +
              std::to_string(X.cols));
  if (model.single_class()) {
    Matrix proba(X.rows, 1);
    std::fill(proba.values.begin(), proba.values.end(), 1.0);
    return proba;
  }
  switch (model.kind) {
    case ClassifierKind::RandomForest: return rf_predict_proba(model.rf, X);
    case ClassifierKind::GradientBoosting: return gb_predict_proba(model.gb, X);
    case ClassifierKind::SvmRbf: return svm_predict_proba(model.svm, X);
  }
  raise(ErrorCode::Internal, "unreachable classifier kind");
}

std::vector<SleepStage> labels_from_proba(const Matrix& proba,
                                          const std::vector<SleepStage>& classes) {
  std::vector<SleepStage> labels(proba.rows);
  for (std::size_t r = 0; r < proba.rows; ++r) {
    const auto row = proba.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;  // ties keep the earlier stage
    labels[r] = classes[best];
  }
  return labels;
}

std::pair<std::vector<SleepStage>, Matrix> ensemble_soft_vote(
    const EnsembleModel& ensemble, const Matrix& X) {
  if (ensemble.members.size() < 2)
    raise(ErrorCode::ClassListMismatch, "an ensemble needs at least 2 members");
  const auto& classes = ensemble.members.front().classes;
  for (const auto& m : ensemble.members)
    if (m.classes != classes)
      raise(ErrorCode::ClassListMismatch, "members trained on different class lists");

  double total_w = 0.0;
  for (double w : ensemble.weights) {
    if (w < 0) raise(ErrorCode::ConfigError, "ensemble weights must be non-negative");
    total_w += w;
  }
  if (ensemble.weights.size() != ensemble.members.size() || total_w <= 0)
    raise(ErrorCode::ConfigError, "one non-negative weight per member required");

  Matrix proba(X.rows, classes.size());
  for (std::size_t m = 0; m < ensemble.members.size(); ++m) {
    const Matrix part = predict_proba(ensemble.members[m], X);
    const double w = ensemble.weights[m] / total_w;
    for (std::size_t i = 0; i < proba.values.size(); ++i)
      proba.values[i] += w * part.values[i];
  }
  return {labels_from_proba(proba, classes), std::move(proba)};
}

}  // namespace somno
