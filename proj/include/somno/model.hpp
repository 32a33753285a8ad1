#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "somno/cart.hpp"
#include "somno/matrix.hpp"
#include "somno/types.hpp"

namespace somno {

enum class ClassifierKind { RandomForest, GradientBoosting, SvmRbf };
enum class ClassWeighting { None, InverseFrequency };

const char* classifier_kind_name(ClassifierKind kind);
ClassifierKind classifier_kind_from_name(const std::string& name);

struct RandomForestConfig {
  int n_trees = 300;
  int max_depth = 0;  // 0 = unlimited
  int mtry = 0;       // 0 = floor(sqrt(d))
  double max_samples = 1.0;
  int min_samples_leaf = 1;
};

struct GradientBoostingConfig {
  int n_stages = 200;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_leaf = 1;
};

struct SvmConfig {
  double c = 1.0;
  double gamma = 0.0;  // 0 = 1 / (d * var(X))
  double tol = 1e-3;   // KKT violation tolerance
  // Hard stop on computed kernel entries per binary solve; the KKT criterion
  // is expected to fire long before this on desk-scale data.
  std::uint64_t max_kernel_evals = 2'000'000'000ULL;
  int cache_mb = 256;
  int platt_folds = 3;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::RandomForest;
  RandomForestConfig rf;
  GradientBoostingConfig gb;
  SvmConfig svm;
  ClassWeighting weighting = ClassWeighting::None;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError on out-of-range hyperparameters
};

struct RandomForestModel {
  std::vector<Tree> trees;
  int n_classes = 0;
  std::vector<double> importances;  // mean normalized impurity decrease
};

struct GbModel {
  std::vector<double> init_scores;        // per-class log prior
  std::vector<std::vector<Tree>> stages;  // [stage][class]
  std::vector<double> train_loss;         // deviance after 0..n_stages stages
  int n_classes = 0;
  double learning_rate = 0.1;
};

struct BinarySvm {
  Matrix support_vectors;
  std::vector<double> coef;  // alpha_i * y_i per support vector
  double bias = 0.0;
  double platt_a = 0.0;
  double platt_b = 0.0;
};

struct SvmModel {
  std::vector<BinarySvm> per_class;  // one-vs-rest, aligned with class list
  double gamma = 0.0;
};

struct TrainedClassifier {
  ClassifierKind kind = ClassifierKind::RandomForest;
  std::vector<SleepStage> classes;  // canonical stage order, as seen in training
  std::size_t n_features = 0;
  ClassifierSpec spec;

  RandomForestModel rf;
  GbModel gb;
  SvmModel svm;

  bool single_class() const { return classes.size() == 1; }
};

// Per-sample weights for the configured class weighting (inverse frequency:
// w_c = N / (K * n_c)).
std::vector<double> class_weights(std::span<const int> y, int n_classes,
                                  ClassWeighting weighting);

TrainedClassifier train_classifier(const ClassifierSpec& spec, const Matrix& X,
                                   std::span<const SleepStage> y);

// rows x classes, each row non-negative and summing to 1.
Matrix predict_proba(const TrainedClassifier& model, const Matrix& X);

std::vector<SleepStage> labels_from_proba(const Matrix& proba,
                                          const std::vector<SleepStage>& classes);

struct EnsembleModel {
  std::vector<TrainedClassifier> members;
  std::vector<double> weights;  // non-negative, normalized to sum 1
};

// Weighted mean of member probabilities; argmax ties resolve toward the
// earlier class in canonical stage order.
std::pair<std::vector<SleepStage>, Matrix> ensemble_soft_vote(
    const EnsembleModel& ensemble, const Matrix& X);

// Internals shared with the tests and the bench tool.
Matrix rf_predict_proba(const RandomForestModel& model, const Matrix& X);
Matrix gb_predict_proba(const GbModel& model, const Matrix& X);
Matrix svm_predict_proba(const SvmModel& model, const Matrix& X);
double svm_decision_value(const BinarySvm& svm, double gamma,
                          std::span<const double> x);

RandomForestModel fit_random_forest(const RandomForestConfig& config,
                                    const Matrix& X, std::span<const int> y,
                                    std::span<const double> weights,
                                    int n_classes, std::uint64_t seed,
                                    bool parallel = true);
GbModel fit_gradient_boosting(const GradientBoostingConfig& config,
                              const Matrix& X, std::span<const int> y,
                              std::span<const double> weights, int n_classes,
                              std::uint64_t seed);
SvmModel fit_svm_ovr(const SvmConfig& config, const Matrix& X,
                     std::span<const int> y, std::span<const double> weights,
                     int n_classes, std::uint64_t seed);

}  // namespace somno
