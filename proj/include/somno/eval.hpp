#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "somno/types.hpp"

namespace somno {

struct SplitPlan {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::array<double, 3> ratios{0.70, 0.15, 0.15};
  std::uint64_t seed = 0;
};

// Shuffles subjects by seed, then takes round(r_test*N) for test,
// round(r_val*N) for validation and the remainder for training.
SplitPlan subject_split(std::vector<std::string> subjects,
                        std::array<double, 3> ratios, std::uint64_t seed);

struct Fold {
  std::vector<std::string> train_subjects;
  std::vector<std::string> test_subjects;
};

// Near-equal subject partition; fold i tests group i. With N = qk + r the
// first r groups hold q+1 subjects.
std::vector<Fold> kfold_plan(std::vector<std::string> subjects, int k,
                             std::uint64_t seed);

struct ConfusionMatrix {
  std::vector<SleepStage> classes;
  std::vector<long> counts;  // row-major, rows = true

  long at(std::size_t t, std::size_t p) const { return counts[t * classes.size() + p]; }
  long total() const;
};

ConfusionMatrix confusion_matrix(std::span<const SleepStage> y_true,
                                 std::span<const SleepStage> y_pred,
                                 const std::vector<SleepStage>& classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::string fold_id;
  double accuracy = 0.0;
  double macro_f1 = 0.0;  // averaged over classes present in the truth
  double kappa = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix cm;
};

MetricsReport compute_metrics(const ConfusionMatrix& cm);

struct SignificanceReport {
  std::string test_id;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_pairs = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double mean_diff = 0.0;
};

// Two-sided paired t test; the p value comes from the Student t CDF.
// All-equal pairs give p = 1; zero-variance nonzero differences give the
// documented p = 0 sentinel with an infinite statistic.
SignificanceReport paired_t_test(std::span<const double> a, std::span<const double> b);

// Two-sided Wilcoxon signed-rank test with average ranks for ties.
// Exact null enumeration for n <= 20 after dropping zero differences,
// normal approximation with tie correction above.
SignificanceReport wilcoxon_signed_rank(std::span<const double> a,
                                        std::span<const double> b);

}  // namespace somno
