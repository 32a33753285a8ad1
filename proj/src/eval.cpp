#include "somno/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "somno/error.hpp"
#include "somno/rng.hpp"
#include "somno/stats.hpp"

namespace somno {

SplitPlan subject_split(std::vector<std::string> subjects,
                        std::array<double, 3> ratios, std::uint64_t seed) {
  if (subjects.size() < 3)
    raise(ErrorCode::TooFewSubjects, "need at least 3 subjects, got " +
                                         std::to_string(subjects.size()));
  Rng rng(seed);
  rng.shuffle(subjects);

  const double n = double(subjects.size());
  const auto n_test = std::size_t(std::floor(ratios[2] * n + 0.5));
  const auto n_val = std::size_t(std::floor(ratios[1] * n + 0.5));
  if (n_test + n_val >= subjects.size())
    raise(ErrorCode::TooFewSubjects, "ratios leave no training subjects");

  SplitPlan plan;
  plan.ratios = ratios;
  plan.seed = seed;
  plan.test.assign(subjects.begin(), subjects.begin() + std::ptrdiff_t(n_test));
  plan.val.assign(subjects.begin() + std::ptrdiff_t(n_test),
                  subjects.begin() + std::ptrdiff_t(n_test + n_val));
  plan.train.assign(subjects.begin() + std::ptrdiff_t(n_test + n_val), subjects.end());
  return plan;
}

std::vector<Fold> kfold_plan(std::vector<std::string> subjects, int k,
                             std::uint64_t seed) {
  if (k < 2 || std::size_t(k) > subjects.size())
    raise(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " for " +
                                    std::to_string(subjects.size()) + " subjects");
  Rng rng(seed);
  rng.shuffle(subjects);

  const std::size_t base = subjects.size() / std::size_t(k);
  const std::size_t extra = subjects.size() % std::size_t(k);
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  std::size_t at = 0;
  for (std::size_t f = 0; f < std::size_t(k); ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].test_subjects.assign(subjects.begin() + std::ptrdiff_t(at),
                                  subjects.begin() + std::ptrdiff_t(at + size));
    at += size;
  }
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (f == g) continue;
      folds[f].train_subjects.insert(folds[f].train_subjects.end(),
                                     folds[g].test_subjects.begin(),
                                     folds[g].test_subjects.end());
    }
  }
  return folds;
}

long ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

ConfusionMatrix confusion_matrix(std::span<const SleepStage> y_true,
                                 std::span<const SleepStage> y_pred,
                                 const std::vector<SleepStage>& classes) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    raise(ErrorCode::EmptyInput, "label vectors empty or of unequal length");

  auto index_of = [&](SleepStage s) {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == s) return i;
    raise(ErrorCode::UnknownLabel, std::string("label '") + stage_name(s) +
                                       "' not in the class list");
  };

  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes.size() * classes.size(), 0);
  for (std::size_t i = 0; i < y_true.size(); ++i)
    ++cm.counts[index_of(y_true[i]) * classes.size() + index_of(y_pred[i])];
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes.size();
  const double total = double(cm.total());
  if (total <= 0) raise(ErrorCode::EmptyInput, "confusion matrix is empty");

  MetricsReport report;
  report.cm = cm;
  report.per_class.resize(k);

  std::vector<double> row_sum(k, 0.0), col_sum(k, 0.0);
  double diag = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t p = 0; p < k; ++p) {
      const double c = double(cm.at(t, p));
      row_sum[t] += c;
      col_sum[p] += c;
      if (t == p) diag += c;
    }
  }
  report.accuracy = diag / total;

  double f1_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics& m = report.per_class[c];
    const double tp = double(cm.at(c, c));
    m.precision = col_sum[c] > 0 ? tp / col_sum[c] : 0.0;
    m.recall = row_sum[c] > 0 ? tp / row_sum[c] : 0.0;
    m.f1 = (m.precision + m.recall) > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    if (row_sum[c] > 0) {
      f1_sum += m.f1;
      ++present;
    }
  }
  report.macro_f1 = present > 0 ? f1_sum / double(present) : 0.0;

  double p_e = 0.0;
  for (std::size_t c = 0; c < k; ++c) p_e += row_sum[c] * col_sum[c];
  p_e /= total * total;
  if (1.0 - p_e < 1e-12) {
    report.kappa = report.accuracy >= 1.0 - 1e-12 ? 1.0 : 0.0;
  } else {
    report.kappa = (report.accuracy - p_e) / (1.0 - p_e);
  }
  return report;
}

SignificanceReport paired_t_test(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size())
    raise(ErrorCode::FoldMismatch, "paired samples of unequal length");
  const std::size_t n = a.size();
  if (n < 2) raise(ErrorCode::TooFewPairs, "need at least 2 pairs");

  SignificanceReport rep;
  rep.test_id = "paired_t";
  rep.n_pairs = n;
  double mean_d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.mean_a += a[i];
    rep.mean_b += b[i];
    mean_d += a[i] - b[i];
  }
  rep.mean_a /= double(n);
  rep.mean_b /= double(n);
  mean_d /= double(n);
  rep.mean_diff = mean_d;

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean_d;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / double(n - 1));
  if (sd == 0.0) {
    if (mean_d == 0.0) {
      rep.statistic = 0.0;
      rep.p_value = 1.0;
    } else {
      // identical nonzero differences: certainty sentinel
      rep.statistic = mean_d > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
      rep.p_value = 0.0;
    }
    return rep;
  }
  rep.statistic = mean_d / (sd / std::sqrt(double(n)));
  rep.p_value = 2.0 * (1.0 - student_t_cdf(std::abs(rep.statistic), double(n - 1)));
  rep.p_value = std::clamp(rep.p_value, 0.0, 1.0);
  return rep;
}

SignificanceReport wilcoxon_signed_rank(std::span<const double> a,
                                        std::span<const double> b) {
  if (a.size() != b.size())
    raise(ErrorCode::FoldMismatch, "paired samples of unequal length");
  if (a.empty()) raise(ErrorCode::TooFewPairs, "empty samples");

  SignificanceReport rep;
  rep.test_id = "wilcoxon";
  for (std::size_t i = 0; i < a.size(); ++i) {
    rep.mean_a += a[i];
    rep.mean_b += b[i];
  }
  rep.mean_a /= double(a.size());
  rep.mean_b /= double(a.size());
  rep.mean_diff = rep.mean_a - rep.mean_b;

  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) {
    rep.n_pairs = 0;
    rep.p_value = 1.0;  // AllZeroDifferences
    return rep;
  }
  const std::size_t n = diffs.size();
  rep.n_pairs = n;

  // average ranks of |d|, doubled so ties stay integral
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(diffs[i]) < std::abs(diffs[j]);
  });
  std::vector<long> rank2(n, 0);
  std::vector<std::size_t> tie_sizes;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
    const long sum2 = long(i + 1 + j) * long(j - i);  // 2 * sum of ranks i+1..j
    const long avg2 = sum2 / long(j - i);
    for (std::size_t m = i; m < j; ++m) rank2[order[m]] = avg2;
    if (j - i > 1) tie_sizes.push_back(j - i);
    i = j;
  }

  long w_plus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0) w_plus2 += rank2[i];
  }
  const long w_minus2 = total2 - w_plus2;
  const long w2 = std::min(w_plus2, w_minus2);
  rep.statistic = double(w2) / 2.0;

  if (n <= 20) {
    // distribution of 2*W+ over all sign assignments via subset-sum counting
    std::vector<double> count(std::size_t(total2) + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (long s = total2; s >= rank2[i]; --s)
        count[std::size_t(s)] += count[std::size_t(s - rank2[i])];
    }
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total2; ++s) {
      if (s <= w2) lower += count[std::size_t(s)];
      if (s >= total2 - w2) upper += count[std::size_t(s)];
    }
    rep.p_value = std::min(1.0, (lower + upper) / std::pow(2.0, double(n)));
  } else {
    const double nd = double(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    double tie_term = 0.0;
    for (std::size_t t : tie_sizes) {
      const double td = double(t);
      tie_term += td * td * td - td;
    }
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    const double w = double(w2) / 2.0;
    const double z = (w - mean + 0.5) / std::sqrt(var);
    rep.p_value = std::clamp(2.0 * normal_cdf(z), 0.0, 1.0);
  }
  return rep;
}

}  // namespace somno
