#include <algorithm>
#include <cmath>
#include <list>
#include <numeric>
#include <unordered_map>

#include "somno/error.hpp"
#include "somno/model.hpp"

namespace somno {

namespace {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double dist = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    dist += d * d;
  }
  return std::exp(-gamma * dist);
}

// Sequential minimal optimization for one soft-margin binary subproblem.
// Platt's two-heuristic working-set selection with a full error cache and an
// LRU kernel-row cache. Stops when no KKT violation exceeds `tol` or the
// kernel-evaluation budget runs out.
class SmoSolver {
 public:
  SmoSolver(const Matrix& X, std::span<const std::size_t> rows,
            std::span<const signed char> y, std::span<const double> c_i,
            double gamma, double tol, std::uint64_t budget, std::size_t cache_rows)
      : X_(X), rows_(rows), y_(y), c_(c_i), gamma_(gamma), tol_(tol),
        budget_(budget), cache_capacity_(std::max<std::size_t>(2, cache_rows)) {
    const std::size_t n = rows_.size();
    alpha_.assign(n, 0.0);
    error_.resize(n);
    for (std::size_t i = 0; i < n; ++i) error_[i] = -double(y_[i]);  // f = 0 initially
  }

  void solve() {
    const std::size_t n = rows_.size();
    bool examine_all = true;
    std::size_t changed = 0;
    const std::uint64_t max_rounds = 64 + 32 * std::uint64_t(n);
    std::uint64_t rounds = 0;
    do {
      changed = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!examine_all && !is_free(i)) continue;
        changed += examine(i);
        if (out_of_budget()) return;
      }
      if (examine_all)
        examine_all = false;
      else if (changed == 0)
        examine_all = true;
    } while ((changed > 0 || examine_all) && ++rounds < max_rounds);
  }

  double bias() const { return bias_; }
  const std::vector<double>& alpha() const { return alpha_; }
  std::uint64_t kernel_evals() const { return kernel_evals_; }

 private:
  bool is_free(std::size_t i) const {
    return alpha_[i] > 0.0 && alpha_[i] < c_[i];
  }
  bool out_of_budget() const { return kernel_evals_ >= budget_; }

  const std::vector<double>& kernel_row(std::size_t i) {
    auto it = cache_index_.find(i);
    if (it != cache_index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
    if (cache_index_.size() >= cache_capacity_) {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      cache_index_.erase(victim);
    }
    lru_.push_front(i);
    auto& slot = cache_index_[i];
    slot.second = lru_.begin();
    slot.first.resize(rows_.size());
    const auto xi = X_.row(rows_[i]);
    for (std::size_t j = 0; j < rows_.size(); ++j)
      slot.first[j] = rbf_kernel(xi, X_.row(rows_[j]), gamma_);
    kernel_evals_ += rows_.size();
    return slot.first;
  }

  int examine(std::size_t i2) {
    const double y2 = double(y_[i2]);
    const double e2 = error_[i2];
    const double r2 = e2 * y2;
    const bool violated = (r2 < -tol_ && alpha_[i2] < c_[i2]) ||
                          (r2 > tol_ && alpha_[i2] > 0.0);
    if (!violated) return 0;

    const std::size_t n = rows_.size();
    // heuristic 1: maximize |E1 - E2| over free multipliers
    std::size_t best = n;
    double best_gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_free(i)) continue;
      const double gap = std::abs(error_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n && take_step(best, i2)) return 1;

    // heuristic 2: deterministic rotation over free, then all
    const std::size_t start = rotation_++ % n;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = (start + k) % n;
      if (!is_free(i)) continue;
      if (out_of_budget()) return 0;
      if (take_step(i, i2)) return 1;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = (start + k) % n;
      if (out_of_budget()) return 0;
      if (take_step(i, i2)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double y1 = double(y_[i1]), y2 = double(y_[i2]);
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double e1 = error_[i1], e2 = error_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_[i2], c_[i1] + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c_[i1]);
      hi = std::min(c_[i2], a1 + a2);
    }
    if (lo >= hi) return false;

    const auto& row1 = kernel_row(i1);
    const double k11 = row1[i1], k12 = row1[i2];
    const auto& row2 = kernel_row(i2);
    const double k22 = row2[i2];
    const double eta = k11 + k22 - 2.0 * k12;
    if (eta <= 0.0) return false;  // duplicate points under an RBF kernel

    double a2_new = a2 + y2 * (e1 - e2) / eta;
    a2_new = std::clamp(a2_new, lo, hi);
    if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
    const double a1_new = a1 + s * (a2 - a2_new);

    const double da1 = a1_new - a1;
    const double da2 = a2_new - a2;
    const double b1 = bias_ - e1 - y1 * da1 * k11 - y2 * da2 * k12;
    const double b2 = bias_ - e2 - y1 * da1 * k12 - y2 * da2 * k22;
    double bias_new;
    if (a1_new > 0.0 && a1_new < c_[i1])
      bias_new = b1;
    else if (a2_new > 0.0 && a2_new < c_[i2])
      bias_new = b2;
    else
      bias_new = 0.5 * (b1 + b2);
    const double db = bias_new - bias_;

    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    bias_ = bias_new;
    for (std::size_t i = 0; i < rows_.size(); ++i)
      error_[i] += y1 * da1 * row1[i] + y2 * da2 * row2[i] + db;
    return true;
  }

  const Matrix& X_;
  std::span<const std::size_t> rows_;
  std::span<const signed char> y_;
  std::span<const double> c_;
  const double gamma_;
  const double tol_;
  const std::uint64_t budget_;
  std::uint64_t kernel_evals_ = 0;
  std::size_t rotation_ = 0;

  std::vector<double> alpha_;
  std::vector<double> error_;  // E_i = f(x_i) - y_i
  double bias_ = 0.0;

  const std::size_t cache_capacity_;
  std::unordered_map<std::size_t,
                     std::pair<std::vector<double>, std::list<std::size_t>::iterator>>
      cache_index_;
  std::list<std::size_t> lru_;
};

BinarySvm pack_solution(const Matrix& X, std::span<const std::size_t> rows,
                        std::span<const signed char> y, const SmoSolver& solver) {
  BinarySvm out;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (solver.alpha()[i] > 1e-12) kept.push_back(i);
  out.support_vectors = Matrix(kept.size(), X.cols);
  out.coef.resize(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const std::size_t i = kept[j];
    const auto src = X.row(rows[i]);
    std::copy(src.begin(), src.end(), out.support_vectors.row(j).begin());
    out.coef[j] = solver.alpha()[i] * double(y[i]);
  }
  out.bias = solver.bias();
  return out;
}

// Platt sigmoid fit (the Lin-Lin-Weng robust Newton variant); maps decision
// values to P(class | f) = 1 / (1 + exp(A f + B)).
std::pair<double, double> fit_platt_sigmoid(std::span<const double> decisions,
                                            std::span<const signed char> labels) {
  const std::size_t n = decisions.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (auto l : labels) (l > 0 ? prior1 : prior0) += 1.0;

  const double hi_t = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_t = 1.0 / (prior0 + 2.0);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] > 0 ? hi_t : lo_t;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

  auto objective = [&](double pa, double pb) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = pa * decisions[i] + pb;
      if (f >= 0)
        obj += target[i] * f + std::log1p(std::exp(-f));
      else
        obj += (target[i] - 1.0) * f + std::log1p(std::exp(f));
    }
    return obj;
  };

  double obj = objective(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = a * decisions[i] + b;
      double p, q;
      if (f >= 0) {
        const double e = std::exp(-f);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(f);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = target[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double grad_step = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= 1e-10) {
      const double new_obj = objective(a + step * da, b + step * db);
      if (new_obj < obj + 1e-4 * step * grad_step) {
        a += step * da;
        b += step * db;
        obj = new_obj;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
  return {a, b};
}

}  // namespace

double svm_decision_value(const BinarySvm& svm, double gamma,
                          std::span<const double> x) {
  double f = svm.bias;
  for (std::size_t j = 0; j < svm.coef.size(); ++j)
    f += svm.coef[j] * rbf_kernel(svm.support_vectors.row(j), x, gamma);
  return f;
}

SvmModel fit_svm_ovr(const SvmConfig& config, const Matrix& X,
                     std::span<const int> y, std::span<const double> weights,
                     int n_classes, std::uint64_t seed) {
  const std::size_t n = X.rows;
  SvmModel model;
  if (config.gamma > 0) {
    model.gamma = config.gamma;
  } else {
    // 1 / (d * var) with the variance of the flattened matrix
    double mean = 0.0;
    for (double v : X.values) mean += v;
    mean /= double(X.values.size());
    double var = 0.0;
    for (double v : X.values) var += (v - mean) * (v - mean);
    var /= double(X.values.size());
    model.gamma = var > 0 ? 1.0 / (double(X.cols) * var) : 1.0;
  }
  model.per_class.resize(std::size_t(n_classes));

  const std::size_t cache_rows =
      std::max<std::size_t>(64, std::size_t(config.cache_mb) * 1024 * 1024 / (8 * std::max<std::size_t>(1, n)));

#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < n_classes; ++c) {
    std::vector<signed char> labels(n);
    std::vector<double> c_i(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = y[i] == c ? 1 : -1;
      c_i[i] = config.c * weights[i];
    }

    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    // Out-of-fold decision values for calibration: stratified deterministic
    // folds so each training part keeps both labels.
    std::vector<double> cv_decisions(n, 0.0);
    bool have_cv = false;
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (labels[i] > 0 ? pos : neg).push_back(i);
    const int folds = config.platt_folds;
    if (folds >= 2 && pos.size() >= std::size_t(folds) && neg.size() >= std::size_t(folds)) {
      Rng rng(Rng::mix(seed, 1000 + std::uint64_t(c)));
      rng.shuffle(pos);
      rng.shuffle(neg);
      std::vector<int> fold_of(n, 0);
      for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = int(i % std::size_t(folds));
      for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = int(i % std::size_t(folds));
      for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_rows, held_rows;
        for (std::size_t i = 0; i < n; ++i)
          (fold_of[i] == f ? held_rows : train_rows).push_back(i);
        std::vector<signed char> train_y(train_rows.size());
        std::vector<double> train_c(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
          train_y[i] = labels[train_rows[i]];
          train_c[i] = c_i[train_rows[i]];
        }
        SmoSolver solver(X, train_rows, train_y, train_c, model.gamma, config.tol,
                         config.max_kernel_evals, cache_rows);
        solver.solve();
        BinarySvm part = pack_solution(X, train_rows, train_y, solver);
        for (std::size_t i : held_rows)
          cv_decisions[i] = svm_decision_value(part, model.gamma, X.row(i));
      }
      have_cv = true;
    }

    SmoSolver solver(X, all_rows, labels, c_i, model.gamma, config.tol,
                     config.max_kernel_evals, cache_rows);
    solver.solve();
    BinarySvm full = pack_solution(X, all_rows, labels, solver);

    if (!have_cv) {
      // rare-class fallback: calibrate on the training decision values
      for (std::size_t i = 0; i < n; ++i)
        cv_decisions[i] = svm_decision_value(full, model.gamma, X.row(i));
    }
    const auto [pa, pb] = fit_platt_sigmoid(cv_decisions, labels);
    full.platt_a = pa;
    full.platt_b = pb;
    model.per_class[std::size_t(c)] = std::move(full);
  }
  return model;
}

Matrix svm_predict_proba(const SvmModel& model, const Matrix& X) {
  const std::size_t k = model.per_class.size();
  Matrix proba(X.rows, k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < std::ptrdiff_t(X.rows); ++r) {
    auto row = proba.row(std::size_t(r));
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double f =
          svm_decision_value(model.per_class[c], model.gamma, X.row(std::size_t(r)));
      const double arg = model.per_class[c].platt_a * f + model.per_class[c].platt_b;
      const double p = arg >= 0 ? std::exp(-arg) / (1.0 + std::exp(-arg))
                                : 1.0 / (1.0 + std::exp(arg));
      row[c] = p;
      total += p;
    }
    if (total > 1e-12)
      for (double& v : row) v /= total;
    else
      for (double& v : row) v = 1.0 / double(k);
  }
  return proba;
}

}  // namespace somno
