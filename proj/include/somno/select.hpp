#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "somno/matrix.hpp"
#include "somno/model.hpp"

namespace somno {

struct SelectionModel {
  std::vector<std::size_t> selected;  // ascending column indices
  // (feature count, mean out-of-fold macro-F1), one entry per candidate size
  std::vector<std::pair<std::size_t, double>> cv_curve;
  std::string criterion = "rf_impurity";
  int folds = 0;
};

struct RfecvConfig {
  int step = 1;
  int folds = 5;
  RandomForestConfig estimator{.n_trees = 80, .max_depth = 12, .max_samples = 0.35};
};

// Recursive feature elimination scored out-of-fold on subject-grouped folds.
// Each round drops the `step` features with the lowest random-forest impurity
// importance; the retained size maximizes mean CV macro-F1 (ties toward
// fewer features). The final elimination runs on all provided rows.
SelectionModel rfecv_select(const Matrix& X, std::span<const int> y,
                            std::span<const std::string> groups, int n_classes,
                            const RfecvConfig& config, std::uint64_t seed);

struct PcaModel {
  std::vector<double> mean;         // per input column
  std::vector<double> scale;        // 1.0 when standardize was off
  bool standardized = false;
  std::vector<double> components;   // row-major, d x d, orthonormal rows
  std::vector<double> eigenvalues;  // descending
  std::size_t dim = 0;
  std::size_t retained = 0;         // k
  double variance_target = 0.95;
};

// Eigendecomposition of the (population) covariance of centered, optionally
// standardized columns. k is the smallest count reaching the variance target.
// Component signs follow the first-nonzero-positive convention.
PcaModel pca_fit(const Matrix& X, double variance_target, bool standardize = true);

// (X - mean) / scale projected onto the first k components.
Matrix pca_transform(const PcaModel& model, const Matrix& X);

void write_cv_curve_csv(const SelectionModel& model,
                        const std::filesystem::path& path);

}  // namespace somno
