#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace somno {

// Dense row-major matrix used by the selection and model stages.
struct Matrix {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : values(r * c, 0.0), rows(r), cols(c) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }

  Matrix select_columns(std::span<const std::size_t> keep) const {
    Matrix out(rows, keep.size());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < keep.size(); ++j)
        out.at(r, j) = at(r, keep[j]);
    return out;
  }

  Matrix select_rows(std::span<const std::size_t> keep) const {
    Matrix out(keep.size(), cols);
    for (std::size_t i = 0; i < keep.size(); ++i)
      for (std::size_t c = 0; c < cols; ++c) out.at(i, c) = at(keep[i], c);
    return out;
  }
};

}  // namespace somno
