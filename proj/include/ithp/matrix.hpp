#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ithp {

// Dense row-major matrix of doubles; the carrier for modality batches,
// latent batches and layer weights.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Throws std::invalid_argument naming `what` on mismatch.
void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what);
void require_cols(const Matrix& m, std::size_t cols, const std::string& what);

bool all_finite(const Matrix& m);

}  // namespace ithp
