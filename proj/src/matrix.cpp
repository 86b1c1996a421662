#include "ithp/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace ithp {

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what) {
  if (m.rows != rows || m.cols != cols) {
    throw std::invalid_argument(what + ": expected " + std::to_string(rows) + "x" +
                                std::to_string(cols) + ", got " + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols));
  }
}

void require_cols(const Matrix& m, std::size_t cols, const std::string& what) {
  if (m.cols != cols) {
    throw std::invalid_argument(what + ": expected " + std::to_string(cols) + " columns, got " +
                                std::to_string(m.cols));
  }
}

bool all_finite(const Matrix& m) {
  for (double v : m.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace ithp
