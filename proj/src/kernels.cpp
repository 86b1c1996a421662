#include "ithp/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace ithp::kernels {

namespace {

void check_matmul(std::size_t inner_a, std::size_t inner_b, const char* name) {
  if (inner_a != inner_b) {
    throw std::invalid_argument(std::string(name) + ": inner dimensions " +
                                std::to_string(inner_a) + " vs " + std::to_string(inner_b));
  }
}

// Small products are not worth a team fork.
constexpr std::size_t kParallelThreshold = 16 * 1024;

}  // namespace

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a.cols, b.cols, "matmul_nt");
  out = Matrix(a.rows, b.rows);
  const std::size_t k = a.cols;
  const long long m = static_cast<long long>(a.rows);
  const long long n = static_cast<long long>(b.rows);
#pragma omp parallel for schedule(static) if (a.rows * b.rows * k > kParallelThreshold)
  for (long long i = 0; i < m; ++i) {
    const double* ai = a.row(static_cast<std::size_t>(i));
    double* oi = out.row(static_cast<std::size_t>(i));
    for (long long j = 0; j < n; ++j) {
      const double* bj = b.row(static_cast<std::size_t>(j));
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
      oi[j] = acc;
    }
  }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a.cols, b.rows, "matmul_nn");
  out = Matrix(a.rows, b.cols);
  const std::size_t k = a.cols;
  const long long m = static_cast<long long>(a.rows);
#pragma omp parallel for schedule(static) if (a.rows * b.cols * k > kParallelThreshold)
  for (long long i = 0; i < m; ++i) {
    const double* ai = a.row(static_cast<std::size_t>(i));
    double* oi = out.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += ai[l] * b(l, j);
      oi[j] = acc;
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a.rows, b.rows, "matmul_tn");
  out = Matrix(a.cols, b.cols);
  const std::size_t k = a.rows;
  const long long m = static_cast<long long>(a.cols);
#pragma omp parallel for schedule(static) if (a.cols * b.cols * k > kParallelThreshold)
  for (long long i = 0; i < m; ++i) {
    double* oi = out.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += a(l, i) * b(l, j);
      oi[j] = acc;
    }
  }
}

void add_row_inplace(Matrix& m, std::span<const double> v) {
  if (v.size() != m.cols) {
    throw std::invalid_argument("add_row_inplace: vector length " + std::to_string(v.size()) +
                                " vs " + std::to_string(m.cols) + " columns");
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* ri = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) ri[j] += v[j];
  }
}

void col_sums(const Matrix& m, std::span<double> out) {
  if (out.size() != m.cols) {
    throw std::invalid_argument("col_sums: output length mismatch");
  }
  for (std::size_t j = 0; j < m.cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* ri = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += ri[j];
  }
}

Matrix activation_forward(Activation kind, const Matrix& in) {
  Matrix out(in.rows, in.cols);
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > 0.0 ? in.data[i] : 0.0;
  } else {
    for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = std::tanh(in.data[i]);
  }
  return out;
}

Matrix activation_backward(Activation kind, const Matrix& pre, const Matrix& grad_out) {
  if (!pre.same_shape(grad_out)) {
    throw std::invalid_argument("activation_backward: shape mismatch");
  }
  Matrix grad_in(pre.rows, pre.cols);
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < pre.size(); ++i) {
      grad_in.data[i] = pre.data[i] > 0.0 ? grad_out.data[i] : 0.0;
    }
  } else {
    for (std::size_t i = 0; i < pre.size(); ++i) {
      const double t = std::tanh(pre.data[i]);
      grad_in.data[i] = grad_out.data[i] * (1.0 - t * t);
    }
  }
  return grad_in;
}

namespace serial {

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a.cols, b.cols, "serial::matmul_nt");
  out = Matrix(a.rows, b.rows);
  const std::size_t k = a.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
      oi[j] = acc;
    }
  }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a.cols, b.rows, "serial::matmul_nn");
  out = Matrix(a.rows, b.cols);
  const std::size_t k = a.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += ai[l] * b(l, j);
      oi[j] = acc;
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a.rows, b.rows, "serial::matmul_tn");
  out = Matrix(a.cols, b.cols);
  const std::size_t k = a.rows;
  for (std::size_t i = 0; i < a.cols; ++i) {
    double* oi = out.row(i);
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += a(l, i) * b(l, j);
      oi[j] = acc;
    }
  }
}

}  // namespace serial

}  // namespace ithp::kernels
