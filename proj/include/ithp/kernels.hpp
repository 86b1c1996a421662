#pragma once

#include <span>

#include "ithp/matrix.hpp"

// Batched dense kernels. The OpenMP versions parallelize over independent
// output rows; every output element keeps the same inner summation order as
// the serial reference, so the two paths agree bit for bit and training stays
// deterministic under any thread count.
namespace ithp::kernels {

// out = a * b^T   (a: m x k, b: n x k -> m x n)
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * b     (a: m x k, b: k x n -> m x n)
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);
// out = a^T * b   (a: k x m, b: k x n -> m x n)
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);

// m[i, :] += v
void add_row_inplace(Matrix& m, std::span<const double> v);
// out[j] = sum_i m(i, j)
void col_sums(const Matrix& m, std::span<double> out);

enum class Activation { relu, tanh };

Matrix activation_forward(Activation kind, const Matrix& in);
// grad_in = grad_out * act'(pre)
Matrix activation_backward(Activation kind, const Matrix& pre, const Matrix& grad_out);

// Plain single-threaded reference implementations, kept for testing and for
// the kernel benchmark.
namespace serial {
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
}  // namespace serial

}  // namespace ithp::kernels
