#include <doctest.h>

#include <stdexcept>

#include <cstring>
#include <random>

#include "ithp/affine.hpp"
#include "ithp/kernels.hpp"
#include "test_util.hpp"

using namespace ithp;
using test_util::random_matrix;

namespace {

// Naive triple loop, structured differently from the kernels on purpose.
Matrix naive_matmul(const Matrix& a, const Matrix& b, bool transpose_a, bool transpose_b) {
  const std::size_t m = transpose_a ? a.cols : a.rows;
  const std::size_t k = transpose_a ? a.rows : a.cols;
  const std::size_t n = transpose_b ? b.rows : b.cols;
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double av = transpose_a ? a(l, i) : a(i, l);
        const double bv = transpose_b ? b(j, l) : b(l, j);
        acc += av * bv;
      }
      out(i, j) = acc;
    }
  }
  return out;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("matmul variants match the naive oracle and the serial reference bit for bit") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng() % 40;
    const std::size_t k = 1 + rng() % 40;
    const std::size_t n = 1 + rng() % 40;

    const Matrix a = random_matrix(m, k, rng);
    const Matrix bt = random_matrix(n, k, rng);
    const Matrix b = random_matrix(k, n, rng);
    const Matrix at = random_matrix(k, m, rng);

    Matrix omp_out, serial_out;
    kernels::matmul_nt(a, bt, omp_out);
    kernels::serial::matmul_nt(a, bt, serial_out);
    CHECK(bitwise_equal(omp_out, serial_out));
    const Matrix expect_nt = naive_matmul(a, bt, false, true);
    for (std::size_t i = 0; i < expect_nt.size(); ++i) {
      CHECK(omp_out.data[i] == doctest::Approx(expect_nt.data[i]).epsilon(1e-12));
    }

    kernels::matmul_nn(a, b, omp_out);
    kernels::serial::matmul_nn(a, b, serial_out);
    CHECK(bitwise_equal(omp_out, serial_out));
    const Matrix expect_nn = naive_matmul(a, b, false, false);
    for (std::size_t i = 0; i < expect_nn.size(); ++i) {
      CHECK(omp_out.data[i] == doctest::Approx(expect_nn.data[i]).epsilon(1e-12));
    }

    kernels::matmul_tn(at, b, omp_out);
    kernels::serial::matmul_tn(at, b, serial_out);
    CHECK(bitwise_equal(omp_out, serial_out));
    const Matrix expect_tn = naive_matmul(at, b, true, false);
    for (std::size_t i = 0; i < expect_tn.size(); ++i) {
      CHECK(omp_out.data[i] == doctest::Approx(expect_tn.data[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
  Matrix a(2, 3), b(4, 2), out;
  CHECK_THROWS_AS(kernels::matmul_nt(a, b, out), std::invalid_argument);
}

TEST_CASE("affine_forward identity case") {
  AffineLayer layer(2, 2);
  layer.w(0, 0) = 1.0;
  layer.w(1, 1) = 1.0;
  Matrix input(1, 2);
  input(0, 0) = 3.0;
  input(0, 1) = -1.0;
  const Matrix out = affine_forward(layer, input);
  CHECK(out(0, 0) == 3.0);
  CHECK(out(0, 1) == -1.0);
}

TEST_CASE("affine_forward worked 2x2 example") {
  AffineLayer layer(2, 2);
  layer.w(0, 0) = 1.0;
  layer.w(0, 1) = 2.0;
  layer.w(1, 0) = 0.0;
  layer.w(1, 1) = 1.0;
  layer.b = {1.0, 0.0};
  Matrix input(1, 2, 1.0);
  const Matrix out = affine_forward(layer, input);
  CHECK(out(0, 0) == doctest::Approx(4.0));
  CHECK(out(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("affine_forward replicates the bias on zero input") {
  std::mt19937_64 rng(3);
  AffineLayer layer(4, 3);
  layer.w = random_matrix(4, 3, rng);
  layer.b = {0.5, -1.0, 2.0, 0.25};
  const Matrix input(5, 3, 0.0);
  const Matrix out = affine_forward(layer, input);
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t j = 0; j < out.cols; ++j) CHECK(out(i, j) == layer.b[j]);
  }
}

TEST_CASE("affine_forward rejects shape mismatch") {
  AffineLayer layer(2, 3);
  Matrix input(1, 4);
  CHECK_THROWS_AS(affine_forward(layer, input), std::invalid_argument);
}

TEST_CASE("affine_forward is linear in its input when the bias is zero") {
  std::mt19937_64 rng(11);
  AffineLayer layer(5, 4);
  layer.w = random_matrix(5, 4, rng);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix y = random_matrix(3, 4, rng);
  const double ca = 1.7, cb = -0.3;
  Matrix combo(3, 4);
  for (std::size_t i = 0; i < combo.size(); ++i) {
    combo.data[i] = ca * x.data[i] + cb * y.data[i];
  }
  const Matrix fx = affine_forward(layer, x);
  const Matrix fy = affine_forward(layer, y);
  const Matrix fc = affine_forward(layer, combo);
  for (std::size_t i = 0; i < fc.size(); ++i) {
    CHECK(fc.data[i] == doctest::Approx(ca * fx.data[i] + cb * fy.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("relu and tanh forward examples") {
  Matrix in(1, 3);
  in(0, 0) = -1.0;
  in(0, 1) = 0.0;
  in(0, 2) = 2.0;
  const Matrix out = kernels::activation_forward(kernels::Activation::relu, in);
  CHECK(out(0, 0) == 0.0);
  CHECK(out(0, 1) == 0.0);
  CHECK(out(0, 2) == 2.0);

  Matrix zero(1, 1, 0.0);
  const Matrix t = kernels::activation_forward(kernels::Activation::tanh, zero);
  CHECK(t(0, 0) == 0.0);
}

TEST_CASE("relu gradient is 0 below zero and 1 above") {
  Matrix pre(1, 2);
  pre(0, 0) = -1.0;
  pre(0, 1) = 2.0;
  const Matrix ones(1, 2, 1.0);
  const Matrix g = kernels::activation_backward(kernels::Activation::relu, pre, ones);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(0, 1) == 1.0);
}

TEST_CASE("affine_backward reproduces hand gradients") {
  // L = sum((w * x)^2) with x = [1], w = [[3]]: dL/dw = 2 * w = 6.
  AffineLayer layer(1, 1);
  layer.w(0, 0) = 3.0;
  Matrix x(1, 1, 1.0);
  const Matrix y = affine_forward(layer, x);
  Matrix d_y(1, 1, 2.0 * y(0, 0));
  AffineLayer grad(1, 1);
  affine_backward(layer, x, d_y, grad);
  CHECK(grad.w(0, 0) == doctest::Approx(6.0));

  // L = sum(W x): every row of dL/dW equals x^T.
  std::mt19937_64 rng(5);
  AffineLayer wide(3, 4);
  wide.w = random_matrix(3, 4, rng);
  const Matrix input = random_matrix(1, 4, rng);
  const Matrix ones(1, 3, 1.0);
  AffineLayer wide_grad(3, 4);
  affine_backward(wide, input, ones, wide_grad);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(wide_grad.w(r, c) == doctest::Approx(input(0, c)).epsilon(1e-12));
    }
  }
}
