#pragma once

#include <random>
#include <vector>

#include "ithp/matrix.hpp"

namespace ithp {

// One fully connected layer, out = input * w^T + b. Weights are out x in.
struct AffineLayer {
  Matrix w;
  std::vector<double> b;

  AffineLayer() = default;
  AffineLayer(std::size_t out_dim, std::size_t in_dim) : w(out_dim, in_dim), b(out_dim, 0.0) {}

  std::size_t in_dim() const { return w.cols; }
  std::size_t out_dim() const { return w.rows; }
};

Matrix affine_forward(const AffineLayer& layer, const Matrix& input);

// Writes dL/dw and dL/db into `grad` (overwriting) and returns dL/dinput.
Matrix affine_backward(const AffineLayer& layer, const Matrix& input, const Matrix& grad_out,
                       AffineLayer& grad);

// Uniform in +-sqrt(6 / (fan_in + fan_out)); biases zero.
void glorot_init(AffineLayer& layer, std::mt19937_64& rng);

}  // namespace ithp
