#include "ithp/affine.hpp"

#include <cmath>
#include <stdexcept>

#include "ithp/kernels.hpp"

namespace ithp {

Matrix affine_forward(const AffineLayer& layer, const Matrix& input) {
  require_cols(input, layer.in_dim(), "affine_forward input");
  Matrix out;
  kernels::matmul_nt(input, layer.w, out);
  kernels::add_row_inplace(out, layer.b);
  return out;
}

Matrix affine_backward(const AffineLayer& layer, const Matrix& input, const Matrix& grad_out,
                       AffineLayer& grad) {
  require_cols(input, layer.in_dim(), "affine_backward input");
  require_shape(grad_out, input.rows, layer.out_dim(), "affine_backward grad_out");
  kernels::matmul_tn(grad_out, input, grad.w);
  grad.b.assign(layer.out_dim(), 0.0);
  kernels::col_sums(grad_out, grad.b);
  Matrix grad_in;
  kernels::matmul_nn(grad_out, layer.w, grad_in);
  return grad_in;
}

void glorot_init(AffineLayer& layer, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : layer.w.data) v = dist(rng);
  for (double& v : layer.b) v = 0.0;
}

}  // namespace ithp
