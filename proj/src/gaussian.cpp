#include "ithp/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace ithp {

double kl_std_normal(const DiagGaussian& g) {
  if (!g.mean.same_shape(g.log_var)) {
    throw std::invalid_argument("kl_std_normal: mean/log_var shape mismatch");
  }
  if (g.batch() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < g.mean.size(); ++i) {
    const double mu = g.mean.data[i];
    const double lv = g.log_var.data[i];
    total += 0.5 * (mu * mu + std::exp(lv) - lv - 1.0);
  }
  return total / static_cast<double>(g.batch());
}

Matrix reparameterize(const DiagGaussian& g, const NoiseDraw& noise) {
  if (!g.mean.same_shape(g.log_var) || !g.mean.same_shape(noise.eps)) {
    throw std::invalid_argument("reparameterize: dimension mismatch");
  }
  Matrix z(g.mean.rows, g.mean.cols);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z.data[i] = g.mean.data[i] + noise.eps.data[i] * std::exp(0.5 * g.log_var.data[i]);
  }
  return z;
}

NoiseDraw draw_noise(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  NoiseDraw out{Matrix(n, dim)};
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.eps.data) v = normal(rng);
  return out;
}

}  // namespace ithp
