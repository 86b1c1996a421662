#pragma once

#include <random>

#include "ithp/matrix.hpp"

namespace ithp {

// Log-variances are clamped to this range right after encoding; prevents
// exp overflow without touching any realistic optimum.
inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

// Batch of diagonal Gaussians: one (mean, log-variance) row per sample.
struct DiagGaussian {
  Matrix mean;
  Matrix log_var;

  std::size_t batch() const { return mean.rows; }
  std::size_t dim() const { return mean.cols; }
};

// Standard-normal draws, one row per sample.
struct NoiseDraw {
  Matrix eps;
};

// 0.5 * sum_d (mu^2 + exp(log_var) - log_var - 1), averaged over the batch.
double kl_std_normal(const DiagGaussian& g);

// z = mu + eps * exp(0.5 * log_var), elementwise.
Matrix reparameterize(const DiagGaussian& g, const NoiseDraw& noise);

NoiseDraw draw_noise(std::mt19937_64& rng, std::size_t n, std::size_t dim);

}  // namespace ithp
