#include "ithp/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace ithp::oracle {

namespace {

constexpr double kGridLo = -10.0;
constexpr double kGridHi = 10.0;
constexpr std::size_t kGridPoints = 10000;

double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

double kl_gaussian_to_std(double mu, double sigma) {
  return 0.5 * (mu * mu + sigma * sigma - std::log(sigma * sigma) - 1.0);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> at, double h) {
  std::vector<double> grad(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double saved = at[i];
    at[i] = saved + h;
    const double up = f(at);
    at[i] = saved - h;
    const double down = f(at);
    at[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

ITHPParams finite_diff_params(const std::function<double(const ITHPParams&)>& loss,
                              const ITHPParams& at, double h) {
  ITHPParams work = at;
  ITHPParams grad = at;
  auto work_spans = param_spans(work);
  auto grad_spans = param_spans(grad);
  for (std::size_t s = 0; s < work_spans.size(); ++s) {
    for (std::size_t i = 0; i < work_spans[s].size(); ++i) {
      const double saved = work_spans[s][i];
      work_spans[s][i] = saved + h;
      const double up = loss(work);
      work_spans[s][i] = saved - h;
      const double down = loss(work);
      work_spans[s][i] = saved;
      grad_spans[s][i] = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

double mc_kl(const DiagGaussian& g, std::size_t n_draws, std::mt19937_64& rng) {
  if (n_draws < 1) throw std::invalid_argument("mc_kl: need at least one draw");
  std::normal_distribution<double> normal(0.0, 1.0);
  double batch_total = 0.0;
  for (std::size_t b = 0; b < g.batch(); ++b) {
    double acc = 0.0;
    for (std::size_t draw = 0; draw < n_draws; ++draw) {
      for (std::size_t d = 0; d < g.dim(); ++d) {
        const double mu = g.mean(b, d);
        const double lv = g.log_var(b, d);
        const double eps = normal(rng);
        const double z = mu + eps * std::exp(0.5 * lv);
        // log q(z) - log N(z; 0, 1) summed over dimensions
        acc += 0.5 * (z * z - lv - eps * eps);
      }
    }
    batch_total += acc / static_cast<double>(n_draws);
  }
  return batch_total / static_cast<double>(g.batch());
}

void DiscreteJoint::validate() const {
  double total = 0.0;
  for (double v : p.data) {
    if (v < 0.0) throw std::invalid_argument("discrete joint: negative entry");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("discrete joint: entries must sum to 1");
  }
}

double discrete_mi(const DiscreteJoint& joint) {
  joint.validate();
  const Matrix& p = joint.p;
  std::vector<double> px(p.rows, 0.0), py(p.cols, 0.0);
  for (std::size_t i = 0; i < p.rows; ++i) {
    for (std::size_t j = 0; j < p.cols; ++j) {
      px[i] += p(i, j);
      py[j] += p(i, j);
    }
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < p.rows; ++i) {
    for (std::size_t j = 0; j < p.cols; ++j) {
      const double v = p(i, j);
      if (v > 0.0) mi += v * std::log(v / (px[i] * py[j]));
    }
  }
  return mi;
}

BoundCheck bound_check_level0(double mu0, double sigma0, double mu1, double sigma1) {
  if (sigma0 <= 0.0 || sigma1 <= 0.0) {
    throw std::invalid_argument("bound_check_level0: sigma must be positive");
  }
  const double dx = (kGridHi - kGridLo) / static_cast<double>(kGridPoints);
  double mi = 0.0;
  for (std::size_t i = 0; i < kGridPoints; ++i) {
    const double b = kGridLo + (static_cast<double>(i) + 0.5) * dx;
    const double q0 = normal_pdf(b, mu0, sigma0);
    const double q1 = normal_pdf(b, mu1, sigma1);
    const double marginal = 0.5 * (q0 + q1);
    if (q0 > 0.0 && marginal > 0.0) mi += 0.5 * q0 * std::log(q0 / marginal) * dx;
    if (q1 > 0.0 && marginal > 0.0) mi += 0.5 * q1 * std::log(q1 / marginal) * dx;
  }
  BoundCheck out;
  out.mi_estimate = mi;
  out.avg_kl = 0.5 * (kl_gaussian_to_std(mu0, sigma0) + kl_gaussian_to_std(mu1, sigma1));
  return out;
}

DecoderBound decoder_bound_level0(double mu0, double sigma0, double mu1, double sigma1, double w,
                                  double c) {
  if (sigma0 <= 0.0 || sigma1 <= 0.0) {
    throw std::invalid_argument("decoder_bound_level0: sigma must be positive");
  }
  const double dx = (kGridHi - kGridLo) / static_cast<double>(kGridPoints);
  double expected_log_q = 0.0;
  for (std::size_t i = 0; i < kGridPoints; ++i) {
    const double b = kGridLo + (static_cast<double>(i) + 0.5) * dx;
    const double q0 = normal_pdf(b, mu0, sigma0);
    const double q1 = normal_pdf(b, mu1, sigma1);
    // log sigmoid(t) = -softplus(-t); log(1 - sigmoid(t)) = -softplus(t).
    const double t = w * b + c;
    expected_log_q += 0.5 * q0 * -softplus(t) * dx;
    expected_log_q += 0.5 * q1 * -softplus(-t) * dx;
  }
  DecoderBound out;
  out.elbo = expected_log_q + std::log(2.0);
  out.mi = bound_check_level0(mu0, sigma0, mu1, sigma1).mi_estimate;
  return out;
}

}  // namespace ithp::oracle
