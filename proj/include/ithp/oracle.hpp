#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "ithp/gaussian.hpp"
#include "ithp/matrix.hpp"
#include "ithp/model.hpp"

// Independent verification oracles used by the test suites. Everything here
// recomputes its answer from first principles and must stay independent of
// the implementation paths it checks.
namespace ithp::oracle {

// Central differences of a scalar function over a flat parameter vector.
std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> at, double h = 1e-5);

// Central differences of a loss over a full parameter set; the result is
// shape-isomorphic to the parameters.
ITHPParams finite_diff_params(const std::function<double(const ITHPParams&)>& loss,
                              const ITHPParams& at, double h = 1e-5);

// Monte-Carlo estimate of KL(g || N(0, I)), batch-averaged like the closed
// form it cross-checks.
double mc_kl(const DiagGaussian& g, std::size_t n_draws, std::mt19937_64& rng);

// Joint probability table over two finite alphabets.
struct DiscreteJoint {
  Matrix p;
  void validate() const;  // entries >= 0, total == 1 within 1e-12
};

// Mutual information in nats.
double discrete_mi(const DiscreteJoint& joint);

// Toy channel: X in {0, 1} uniform, B | X=x ~ N(mu_x, sigma_x^2). Densities
// integrated on a fixed grid over [-10, 10] with 1e4 points.
struct BoundCheck {
  double mi_estimate = 0.0;  // grid-integrated I(X; B)
  double avg_kl = 0.0;       // E_x KL(q(B|x) || N(0,1)), closed form
};

BoundCheck bound_check_level0(double mu0, double sigma0, double mu1, double sigma1);

// Same toy channel with a logistic decoder q(x=1|b) = sigmoid(w*b + c),
// scoring the variational reconstruction bound: returns
// E[log q(X|B)] + H(X), which can never exceed I(B; X).
struct DecoderBound {
  double elbo = 0.0;  // E[log q(X|B)] + H(X)
  double mi = 0.0;    // grid-integrated I(B; X)
};

DecoderBound decoder_bound_level0(double mu0, double sigma0, double mu1, double sigma1, double w,
                                  double c);

}  // namespace ithp::oracle
