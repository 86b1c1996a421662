#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "ithp/affine.hpp"
#include "ithp/gaussian.hpp"

namespace ithp {

enum class DetectorKind { categorical, continuous };
enum class TaskKind { binary_classification, regression };

// Chain of bottleneck levels for n_modalities modal states X_0..X_N:
// level k encodes its input into a latent Gaussian B_k and a detector head
// predicts X_{k+1}; only X_0 ever enters the chain.
struct ITHPConfig {
  std::size_t n_modalities = 0;
  std::vector<std::size_t> modality_dims;        // d_X0..d_XN
  std::vector<std::size_t> latent_dims;          // d_B0..d_B{L-1}
  std::vector<std::size_t> hidden_dims;          // encoder hidden width per level
  std::vector<std::size_t> detector_hidden_dims; // detector hidden width per level
  std::size_t predictor_hidden = 64;
  double beta = 32.0;
  std::vector<double> gammas;   // one per level after the first
  std::vector<double> lambdas;  // one per level after the first
  double alpha = 1.0;
  std::vector<DetectorKind> detector_kinds;  // per level
  TaskKind task_kind = TaskKind::binary_classification;

  std::size_t n_levels() const { return n_modalities == 0 ? 0 : n_modalities - 1; }
  // beta for level 0, gamma_{k-1} for subsequent levels.
  double multiplier(std::size_t level) const;
  // 1 for level 0, lambda_{k-1} for subsequent levels.
  double level_weight(std::size_t level) const;
  // (n_modalities - 1) / (beta + sum of gammas); weights the IB stack
  // against the task term.
  double loss_scale() const;

  void validate() const;  // throws std::invalid_argument

  // latent 128 -> 64 -> ... halving (min 8), hidden = 2x latent,
  // beta=32 gamma=8 lambda=1 alpha=1, continuous detectors.
  static ITHPConfig defaults_for(std::vector<std::size_t> modality_dims, TaskKind task);
};

struct LevelParams {
  AffineLayer enc_l1;      // input -> hidden
  AffineLayer enc_mu;      // hidden -> latent
  AffineLayer enc_logvar;  // hidden -> latent
  AffineLayer det_l1;      // latent -> detector hidden
  AffineLayer det_l2;      // detector hidden -> next modality dim
};

struct PredictorParams {
  AffineLayer l1;  // final latent -> predictor hidden
  AffineLayer l2;  // predictor hidden -> task output (1)
};

struct ITHPParams {
  std::vector<LevelParams> levels;
  PredictorParams predictor;
};

ITHPParams make_params(const ITHPConfig& cfg);  // zero-filled, correct shapes
ITHPParams init_params(const ITHPConfig& cfg, std::uint64_t seed);

// All parameter tensors in a fixed order; the order defines the checkpoint
// layout and the Adam state layout.
std::vector<std::span<double>> param_spans(ITHPParams& p);
std::vector<std::span<const double>> param_spans(const ITHPParams& p);
std::size_t param_count(const ITHPParams& p);

struct LevelOutput {
  DiagGaussian gaussian;
  Matrix z;
  Matrix detector_pred;  // raw head output; logits for categorical detectors
};

DiagGaussian encode_level(const LevelParams& p, const Matrix& input);

// Level 0 encodes x0, level k >= 1 encodes z_{k-1}; every level emits its
// detector prediction. `noise` must hold one draw per level.
std::vector<LevelOutput> forward_chain(const ITHPConfig& cfg, const ITHPParams& params,
                                       const Matrix& x0, std::span<const NoiseDraw> noise);

struct LevelLoss {
  double kl = 0.0;
  double det = 0.0;
};

// kl = batch-mean KL to the standard-normal prior; det = batch-mean
// cross-entropy over the softmaxed head output (categorical) or batch-mean
// per-sample sum of squared errors (continuous).
LevelLoss level_loss(const LevelOutput& out, const Matrix& target, DetectorKind kind);

// L_0 + sum_k lambda_k * L_{k+1}, with L_k = kl_k + multiplier_k * det_k.
double overall_loss(std::span<const LevelLoss> losses, const ITHPConfig& cfg);

double total_loss(double overall, double task, const ITHPConfig& cfg);

struct LossBreakdown {
  std::vector<double> kl_terms;
  std::vector<double> det_terms;
  double overall = 0.0;
  double task_term = 0.0;
  double total = 0.0;
};

// One training minibatch in chain order.
struct Batch {
  Matrix x0;
  std::vector<Matrix> targets;  // X_1..X_N
  std::vector<double> labels;
};

LossBreakdown compute_losses(const ITHPConfig& cfg, const ITHPParams& params, const Batch& batch,
                             std::span<const NoiseDraw> noise);

// Forward, losses, and analytic gradients of the total loss in one pass.
// `grad` is overwritten. Throws std::runtime_error naming the offending
// component if any loss term is non-finite.
LossBreakdown loss_and_grad(const ITHPConfig& cfg, const ITHPParams& params, const Batch& batch,
                            std::span<const NoiseDraw> noise, ITHPParams& grad);

// Inference: deterministic chain (eps = 0), detector heads skipped, predictor
// applied to the final latent mean. Returns one value per row: a probability
// for binary classification, a real value for regression.
std::vector<double> predict(const ITHPConfig& cfg, const ITHPParams& params, const Matrix& x0);

// Checkpoint: "ITHP1" magic, little-endian JSON-headed container with
// length-prefixed float64 tensors.
void save_checkpoint(const std::filesystem::path& path, const ITHPConfig& cfg,
                     const ITHPParams& params);
std::pair<ITHPConfig, ITHPParams> load_checkpoint(const std::filesystem::path& path);

}  // namespace ithp
