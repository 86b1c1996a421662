#include "ithp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ithp/kernels.hpp"
#include "ithp/rng.hpp"

namespace ithp {

namespace {

using kernels::Activation;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void clamp_log_var(Matrix& lv) {
  for (double& v : lv.data) v = std::clamp(v, kLogVarMin, kLogVarMax);
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* in = logits.row(i);
    double* o = out.row(i);
    double mx = in[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, in[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      o[j] = std::exp(in[j] - mx);
      denom += o[j];
    }
    for (std::size_t j = 0; j < logits.cols; ++j) o[j] /= denom;
  }
  return out;
}

void require_one_hot(const Matrix& target) {
  for (std::size_t i = 0; i < target.rows; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < target.cols; ++j) {
      const double v = target(i, j);
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("categorical detector target must be one-hot (row " +
                                    std::to_string(i) + ")");
      }
      row_sum += v;
    }
    if (row_sum != 1.0) {
      throw std::invalid_argument("categorical detector target row " + std::to_string(i) +
                                  " does not sum to 1");
    }
  }
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) { return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

struct LevelCache {
  Matrix h_pre, h;      // encoder hidden before/after relu
  Matrix lv_raw;        // log-variance before clamping
  Matrix det_h_pre, det_h;
};

struct PredictorCache {
  Matrix h_pre, h;
  Matrix out;  // n x 1 logits / values
};

void forward_level(const LevelParams& p, const Matrix& input, const NoiseDraw& noise,
                   LevelOutput& out, LevelCache& cache) {
  cache.h_pre = affine_forward(p.enc_l1, input);
  cache.h = kernels::activation_forward(Activation::relu, cache.h_pre);
  out.gaussian.mean = affine_forward(p.enc_mu, cache.h);
  cache.lv_raw = affine_forward(p.enc_logvar, cache.h);
  out.gaussian.log_var = cache.lv_raw;
  clamp_log_var(out.gaussian.log_var);
  out.z = reparameterize(out.gaussian, noise);
  cache.det_h_pre = affine_forward(p.det_l1, out.z);
  cache.det_h = kernels::activation_forward(Activation::relu, cache.det_h_pre);
  out.detector_pred = affine_forward(p.det_l2, cache.det_h);
}

void forward_predictor(const PredictorParams& p, const Matrix& z, PredictorCache& cache) {
  cache.h_pre = affine_forward(p.l1, z);
  cache.h = kernels::activation_forward(Activation::relu, cache.h_pre);
  cache.out = affine_forward(p.l2, cache.h);
}

double task_loss_value(TaskKind kind, const Matrix& logits, const std::vector<double>& labels) {
  if (logits.cols != 1 || logits.rows != labels.size()) {
    throw std::invalid_argument("task loss: predictor output must be n x 1 matching labels");
  }
  const double n = static_cast<double>(labels.size());
  double acc = 0.0;
  if (kind == TaskKind::binary_classification) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      acc += softplus(logits(i, 0)) - labels[i] * logits(i, 0);
    }
  } else {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double d = logits(i, 0) - labels[i];
      acc += d * d;
    }
  }
  return acc / n;
}

// d(task)/d(logit), already including the batch mean.
Matrix task_loss_grad(TaskKind kind, const Matrix& logits, const std::vector<double>& labels) {
  Matrix g(logits.rows, 1);
  const double n = static_cast<double>(labels.size());
  if (kind == TaskKind::binary_classification) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      g(i, 0) = (sigmoid(logits(i, 0)) - labels[i]) / n;
    }
  } else {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      g(i, 0) = 2.0 * (logits(i, 0) - labels[i]) / n;
    }
  }
  return g;
}

// d(det)/d(pred), already including the batch mean.
Matrix det_loss_grad(DetectorKind kind, const Matrix& pred, const Matrix& target) {
  Matrix g(pred.rows, pred.cols);
  const double n = static_cast<double>(pred.rows);
  if (kind == DetectorKind::continuous) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      g.data[i] = 2.0 * (pred.data[i] - target.data[i]) / n;
    }
  } else {
    const Matrix p = softmax_rows(pred);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      g.data[i] = (p.data[i] - target.data[i]) / n;
    }
  }
  return g;
}

void check_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) {
    throw std::runtime_error("non-finite loss term: " + what);
  }
}

void validate_batch(const ITHPConfig& cfg, const Batch& batch) {
  require_cols(batch.x0, cfg.modality_dims[0], "batch x0");
  if (batch.targets.size() != cfg.n_levels()) {
    throw std::invalid_argument("batch carries " + std::to_string(batch.targets.size()) +
                                " detector targets, expected " + std::to_string(cfg.n_levels()));
  }
  for (std::size_t k = 0; k < batch.targets.size(); ++k) {
    require_shape(batch.targets[k], batch.x0.rows, cfg.modality_dims[k + 1],
                  "batch target X_" + std::to_string(k + 1));
  }
  if (batch.labels.size() != batch.x0.rows) {
    throw std::invalid_argument("batch labels length mismatch");
  }
}

struct ForwardState {
  std::vector<LevelOutput> outputs;
  std::vector<LevelCache> caches;
  PredictorCache pred;
};

ForwardState forward_train(const ITHPConfig& cfg, const ITHPParams& params, const Matrix& x0,
                           std::span<const NoiseDraw> noise) {
  if (noise.size() != cfg.n_levels()) {
    throw std::invalid_argument("forward needs one noise draw per level");
  }
  ForwardState st;
  st.outputs.resize(cfg.n_levels());
  st.caches.resize(cfg.n_levels());
  const Matrix* input = &x0;
  for (std::size_t k = 0; k < cfg.n_levels(); ++k) {
    forward_level(params.levels[k], *input, noise[k], st.outputs[k], st.caches[k]);
    input = &st.outputs[k].z;
  }
  forward_predictor(params.predictor, st.outputs.back().z, st.pred);
  return st;
}

LossBreakdown assemble_losses(const ITHPConfig& cfg, const ForwardState& st, const Batch& batch) {
  LossBreakdown bd;
  std::vector<LevelLoss> per_level(cfg.n_levels());
  for (std::size_t k = 0; k < cfg.n_levels(); ++k) {
    per_level[k] = level_loss(st.outputs[k], batch.targets[k], cfg.detector_kinds[k]);
    check_finite(per_level[k].kl, "level " + std::to_string(k) + " KL");
    check_finite(per_level[k].det, "level " + std::to_string(k) + " detector loss");
    bd.kl_terms.push_back(per_level[k].kl);
    bd.det_terms.push_back(per_level[k].det);
  }
  bd.overall = overall_loss(per_level, cfg);
  bd.task_term = task_loss_value(cfg.task_kind, st.pred.out, batch.labels);
  check_finite(bd.task_term, "task loss");
  bd.total = total_loss(bd.overall, bd.task_term, cfg);
  check_finite(bd.total, "total loss");
  return bd;
}

}  // namespace

double ITHPConfig::multiplier(std::size_t level) const {
  return level == 0 ? beta : gammas[level - 1];
}

double ITHPConfig::level_weight(std::size_t level) const {
  return level == 0 ? 1.0 : lambdas[level - 1];
}

double ITHPConfig::loss_scale() const {
  return static_cast<double>(n_modalities - 1) / (beta + sum(gammas));
}

void ITHPConfig::validate() const {
  if (n_modalities < 2) throw std::invalid_argument("config: need at least 2 modalities");
  const std::size_t levels = n_levels();
  if (modality_dims.size() != n_modalities) {
    throw std::invalid_argument("config: modality_dims length mismatch");
  }
  if (latent_dims.size() != levels || hidden_dims.size() != levels ||
      detector_hidden_dims.size() != levels || detector_kinds.size() != levels) {
    throw std::invalid_argument("config: per-level list length mismatch");
  }
  if (gammas.size() != levels - 1 || lambdas.size() != levels - 1) {
    throw std::invalid_argument("config: gammas/lambdas must have one entry per level after the first");
  }
  for (std::size_t d : modality_dims) {
    if (d == 0) throw std::invalid_argument("config: modality dim must be positive");
  }
  for (std::size_t d : latent_dims) {
    if (d == 0) throw std::invalid_argument("config: latent dim must be positive");
  }
  for (std::size_t d : hidden_dims) {
    if (d == 0) throw std::invalid_argument("config: hidden dim must be positive");
  }
  if (predictor_hidden == 0) throw std::invalid_argument("config: predictor hidden must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("config: beta must be > 0");
  for (double g : gammas) {
    if (!(g > 0.0)) throw std::invalid_argument("config: gamma must be > 0");
  }
  for (double l : lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("config: lambda must be > 0");
  }
  if (alpha < 0.0) throw std::invalid_argument("config: alpha must be >= 0");
}

ITHPConfig ITHPConfig::defaults_for(std::vector<std::size_t> modality_dims, TaskKind task) {
  ITHPConfig cfg;
  cfg.n_modalities = modality_dims.size();
  cfg.modality_dims = std::move(modality_dims);
  const std::size_t levels = cfg.n_levels();
  std::size_t latent = 128;
  for (std::size_t k = 0; k < levels; ++k) {
    cfg.latent_dims.push_back(latent);
    cfg.hidden_dims.push_back(latent * 2);
    cfg.detector_hidden_dims.push_back(latent * 2);
    cfg.detector_kinds.push_back(DetectorKind::continuous);
    if (latent > 8) latent /= 2;
  }
  cfg.gammas.assign(levels > 0 ? levels - 1 : 0, 8.0);
  cfg.lambdas.assign(levels > 0 ? levels - 1 : 0, 1.0);
  cfg.beta = 32.0;
  cfg.alpha = 1.0;
  cfg.task_kind = task;
  return cfg;
}

ITHPParams make_params(const ITHPConfig& cfg) {
  cfg.validate();
  ITHPParams p;
  p.levels.resize(cfg.n_levels());
  for (std::size_t k = 0; k < cfg.n_levels(); ++k) {
    const std::size_t in = k == 0 ? cfg.modality_dims[0] : cfg.latent_dims[k - 1];
    LevelParams& lp = p.levels[k];
    lp.enc_l1 = AffineLayer(cfg.hidden_dims[k], in);
    lp.enc_mu = AffineLayer(cfg.latent_dims[k], cfg.hidden_dims[k]);
    lp.enc_logvar = AffineLayer(cfg.latent_dims[k], cfg.hidden_dims[k]);
    lp.det_l1 = AffineLayer(cfg.detector_hidden_dims[k], cfg.latent_dims[k]);
    lp.det_l2 = AffineLayer(cfg.modality_dims[k + 1], cfg.detector_hidden_dims[k]);
  }
  p.predictor.l1 = AffineLayer(cfg.predictor_hidden, cfg.latent_dims.back());
  p.predictor.l2 = AffineLayer(1, cfg.predictor_hidden);
  return p;
}

ITHPParams init_params(const ITHPConfig& cfg, std::uint64_t seed) {
  ITHPParams p = make_params(cfg);
  auto rng = make_rng(seed);
  for (LevelParams& lp : p.levels) {
    glorot_init(lp.enc_l1, rng);
    glorot_init(lp.enc_mu, rng);
    glorot_init(lp.enc_logvar, rng);
    glorot_init(lp.det_l1, rng);
    glorot_init(lp.det_l2, rng);
  }
  glorot_init(p.predictor.l1, rng);
  glorot_init(p.predictor.l2, rng);
  return p;
}

namespace {

template <typename Params, typename Span>
std::vector<Span> collect_spans(Params& p) {
  std::vector<Span> spans;
  auto add = [&spans](auto& layer) {
    spans.push_back(Span(layer.w.data));
    spans.push_back(Span(layer.b));
  };
  for (auto& lp : p.levels) {
    add(lp.enc_l1);
    add(lp.enc_mu);
    add(lp.enc_logvar);
    add(lp.det_l1);
    add(lp.det_l2);
  }
  add(p.predictor.l1);
  add(p.predictor.l2);
  return spans;
}

}  // namespace

std::vector<std::span<double>> param_spans(ITHPParams& p) {
  return collect_spans<ITHPParams, std::span<double>>(p);
}

std::vector<std::span<const double>> param_spans(const ITHPParams& p) {
  return collect_spans<const ITHPParams, std::span<const double>>(p);
}

std::size_t param_count(const ITHPParams& p) {
  std::size_t n = 0;
  for (const auto& s : param_spans(p)) n += s.size();
  return n;
}

DiagGaussian encode_level(const LevelParams& p, const Matrix& input) {
  DiagGaussian g;
  const Matrix h = kernels::activation_forward(Activation::relu, affine_forward(p.enc_l1, input));
  g.mean = affine_forward(p.enc_mu, h);
  g.log_var = affine_forward(p.enc_logvar, h);
  clamp_log_var(g.log_var);
  return g;
}

std::vector<LevelOutput> forward_chain(const ITHPConfig& cfg, const ITHPParams& params,
                                       const Matrix& x0, std::span<const NoiseDraw> noise) {
  cfg.validate();
  require_cols(x0, cfg.modality_dims[0], "forward_chain x0");
  ForwardState st = forward_train(cfg, params, x0, noise);
  return std::move(st.outputs);
}

LevelLoss level_loss(const LevelOutput& out, const Matrix& target, DetectorKind kind) {
  if (!out.detector_pred.same_shape(target)) {
    throw std::invalid_argument("level_loss: detector prediction and target shapes differ");
  }
  LevelLoss loss;
  loss.kl = kl_std_normal(out.gaussian);
  const double n = static_cast<double>(target.rows);
  if (kind == DetectorKind::continuous) {
    double acc = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double d = target.data[i] - out.detector_pred.data[i];
      acc += d * d;
    }
    loss.det = acc / n;
  } else {
    require_one_hot(target);
    const Matrix p = softmax_rows(out.detector_pred);
    double acc = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (target.data[i] != 0.0) acc -= std::log(p.data[i]);
    }
    loss.det = acc / n;
  }
  return loss;
}

double overall_loss(std::span<const LevelLoss> losses, const ITHPConfig& cfg) {
  if (losses.size() != cfg.n_levels()) {
    throw std::invalid_argument("overall_loss: expected one loss per level");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    total += cfg.level_weight(k) * (losses[k].kl + cfg.multiplier(k) * losses[k].det);
  }
  return total;
}

double total_loss(double overall, double task, const ITHPConfig& cfg) {
  return cfg.loss_scale() * overall + cfg.alpha * task;
}

LossBreakdown compute_losses(const ITHPConfig& cfg, const ITHPParams& params, const Batch& batch,
                             std::span<const NoiseDraw> noise) {
  cfg.validate();
  validate_batch(cfg, batch);
  ForwardState st = forward_train(cfg, params, batch.x0, noise);
  return assemble_losses(cfg, st, batch);
}

LossBreakdown loss_and_grad(const ITHPConfig& cfg, const ITHPParams& params, const Batch& batch,
                            std::span<const NoiseDraw> noise, ITHPParams& grad) {
  cfg.validate();
  validate_batch(cfg, batch);
  const ForwardState st = forward_train(cfg, params, batch.x0, noise);
  const LossBreakdown bd = assemble_losses(cfg, st, batch);

  grad = make_params(cfg);
  const std::size_t levels = cfg.n_levels();
  const double scale = cfg.loss_scale();

  // Task branch: d(total)/d(logit) -> predictor -> dz for the last level.
  Matrix d_out = task_loss_grad(cfg.task_kind, st.pred.out, batch.labels);
  for (double& v : d_out.data) v *= cfg.alpha;
  Matrix d_ph = affine_backward(params.predictor.l2, st.pred.h, d_out, grad.predictor.l2);
  Matrix d_ph_pre = kernels::activation_backward(Activation::relu, st.pred.h_pre, d_ph);
  Matrix dz_next = affine_backward(params.predictor.l1, st.outputs.back().z, d_ph_pre,
                                   grad.predictor.l1);

  for (std::size_t ri = 0; ri < levels; ++ri) {
    const std::size_t k = levels - 1 - ri;
    const LevelOutput& out = st.outputs[k];
    const LevelCache& cache = st.caches[k];
    const LevelParams& lp = params.levels[k];
    LevelParams& lg = grad.levels[k];

    Matrix dz = std::move(dz_next);  // predictor (last level) or next level's encoder input

    // Detector branch.
    const double det_weight = scale * cfg.level_weight(k) * cfg.multiplier(k);
    Matrix d_pred = det_loss_grad(cfg.detector_kinds[k], out.detector_pred, batch.targets[k]);
    for (double& v : d_pred.data) v *= det_weight;
    Matrix d_dh = affine_backward(lp.det_l2, cache.det_h, d_pred, lg.det_l2);
    Matrix d_dh_pre = kernels::activation_backward(Activation::relu, cache.det_h_pre, d_dh);
    Matrix dz_det = affine_backward(lp.det_l1, out.z, d_dh_pre, lg.det_l1);
    for (std::size_t i = 0; i < dz.size(); ++i) dz.data[i] += dz_det.data[i];

    // Reparameterization: z = mu + eps * exp(0.5 * lv).
    Matrix d_mu = dz;
    Matrix d_lv(dz.rows, dz.cols);
    for (std::size_t i = 0; i < dz.size(); ++i) {
      d_lv.data[i] = dz.data[i] * noise[k].eps.data[i] * 0.5 *
                     std::exp(0.5 * out.gaussian.log_var.data[i]);
    }

    // KL term, batch-averaged.
    const double kl_weight = scale * cfg.level_weight(k);
    const double inv_n = 1.0 / static_cast<double>(batch.x0.rows);
    for (std::size_t i = 0; i < d_mu.size(); ++i) {
      d_mu.data[i] += kl_weight * out.gaussian.mean.data[i] * inv_n;
      d_lv.data[i] += kl_weight * 0.5 * (std::exp(out.gaussian.log_var.data[i]) - 1.0) * inv_n;
    }

    // Clamp on the raw log-variance.
    for (std::size_t i = 0; i < d_lv.size(); ++i) {
      const double raw = cache.lv_raw.data[i];
      if (raw <= kLogVarMin || raw >= kLogVarMax) d_lv.data[i] = 0.0;
    }

    // Encoder.
    Matrix d_h = affine_backward(lp.enc_mu, cache.h, d_mu, lg.enc_mu);
    Matrix d_h_lv = affine_backward(lp.enc_logvar, cache.h, d_lv, lg.enc_logvar);
    for (std::size_t i = 0; i < d_h.size(); ++i) d_h.data[i] += d_h_lv.data[i];
    Matrix d_h_pre = kernels::activation_backward(Activation::relu, cache.h_pre, d_h);
    const Matrix& input = k == 0 ? batch.x0 : st.outputs[k - 1].z;
    Matrix d_in = affine_backward(lp.enc_l1, input, d_h_pre, lg.enc_l1);
    if (k > 0) dz_next = std::move(d_in);
  }
  return bd;
}

std::vector<double> predict(const ITHPConfig& cfg, const ITHPParams& params, const Matrix& x0) {
  cfg.validate();
  require_cols(x0, cfg.modality_dims[0], "predict x0");
  Matrix current = x0;
  for (std::size_t k = 0; k < cfg.n_levels(); ++k) {
    DiagGaussian g = encode_level(params.levels[k], current);
    current = std::move(g.mean);  // eps = 0
  }
  const Matrix h = kernels::activation_forward(
      Activation::relu, affine_forward(params.predictor.l1, current));
  const Matrix out = affine_forward(params.predictor.l2, h);
  std::vector<double> result(out.rows);
  for (std::size_t i = 0; i < out.rows; ++i) {
    result[i] = cfg.task_kind == TaskKind::binary_classification ? sigmoid(out(i, 0)) : out(i, 0);
  }
  return result;
}

}  // namespace ithp
