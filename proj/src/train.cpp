#include "ithp/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ithp/rng.hpp"

namespace ithp {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning rate must be > 0");
}

AdamState AdamState::init(const ITHPParams& params) {
  AdamState st;
  st.m.assign(param_count(params), 0.0);
  st.v.assign(param_count(params), 0.0);
  return st;
}

void adam_step(AdamState& state, ITHPParams& params, const ITHPParams& grad,
               const TrainConfig& tc) {
  auto p_spans = param_spans(params);
  auto g_spans = param_spans(grad);
  if (p_spans.size() != g_spans.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient structure mismatch");
  }
  state.step += 1;
  const double b1 = tc.adam_beta1;
  const double b2 = tc.adam_beta2;
  const double m_corr = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double v_corr = 1.0 - std::pow(b2, static_cast<double>(state.step));
  std::size_t offset = 0;
  for (std::size_t s = 0; s < p_spans.size(); ++s) {
    if (p_spans[s].size() != g_spans[s].size()) {
      throw std::invalid_argument("adam_step: span shape mismatch");
    }
    double* p = p_spans[s].data();
    const double* g = g_spans[s].data();
    for (std::size_t i = 0; i < p_spans[s].size(); ++i) {
      double& m = state.m[offset + i];
      double& v = state.v[offset + i];
      m = b1 * m + (1.0 - b1) * g[i];
      v = b2 * v + (1.0 - b2) * g[i] * g[i];
      p[i] -= tc.learning_rate * (m / m_corr) / (std::sqrt(v / v_corr) + tc.adam_eps);
    }
    offset += p_spans[s].size();
  }
}

Batch make_batch(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Batch batch;
  batch.x0 = Matrix(indices.size(), ds.modalities[0].cols);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::memcpy(batch.x0.row(i), ds.modalities[0].row(indices[i]),
                ds.modalities[0].cols * sizeof(double));
  }
  for (std::size_t m = 1; m < ds.modalities.size(); ++m) {
    Matrix target(indices.size(), ds.modalities[m].cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      std::memcpy(target.row(i), ds.modalities[m].row(indices[i]),
                  ds.modalities[m].cols * sizeof(double));
    }
    batch.targets.push_back(std::move(target));
  }
  batch.labels.reserve(indices.size());
  for (std::size_t idx : indices) batch.labels.push_back(ds.labels[idx]);
  return batch;
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n,
                                                              std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_ranges: batch size must be positive");
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t start = 0; start < n; start += batch_size) {
    ranges.emplace_back(start, std::min(n, start + batch_size));
  }
  return ranges;
}

FitResult fit(const ITHPConfig& cfg, const TrainConfig& tc, const Dataset& train,
              const Dataset* val) {
  cfg.validate();
  tc.validate();
  if (train.n() == 0) throw std::invalid_argument("fit: empty dataset");
  if (train.modalities.size() != cfg.n_modalities) {
    throw std::invalid_argument("fit: dataset has " + std::to_string(train.modalities.size()) +
                                " modalities, config expects " + std::to_string(cfg.n_modalities));
  }
  for (std::size_t m = 0; m < cfg.n_modalities; ++m) {
    require_cols(train.modalities[m], cfg.modality_dims[m], "modality " + std::to_string(m));
  }

  FitResult result;
  result.params = init_params(cfg, derive_seed(tc.seed, 1));
  AdamState adam = AdamState::init(result.params);
  auto shuffle_rng = make_rng(derive_seed(tc.seed, 2));
  auto noise_rng = make_rng(derive_seed(tc.seed, 3));

  const std::size_t n = train.n();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  ITHPParams grad = make_params(cfg);
  std::vector<NoiseDraw> noise(cfg.n_levels());

  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossBreakdown epoch_mean;
    epoch_mean.kl_terms.assign(cfg.n_levels(), 0.0);
    epoch_mean.det_terms.assign(cfg.n_levels(), 0.0);
    std::size_t steps = 0;

    for (const auto& [start, end] : batch_ranges(n, tc.batch_size)) {
      const std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
      const Batch batch = make_batch(train, idx);
      for (std::size_t k = 0; k < cfg.n_levels(); ++k) {
        noise[k] = draw_noise(noise_rng, idx.size(), cfg.latent_dims[k]);
      }
      LossBreakdown bd;
      try {
        bd = loss_and_grad(cfg, result.params, batch, noise, grad);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error("epoch " + std::to_string(epoch) + " step " +
                                 std::to_string(steps) + ": " + e.what());
      }
      adam_step(adam, result.params, grad, tc);

      for (std::size_t k = 0; k < cfg.n_levels(); ++k) {
        epoch_mean.kl_terms[k] += bd.kl_terms[k];
        epoch_mean.det_terms[k] += bd.det_terms[k];
      }
      epoch_mean.overall += bd.overall;
      epoch_mean.task_term += bd.task_term;
      epoch_mean.total += bd.total;
      ++steps;
    }

    const double inv = 1.0 / static_cast<double>(steps);
    for (double& v : epoch_mean.kl_terms) v *= inv;
    for (double& v : epoch_mean.det_terms) v *= inv;
    epoch_mean.overall *= inv;
    epoch_mean.task_term *= inv;
    epoch_mean.total *= inv;

    EpochStats stats;
    stats.mean = std::move(epoch_mean);
    if (val != nullptr) stats.val = evaluate(cfg, result.params, *val);
    result.history.epochs.push_back(std::move(stats));
  }
  return result;
}

MetricReport evaluate(const ITHPConfig& cfg, const ITHPParams& params, const Dataset& ds) {
  if (ds.n() == 0) throw std::invalid_argument("evaluate: empty dataset");
  const std::vector<double> outputs = predict(cfg, params, ds.modalities[0]);
  MetricReport report;
  if (cfg.task_kind == TaskKind::binary_classification) {
    std::vector<int> preds(outputs.size());
    std::vector<int> labels(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      preds[i] = outputs[i] > 0.5 ? 1 : 0;
      labels[i] = ds.labels[i] != 0.0 ? 1 : 0;
    }
    const auto prf = weighted_prf(ConfusionCounts::from_predictions(preds, labels));
    report.weighted_precision = prf.precision;
    report.weighted_recall = prf.recall;
    report.weighted_fscore = prf.fscore;
    report.ba = binary_accuracy(preds, labels);
    report.f1 = f1_binary(preds, labels);
    report.mae = mae(outputs, ds.labels);
    try {
      report.corr = pearson_corr(outputs, ds.labels);
    } catch (const std::domain_error&) {
      // constant predictions or single-class labels: leave corr unset
    }
  } else {
    report.mae = mae(outputs, ds.labels);
    try {
      report.corr = pearson_corr(outputs, ds.labels);
    } catch (const std::domain_error&) {
    }
  }
  return report;
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write history: " + path.string());
  const std::size_t levels = epochs.empty() ? 0 : epochs.front().mean.kl_terms.size();
  os << "epoch,mean_total,mean_overall,mean_task";
  for (std::size_t k = 0; k < levels; ++k) os << ",kl" << k << ",det" << k;
  os << '\n';
  char buf[32];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    const LossBreakdown& m = epochs[e].mean;
    os << e << ',' << fmt(m.total) << ',' << fmt(m.overall) << ',' << fmt(m.task_term);
    for (std::size_t k = 0; k < levels; ++k) {
      os << ',' << fmt(m.kl_terms[k]) << ',' << fmt(m.det_terms[k]);
    }
    os << '\n';
  }
}

}  // namespace ithp
