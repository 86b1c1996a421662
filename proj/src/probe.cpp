#include "ithp/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ithp/kernels.hpp"
#include "ithp/rng.hpp"

namespace ithp {

namespace {

using kernels::Activation;

double sigmoid(double x) { return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

struct FlatAdam {
  std::vector<double> m, v;
  long step = 0;

  explicit FlatAdam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void update(std::vector<double*> params, std::vector<const double*> grads,
              std::vector<std::size_t> sizes, double lr) {
    step += 1;
    const double m_corr = 1.0 - std::pow(0.9, static_cast<double>(step));
    const double v_corr = 1.0 - std::pow(0.999, static_cast<double>(step));
    std::size_t offset = 0;
    for (std::size_t s = 0; s < params.size(); ++s) {
      for (std::size_t i = 0; i < sizes[s]; ++i) {
        double& mm = m[offset + i];
        double& vv = v[offset + i];
        mm = 0.9 * mm + 0.1 * grads[s][i];
        vv = 0.999 * vv + 0.001 * grads[s][i] * grads[s][i];
        params[s][i] -= lr * (mm / m_corr) / (std::sqrt(vv / v_corr) + 1e-8);
      }
      offset += sizes[s];
    }
  }
};

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), x.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::memcpy(out.row(i), x.row(idx[i]), x.cols * sizeof(double));
  }
  return out;
}

}  // namespace

ProbeModel probe_fit(const Matrix& x, const std::vector<double>& labels, const ProbeConfig& cfg) {
  if (x.rows != labels.size()) throw std::invalid_argument("probe_fit: label count mismatch");
  if (x.rows == 0) throw std::invalid_argument("probe_fit: empty input");

  ProbeModel model;
  model.linear = cfg.hidden == 0;
  auto rng = make_rng(derive_seed(cfg.seed, 11));
  if (model.linear) {
    model.l1 = AffineLayer(1, x.cols);
    glorot_init(model.l1, rng);
  } else {
    model.l1 = AffineLayer(cfg.hidden, x.cols);
    model.l2 = AffineLayer(1, cfg.hidden);
    glorot_init(model.l1, rng);
    glorot_init(model.l2, rng);
  }

  std::size_t n_params = model.l1.w.data.size() + model.l1.b.size();
  if (!model.linear) n_params += model.l2.w.data.size() + model.l2.b.size();
  FlatAdam adam(n_params);

  auto shuffle_rng = make_rng(derive_seed(cfg.seed, 12));
  std::vector<std::size_t> order(x.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  AffineLayer g1(model.l1.out_dim(), model.l1.in_dim());
  AffineLayer g2 = model.linear ? AffineLayer() : AffineLayer(1, cfg.hidden);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < x.rows; start += cfg.batch_size) {
      const std::size_t end = std::min(x.rows, start + cfg.batch_size);
      const std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
      const Matrix xb = gather_rows(x, idx);
      const double inv_n = 1.0 / static_cast<double>(idx.size());

      Matrix d_logit(idx.size(), 1);
      if (model.linear) {
        const Matrix logit = affine_forward(model.l1, xb);
        for (std::size_t i = 0; i < idx.size(); ++i) {
          d_logit(i, 0) = (sigmoid(logit(i, 0)) - labels[idx[i]]) * inv_n;
        }
        affine_backward(model.l1, xb, d_logit, g1);
        adam.update({model.l1.w.data.data(), model.l1.b.data()},
                    {g1.w.data.data(), g1.b.data()},
                    {model.l1.w.data.size(), model.l1.b.size()}, cfg.learning_rate);
      } else {
        const Matrix h_pre = affine_forward(model.l1, xb);
        const Matrix h = kernels::activation_forward(Activation::relu, h_pre);
        const Matrix logit = affine_forward(model.l2, h);
        for (std::size_t i = 0; i < idx.size(); ++i) {
          d_logit(i, 0) = (sigmoid(logit(i, 0)) - labels[idx[i]]) * inv_n;
        }
        const Matrix d_h = affine_backward(model.l2, h, d_logit, g2);
        const Matrix d_h_pre = kernels::activation_backward(Activation::relu, h_pre, d_h);
        affine_backward(model.l1, xb, d_h_pre, g1);
        adam.update({model.l1.w.data.data(), model.l1.b.data(), model.l2.w.data.data(),
                     model.l2.b.data()},
                    {g1.w.data.data(), g1.b.data(), g2.w.data.data(), g2.b.data()},
                    {model.l1.w.data.size(), model.l1.b.size(), model.l2.w.data.size(),
                     model.l2.b.size()},
                    cfg.learning_rate);
      }
    }
  }
  return model;
}

std::vector<double> probe_predict(const ProbeModel& model, const Matrix& x) {
  Matrix logit;
  if (model.linear) {
    logit = affine_forward(model.l1, x);
  } else {
    const Matrix h =
        kernels::activation_forward(Activation::relu, affine_forward(model.l1, x));
    logit = affine_forward(model.l2, h);
  }
  std::vector<double> probs(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) probs[i] = sigmoid(logit(i, 0));
  return probs;
}

double probe_accuracy(const ProbeModel& model, const Matrix& x, const std::vector<double>& labels) {
  const std::vector<double> probs = probe_predict(model, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int pred = probs[i] > 0.5 ? 1 : 0;
    if (pred == (labels[i] != 0.0 ? 1 : 0)) correct++;
  }
  return static_cast<double>(correct) / static_cast<double>(probs.size());
}

}  // namespace ithp
