#pragma once

#include <cstdint>
#include <vector>

#include "ithp/affine.hpp"
#include "ithp/matrix.hpp"

namespace ithp {

// Small standalone binary classifier: logistic regression (hidden = 0) or a
// two-layer ReLU MLP, trained with Adam. Used as the unimodal baseline, as
// the quick subset scorer behind greedy ranking, and as the concatenation
// baseline in the latency benchmark.
struct ProbeConfig {
  std::size_t hidden = 0;  // 0 -> linear
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

struct ProbeModel {
  AffineLayer l1;  // input -> hidden, or input -> 1 when linear
  AffineLayer l2;  // hidden -> 1; unused when linear
  bool linear = true;
};

ProbeModel probe_fit(const Matrix& x, const std::vector<double>& labels, const ProbeConfig& cfg);

// Probability of the positive class, one per row.
std::vector<double> probe_predict(const ProbeModel& model, const Matrix& x);

double probe_accuracy(const ProbeModel& model, const Matrix& x, const std::vector<double>& labels);

}  // namespace ithp
