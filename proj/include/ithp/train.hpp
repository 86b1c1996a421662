#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ithp/data.hpp"
#include "ithp/metrics.hpp"
#include "ithp/model.hpp"

namespace ithp {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

// Flat first/second moment buffers over the fixed parameter-span order.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  static AdamState init(const ITHPParams& params);
};

// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, ITHPParams& params, const ITHPParams& grad,
               const TrainConfig& tc);

struct EpochStats {
  LossBreakdown mean;
  std::optional<MetricReport> val;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;

  // epoch, mean_total, mean_overall, mean_task, then per-level kl/det columns.
  void write_csv(const std::filesystem::path& path) const;
};

struct FitResult {
  ITHPParams params;
  TrainHistory history;
};

// Minibatch training per the fixed epoch budget; shuffle-per-epoch, final
// short batch kept. Deterministic given (seed, config, dataset). If `val` is
// given, each epoch records held-out metrics.
FitResult fit(const ITHPConfig& cfg, const TrainConfig& tc, const Dataset& train,
              const Dataset* val = nullptr);

// Runs the deterministic inference path over the whole dataset and scores it
// according to cfg.task_kind.
MetricReport evaluate(const ITHPConfig& cfg, const ITHPParams& params, const Dataset& ds);

// Assembles the minibatch with modalities in chain order.
Batch make_batch(const Dataset& ds, const std::vector<std::size_t>& indices);

// Half-open [start, end) minibatch ranges covering n samples; the final short
// batch is kept.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n,
                                                              std::size_t batch_size);

}  // namespace ithp
