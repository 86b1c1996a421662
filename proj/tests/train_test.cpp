#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "ithp/data.hpp"
#include "ithp/metrics.hpp"
#include "ithp/train.hpp"

using namespace ithp;

namespace {

ITHPConfig small_config() {
  ITHPConfig cfg;
  cfg.n_modalities = 3;
  cfg.modality_dims = {8, 5, 3};
  cfg.latent_dims = {4, 3};
  cfg.hidden_dims = {8, 6};
  cfg.detector_hidden_dims = {8, 6};
  cfg.predictor_hidden = 8;
  cfg.beta = 8.0;
  cfg.gammas = {8.0};
  cfg.lambdas = {1.0};
  cfg.alpha = 1.0;
  cfg.detector_kinds = {DetectorKind::continuous, DetectorKind::continuous};
  cfg.task_kind = TaskKind::binary_classification;
  return cfg;
}

SynthSpec small_synth(std::uint64_t seed) {
  SynthSpec spec;
  spec.n = 200;
  spec.dims = {8, 5, 3};
  spec.signal_strength = 4.0;
  spec.noise = 0.3;
  spec.seed = seed;
  return spec;
}

bool params_bitwise_equal(const ITHPParams& a, const ITHPParams& b) {
  const auto sa = param_spans(a);
  const auto sb = param_spans(b);
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (std::memcmp(sa[i].data(), sb[i].data(), sa[i].size() * sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  const ITHPConfig cfg = small_config();
  ITHPParams params = init_params(cfg, 3);
  const ITHPParams before = params;
  const ITHPParams zero_grad = make_params(cfg);
  AdamState state = AdamState::init(params);
  TrainConfig tc;
  adam_step(state, params, zero_grad, tc);
  CHECK(params_bitwise_equal(params, before));
}

TEST_CASE("adam first step matches the hand-computed bias-corrected update") {
  const ITHPConfig cfg = small_config();
  ITHPParams params = make_params(cfg);
  for (auto span : param_spans(params)) {
    for (double& v : span) v = 1.0;
  }
  ITHPParams grad = make_params(cfg);
  for (auto span : param_spans(grad)) {
    for (double& v : span) v = 1.0;
  }
  AdamState state = AdamState::init(params);
  TrainConfig tc;
  tc.learning_rate = 0.1;
  adam_step(state, params, grad, tc);
  for (auto span : param_spans(params)) {
    for (double v : span) CHECK(std::fabs(v - 0.9) < 1e-6);
  }
}

TEST_CASE("fit is bitwise deterministic given the seed") {
  const ITHPConfig cfg = small_config();
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 32;
  tc.seed = 77;
  const Dataset ds = synth_make(small_synth(5));
  const FitResult a = fit(cfg, tc, ds);
  const FitResult b = fit(cfg, tc, ds);
  CHECK(params_bitwise_equal(a.params, b.params));
  REQUIRE(a.history.epochs.size() == 3);
  CHECK(a.history.epochs[2].mean.total == b.history.epochs[2].mean.total);
}

TEST_CASE("fit rejects zero epochs") {
  TrainConfig tc;
  tc.epochs = 0;
  CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
}

TEST_CASE("fit rejects mismatched modality dims") {
  ITHPConfig cfg = small_config();
  cfg.modality_dims = {9, 5, 3};
  TrainConfig tc;
  tc.epochs = 1;
  const Dataset ds = synth_make(small_synth(5));
  CHECK_THROWS_AS(fit(cfg, tc, ds), std::invalid_argument);
}

TEST_CASE("batch ranges cover every sample and keep the short tail") {
  const auto tail = batch_ranges(7, 3);
  REQUIRE(tail.size() == 3);
  CHECK(tail[0] == std::pair<std::size_t, std::size_t>{0, 3});
  CHECK(tail[1] == std::pair<std::size_t, std::size_t>{3, 6});
  CHECK(tail[2] == std::pair<std::size_t, std::size_t>{6, 7});

  const auto single = batch_ranges(37, 1000);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == std::pair<std::size_t, std::size_t>{0, 37});

  std::size_t covered = 0;
  for (const auto& [start, end] : batch_ranges(101, 8)) covered += end - start;
  CHECK(covered == 101);
}

TEST_CASE("training reduces the loss on an easy synthetic set") {
  const ITHPConfig cfg = small_config();
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    TrainConfig tc;
    tc.epochs = 50;
    tc.batch_size = 32;
    tc.learning_rate = 1e-3;
    tc.seed = seed;
    const Dataset ds = synth_make(small_synth(seed));
    const FitResult r = fit(cfg, tc, ds);
    CHECK(r.history.epochs.back().mean.total < r.history.epochs.front().mean.total);
  }
}

TEST_CASE("evaluate scores a perfectly trained model at BA 1") {
  ITHPConfig cfg = small_config();
  TrainConfig tc;
  tc.epochs = 120;
  tc.batch_size = 16;
  tc.learning_rate = 0.01;
  tc.seed = 4;
  SynthSpec spec = small_synth(3);
  spec.n = 60;
  spec.signal_strength = 6.0;
  spec.noise = 0.05;
  const Dataset ds = synth_make(spec);
  const FitResult r = fit(cfg, tc, ds);
  const MetricReport report = evaluate(cfg, r.params, ds);
  REQUIRE(report.ba.has_value());
  CHECK(*report.ba == 1.0);
  CHECK(*report.f1 == 1.0);
}

TEST_CASE("an all-one-class predictor scores BA 0.5 on balanced labels") {
  ITHPConfig cfg = small_config();
  ITHPParams params = make_params(cfg);  // all zeros
  params.predictor.l2.b[0] = 25.0;       // saturates the head toward class 1
  SynthSpec spec = small_synth(11);
  spec.n = 100;
  Dataset ds = synth_make(spec);
  // force an exactly balanced label vector
  for (std::size_t i = 0; i < ds.n(); ++i) ds.labels[i] = i < 50 ? 1.0 : 0.0;
  const MetricReport report = evaluate(cfg, params, ds);
  CHECK(*report.ba == doctest::Approx(0.5));
}

TEST_CASE("evaluate matches an independent metric recomputation") {
  const ITHPConfig cfg = small_config();
  TrainConfig tc;
  tc.epochs = 10;
  tc.batch_size = 32;
  tc.seed = 21;
  const Dataset ds = synth_make(small_synth(13));
  const FitResult r = fit(cfg, tc, ds);
  const MetricReport report = evaluate(cfg, r.params, ds);

  const std::vector<double> probs = predict(cfg, r.params, ds.modalities[0]);
  std::vector<int> preds(probs.size()), labels(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    preds[i] = probs[i] > 0.5 ? 1 : 0;
    labels[i] = ds.labels[i] != 0.0 ? 1 : 0;
  }
  CHECK(*report.ba == binary_accuracy(preds, labels));
  CHECK(*report.f1 == f1_binary(preds, labels));
  CHECK(*report.mae == mae(probs, ds.labels));
  const auto prf = weighted_prf(ConfusionCounts::from_predictions(preds, labels));
  CHECK(*report.weighted_precision == prf.precision);
  CHECK(*report.weighted_recall == prf.recall);
  CHECK(*report.weighted_fscore == prf.fscore);
}

TEST_CASE("evaluate leaves parameters untouched") {
  const ITHPConfig cfg = small_config();
  const ITHPParams params = init_params(cfg, 31);
  const ITHPParams before = params;
  const Dataset ds = synth_make(small_synth(17));
  evaluate(cfg, params, ds);
  CHECK(params_bitwise_equal(params, before));
}

TEST_CASE("fit records held-out metrics when a validation set is given") {
  const ITHPConfig cfg = small_config();
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 32;
  tc.seed = 8;
  const Dataset ds = synth_make(small_synth(23));
  const auto split = split_train_test(ds.n(), 0.25, 6);
  const Dataset train_ds = ds.select(split.train);
  const Dataset val_ds = ds.select(split.test);
  const FitResult r = fit(cfg, tc, train_ds, &val_ds);
  REQUIRE(r.history.epochs.size() == 3);
  for (const EpochStats& e : r.history.epochs) {
    REQUIRE(e.val.has_value());
    CHECK(e.val->ba.has_value());
    CHECK(*e.val->ba >= 0.0);
    CHECK(*e.val->ba <= 1.0);
  }

  const FitResult without = fit(cfg, tc, train_ds);
  CHECK(!without.history.epochs[0].val.has_value());
  // the validation pass must not influence training
  CHECK(params_bitwise_equal(r.params, without.params));
}

TEST_CASE("history CSV has the documented columns") {
  const ITHPConfig cfg = small_config();
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 64;
  tc.seed = 5;
  const Dataset ds = synth_make(small_synth(19));
  const FitResult r = fit(cfg, tc, ds);
  const auto path = std::filesystem::temp_directory_path() / "ithp_history_test.csv";
  r.history.write_csv(path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "epoch,mean_total,mean_overall,mean_task,kl0,det0,kl1,det1");
  std::string row;
  int rows = 0;
  while (std::getline(is, row)) {
    if (!row.empty()) ++rows;
  }
  CHECK(rows == 2);
  std::filesystem::remove(path);
}
