#include "ithp/cli.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ithp/config_json.hpp"
#include "ithp/data.hpp"
#include "ithp/model.hpp"
#include "ithp/probe.hpp"
#include "ithp/ranking.hpp"
#include "ithp/rng.hpp"
#include "ithp/train.hpp"

namespace ithp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string manifest;
  std::string synth;
  std::string beta_str, gamma_str, lambda_str, alpha_str;
  std::string latent_str, hidden_str;
  std::size_t epochs = 200;
  std::size_t batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::size_t folds = 0;
  std::string out = ".";
  std::string grid = "beta,gamma";
  std::string method = "sampen";
  std::string checkpoint;
  std::size_t iters = 10000;
  bool parallel = false;
};

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(std::stod(cell));
  }
  return out;
}

std::vector<std::size_t> parse_csv_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (double v : parse_csv_doubles(s)) out.push_back(static_cast<std::size_t>(v));
  return out;
}

struct LoadedData {
  Dataset ds;
  std::vector<std::string> ids;
  json echo;
};

LoadedData load_data(const Options& opts) {
  if (!opts.manifest.empty() && !opts.synth.empty()) {
    throw std::runtime_error("--manifest and --synth are mutually exclusive");
  }
  LoadedData data;
  if (!opts.manifest.empty()) {
    const DatasetManifest manifest = DatasetManifest::load(opts.manifest);
    data.ds = load_dataset(opts.manifest);
    for (const auto& m : manifest.modalities) data.ids.push_back(m.id);
    data.echo = json{{"manifest", opts.manifest}};
  } else if (!opts.synth.empty()) {
    const SynthSpec spec = opts.synth == "default" ? SynthSpec{} : SynthSpec::load(opts.synth);
    data.ds = synth_make(spec);
    for (std::size_t m = 0; m < data.ds.modalities.size(); ++m) {
      data.ids.push_back("m" + std::to_string(m));
    }
    data.echo = json{{"synth", json{{"n", spec.n},
                                    {"dims", spec.dims},
                                    {"signal_strength", spec.signal_strength},
                                    {"noise", spec.noise},
                                    {"seed", spec.seed}}}};
  } else {
    throw std::runtime_error("one of --manifest or --synth is required");
  }
  return data;
}

ITHPConfig build_config(const Options& opts, const Dataset& ds) {
  std::vector<std::size_t> dims;
  for (const Matrix& m : ds.modalities) dims.push_back(m.cols);
  const TaskKind task =
      ds.binary_labels ? TaskKind::binary_classification : TaskKind::regression;
  ITHPConfig cfg = ITHPConfig::defaults_for(dims, task);

  if (!opts.latent_str.empty()) {
    const auto latent = parse_csv_sizes(opts.latent_str);
    if (latent.size() != cfg.n_levels()) {
      throw std::runtime_error("--latent-dims needs one entry per level (" +
                               std::to_string(cfg.n_levels()) + ")");
    }
    cfg.latent_dims = latent;
    cfg.hidden_dims.clear();
    cfg.detector_hidden_dims.clear();
    for (std::size_t d : latent) {
      cfg.hidden_dims.push_back(d * 2);
      cfg.detector_hidden_dims.push_back(d * 2);
    }
  }
  if (!opts.hidden_str.empty()) {
    const auto hidden = parse_csv_sizes(opts.hidden_str);
    if (hidden.size() != cfg.n_levels()) {
      throw std::runtime_error("--hidden-dims needs one entry per level");
    }
    cfg.hidden_dims = hidden;
  }
  if (!opts.beta_str.empty()) cfg.beta = std::stod(opts.beta_str);
  if (!opts.gamma_str.empty()) {
    auto gammas = parse_csv_doubles(opts.gamma_str);
    if (gammas.size() == 1 && cfg.gammas.size() > 1) {
      gammas.assign(cfg.gammas.size(), gammas[0]);
    }
    if (gammas.size() != cfg.gammas.size()) {
      throw std::runtime_error("--gamma needs one value, or one per level after the first");
    }
    cfg.gammas = gammas;
  }
  if (!opts.lambda_str.empty()) {
    auto lambdas = parse_csv_doubles(opts.lambda_str);
    if (lambdas.size() == 1 && cfg.lambdas.size() > 1) {
      lambdas.assign(cfg.lambdas.size(), lambdas[0]);
    }
    if (lambdas.size() != cfg.lambdas.size()) {
      throw std::runtime_error("--lambda needs one value, or one per level after the first");
    }
    cfg.lambdas = lambdas;
  }
  if (!opts.alpha_str.empty()) cfg.alpha = std::stod(opts.alpha_str);
  cfg.validate();
  return cfg;
}

TrainConfig build_train_config(const Options& opts) {
  TrainConfig tc;
  tc.epochs = opts.epochs;
  tc.batch_size = opts.batch;
  tc.learning_rate = opts.lr;
  tc.seed = opts.seed;
  tc.validate();
  return tc;
}

json train_config_echo(const TrainConfig& tc) {
  return json{{"epochs", tc.epochs},
              {"batch_size", tc.batch_size},
              {"learning_rate", tc.learning_rate},
              {"seed", tc.seed}};
}

void write_runspec(const fs::path& out_dir, const std::string& subcommand, const json& body) {
  json spec = body;
  spec["subcommand"] = subcommand;
  std::ofstream os(out_dir / "runspec.json");
  if (!os) throw std::runtime_error("cannot write runspec.json");
  os << spec.dump(2) << '\n';
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  MetricReport mean;
  auto avg = [&reports](std::optional<double> MetricReport::*field) -> std::optional<double> {
    double acc = 0.0;
    std::size_t count = 0;
    for (const MetricReport& r : reports) {
      if (r.*field) {
        acc += *(r.*field);
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return acc / static_cast<double>(count);
  };
  mean.weighted_precision = avg(&MetricReport::weighted_precision);
  mean.weighted_recall = avg(&MetricReport::weighted_recall);
  mean.weighted_fscore = avg(&MetricReport::weighted_fscore);
  mean.ba = avg(&MetricReport::ba);
  mean.f1 = avg(&MetricReport::f1);
  mean.mae = avg(&MetricReport::mae);
  mean.corr = avg(&MetricReport::corr);
  return mean;
}

Matrix concat_columns(const std::vector<const Matrix*>& parts) {
  std::size_t cols = 0;
  for (const Matrix* p : parts) cols += p->cols;
  Matrix out(parts.front()->rows, cols);
  std::size_t offset = 0;
  for (const Matrix* p : parts) {
    for (std::size_t i = 0; i < p->rows; ++i) {
      std::memcpy(out.row(i) + offset, p->row(i), p->cols * sizeof(double));
    }
    offset += p->cols;
  }
  return out;
}

int cmd_train(const Options& opts) {
  const LoadedData data = load_data(opts);
  const ITHPConfig cfg = build_config(opts, data.ds);
  const TrainConfig tc = build_train_config(opts);
  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);

  json spec;
  spec["data"] = data.echo;
  spec["model"] = config_to_json(cfg);
  spec["train"] = train_config_echo(tc);
  spec["folds"] = opts.folds;
  spec["out"] = opts.out;
  write_runspec(out_dir, "train", spec);

  if (opts.folds == 0) {
    const FitResult result = fit(cfg, tc, data.ds);
    save_checkpoint(out_dir / "checkpoint.ithp", cfg, result.params);
    result.history.write_csv(out_dir / "history.csv");
    write_json(out_dir / "metrics.json", evaluate(cfg, result.params, data.ds).to_json());
    return 0;
  }

  const auto folds = kfold(data.ds.n(), opts.folds, tc.seed);
  std::vector<MetricReport> fold_reports;
  FitResult last;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g == f) continue;
      train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    }
    const Dataset train_ds = data.ds.select(train_idx);
    const Dataset test_ds = data.ds.select(folds[f]);
    last = fit(cfg, tc, train_ds);
    fold_reports.push_back(evaluate(cfg, last.params, test_ds));
  }
  json metrics;
  metrics["folds"] = json::array();
  for (const MetricReport& r : fold_reports) metrics["folds"].push_back(r.to_json());
  metrics["mean"] = mean_report(fold_reports).to_json();
  write_json(out_dir / "metrics.json", metrics);
  save_checkpoint(out_dir / "checkpoint.ithp", cfg, last.params);
  last.history.write_csv(out_dir / "history.csv");
  return 0;
}

int cmd_eval(const Options& opts) {
  const LoadedData data = load_data(opts);
  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);
  const fs::path ckpt =
      opts.checkpoint.empty() ? out_dir / "checkpoint.ithp" : fs::path(opts.checkpoint);
  auto [cfg, params] = load_checkpoint(ckpt);

  const MetricReport report = evaluate(cfg, params, data.ds);
  write_json(out_dir / "metrics.json", report.to_json());
  std::ofstream csv(out_dir / "metrics.csv");
  csv << report.csv_header() << '\n' << report.csv_row() << '\n';

  json spec;
  spec["data"] = data.echo;
  spec["checkpoint"] = ckpt.string();
  spec["out"] = opts.out;
  write_runspec(out_dir, "eval", spec);
  std::cout << report.to_json().dump(2) << '\n';
  return 0;
}

// Validation accuracy of a quick linear probe on the concatenated subset;
// the empty set scores as the majority-class rate.
double probe_subset_score(const Dataset& ds, const std::vector<std::size_t>& subset,
                          const TrainTestSplit& split, std::uint64_t seed) {
  std::vector<double> val_labels;
  for (std::size_t idx : split.test) val_labels.push_back(ds.labels[idx]);
  if (subset.empty()) {
    double positives = 0.0;
    for (double y : val_labels) positives += y != 0.0 ? 1.0 : 0.0;
    const double rate = positives / static_cast<double>(val_labels.size());
    return std::max(rate, 1.0 - rate);
  }
  std::vector<const Matrix*> parts;
  for (std::size_t m : subset) parts.push_back(&ds.modalities[m]);
  const Matrix all = concat_columns(parts);
  const Dataset probe_view{{all}, ds.labels, ds.binary_labels};
  const Matrix train_x = probe_view.select(split.train).modalities[0];
  const Matrix val_x = probe_view.select(split.test).modalities[0];
  std::vector<double> train_labels;
  for (std::size_t idx : split.train) train_labels.push_back(ds.labels[idx]);

  ProbeConfig pc;
  pc.hidden = 0;
  pc.epochs = 60;
  pc.batch_size = 64;
  pc.learning_rate = 0.05;
  pc.seed = seed;
  const ProbeModel model = probe_fit(train_x, train_labels, pc);
  return probe_accuracy(model, val_x, val_labels);
}

int cmd_rank(const Options& opts) {
  const LoadedData data = load_data(opts);
  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);

  RankedModalities ranked;
  if (opts.method == "sampen") {
    ranked = rank_by_sampen(data.ds.modalities);
  } else if (opts.method == "greedy") {
    if (!data.ds.binary_labels) {
      throw std::runtime_error("greedy ranking needs binary labels for the probe");
    }
    const TrainTestSplit split = split_train_test(data.ds.n(), 0.3, derive_seed(opts.seed, 21));
    ranked = greedy_rank(data.ds.modalities.size(),
                         [&](const std::vector<std::size_t>& subset) {
                           return probe_subset_score(data.ds, subset, split, opts.seed);
                         });
  } else {
    throw std::runtime_error("unknown ranking method: " + opts.method);
  }

  json out = json::array();
  for (const RankedModality& r : ranked.order) {
    json entry;
    entry["modality"] = data.ids[r.index];
    entry["score"] = std::isinf(r.score) ? json("inf") : json(r.score);
    entry["method"] = ranked.method;
    out.push_back(entry);
  }
  write_json(out_dir / "ranking.json", out);

  json spec;
  spec["data"] = data.echo;
  spec["method"] = opts.method;
  spec["seed"] = opts.seed;
  spec["out"] = opts.out;
  write_runspec(out_dir, "rank", spec);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const Options& opts) {
  const LoadedData data = load_data(opts);
  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);
  const TrainConfig tc = build_train_config(opts);
  const TrainTestSplit split = split_train_test(data.ds.n(), 0.3, derive_seed(opts.seed, 31));
  const Dataset train_ds = data.ds.select(split.train);
  const Dataset test_ds = data.ds.select(split.test);

  static const std::vector<double> kMultGrid{2, 4, 8, 16, 32, 64};
  static const std::vector<std::size_t> kLatentGrid{8, 16, 32, 64, 128, 256};

  struct Cell {
    double beta = 0.0, gamma = 0.0;
    std::size_t b0 = 0, b1 = 0;
  };
  std::vector<Cell> cells;
  const bool latent_grid = opts.grid == "latent";
  if (latent_grid) {
    if (build_config(opts, data.ds).n_levels() != 2) {
      throw std::runtime_error("--grid latent expects a 3-modality dataset");
    }
    for (std::size_t b0 : kLatentGrid) {
      for (std::size_t b1 : kLatentGrid) {
        if (b1 > b0) continue;  // lower-triangular grid
        cells.push_back({0, 0, b0, b1});
      }
    }
  } else if (opts.grid == "beta,gamma") {
    for (double beta : kMultGrid) {
      for (double gamma : kMultGrid) cells.push_back({beta, gamma, 0, 0});
    }
  } else {
    throw std::runtime_error("unknown --grid: " + opts.grid + " (use beta,gamma or latent)");
  }

  std::vector<MetricReport> results(cells.size());
  std::vector<std::string> errors(cells.size());
  const long long n_cells = static_cast<long long>(cells.size());
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (long long c = 0; c < n_cells; ++c) {
    try {
      Options cell_opts = opts;
      if (latent_grid) {
        cell_opts.latent_str =
            std::to_string(cells[c].b0) + "," + std::to_string(cells[c].b1);
      } else {
        cell_opts.beta_str = std::to_string(cells[c].beta);
        cell_opts.gamma_str = std::to_string(cells[c].gamma);
      }
      const ITHPConfig cfg = build_config(cell_opts, data.ds);
      const FitResult result = fit(cfg, tc, train_ds);
      results[c] = evaluate(cfg, result.params, test_ds);
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!errors[c].empty()) throw std::runtime_error("sweep cell failed: " + errors[c]);
  }

  std::ofstream csv(out_dir / "sweep.csv");
  if (!csv) throw std::runtime_error("cannot write sweep.csv");
  auto cell_value = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string("nan");
  };
  csv << (latent_grid ? "b0,b1" : "beta,gamma") << ",ba,f1,mae,corr\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (latent_grid) {
      csv << cells[c].b0 << ',' << cells[c].b1;
    } else {
      csv << cells[c].beta << ',' << cells[c].gamma;
    }
    csv << ',' << cell_value(results[c].ba) << ',' << cell_value(results[c].f1) << ','
        << cell_value(results[c].mae) << ',' << cell_value(results[c].corr) << '\n';
  }

  json spec;
  spec["data"] = data.echo;
  spec["grid"] = opts.grid;
  spec["train"] = train_config_echo(tc);
  spec["cells"] = cells.size();
  spec["parallel"] = opts.parallel;
  spec["out"] = opts.out;
  write_runspec(out_dir, "sweep", spec);
  return 0;
}

int cmd_synth(const Options& opts) {
  if (opts.synth.empty()) throw std::runtime_error("synth subcommand needs --synth");
  const SynthSpec spec = opts.synth == "default" ? SynthSpec{} : SynthSpec::load(opts.synth);
  const Dataset ds = synth_make(spec);
  const fs::path out_dir(opts.out);
  std::vector<std::string> ids;
  for (std::size_t m = 0; m < ds.modalities.size(); ++m) ids.push_back("m" + std::to_string(m));
  save_dataset(ds, "synth", ids, out_dir, "f32");
  spec.save(out_dir / "synth_spec.json");

  json echo;
  echo["synth"] = json{{"n", spec.n},
                       {"dims", spec.dims},
                       {"signal_strength", spec.signal_strength},
                       {"noise", spec.noise},
                       {"seed", spec.seed}};
  echo["out"] = opts.out;
  write_runspec(out_dir, "synth", echo);
  return 0;
}

int cmd_bench(const Options& opts) {
  const LoadedData data = load_data(opts);
  const ITHPConfig cfg = build_config(opts, data.ds);
  const ITHPParams params = init_params(cfg, derive_seed(opts.seed, 41));
  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);

  // Detector heads must not influence inference; check before timing.
  const std::size_t probe_rows = std::min<std::size_t>(data.ds.n(), 16);
  Matrix probe(probe_rows, cfg.modality_dims[0]);
  for (std::size_t i = 0; i < probe_rows; ++i) {
    std::memcpy(probe.row(i), data.ds.modalities[0].row(i),
                cfg.modality_dims[0] * sizeof(double));
  }
  const std::vector<double> base_out = predict(cfg, params, probe);
  ITHPParams perturbed = params;
  for (LevelParams& lp : perturbed.levels) {
    for (double& v : lp.det_l1.w.data) v += 123.456;
    for (double& v : lp.det_l2.w.data) v -= 654.321;
  }
  const std::vector<double> perturbed_out = predict(cfg, perturbed, probe);
  if (std::memcmp(base_out.data(), perturbed_out.data(),
                  base_out.size() * sizeof(double)) != 0) {
    throw std::runtime_error("detector-inactive invariant violated; refusing to benchmark");
  }

  const std::size_t iters = std::max<std::size_t>(opts.iters, 10000);
  Matrix sample(1, cfg.modality_dims[0]);

  auto t0 = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (std::size_t i = 0; i < iters; ++i) {
    const std::size_t row = i % data.ds.n();
    std::memcpy(sample.row(0), data.ds.modalities[0].row(row),
                cfg.modality_dims[0] * sizeof(double));
    sink += predict(cfg, params, sample)[0];
  }
  auto t1 = std::chrono::steady_clock::now();
  const double ithp_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(iters);

  // Concatenation + two-layer MLP baseline over all modalities.
  std::vector<const Matrix*> parts;
  for (const Matrix& m : data.ds.modalities) parts.push_back(&m);
  const Matrix all = concat_columns(parts);
  ProbeModel baseline;
  baseline.linear = false;
  baseline.l1 = AffineLayer(64, all.cols);
  baseline.l2 = AffineLayer(1, 64);
  auto rng = make_rng(derive_seed(opts.seed, 42));
  glorot_init(baseline.l1, rng);
  glorot_init(baseline.l2, rng);

  Matrix concat_sample(1, all.cols);
  t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < iters; ++i) {
    const std::size_t row = i % all.rows;
    std::memcpy(concat_sample.row(0), all.row(row), all.cols * sizeof(double));
    sink += probe_predict(baseline, concat_sample)[0];
  }
  t1 = std::chrono::steady_clock::now();
  const double baseline_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(iters);

  json out;
  out["iters"] = iters;
  out["ithp_ms_per_sample"] = ithp_ms;
  out["concat_mlp_ms_per_sample"] = baseline_ms;
  out["checksum"] = sink;  // keeps the timed loops from being optimized away
  write_json(out_dir / "bench.json", out);
  std::cout << out.dump(2) << '\n';

  json spec;
  spec["data"] = data.echo;
  spec["iters"] = iters;
  spec["seed"] = opts.seed;
  spec["out"] = opts.out;
  write_runspec(out_dir, "bench", spec);
  return 0;
}

void add_data_flags(CLI::App* cmd, Options& opts) {
  cmd->add_option("--manifest", opts.manifest, "dataset manifest JSON");
  cmd->add_option("--synth", opts.synth, "synthetic spec JSON path, or 'default'");
}

void add_model_flags(CLI::App* cmd, Options& opts) {
  cmd->add_option("--beta", opts.beta_str, "level-0 relevance multiplier");
  cmd->add_option("--gamma", opts.gamma_str, "subsequent-level multipliers (comma list for N>3)");
  cmd->add_option("--lambda", opts.lambda_str, "level weights (comma list)");
  cmd->add_option("--alpha", opts.alpha_str, "task loss weight");
  cmd->add_option("--latent-dims", opts.latent_str, "comma list, one per level");
  cmd->add_option("--hidden-dims", opts.hidden_str, "comma list, one per level");
}

void add_train_flags(CLI::App* cmd, Options& opts) {
  cmd->add_option("--epochs", opts.epochs, "training epochs");
  cmd->add_option("--batch", opts.batch, "minibatch size");
  cmd->add_option("--lr", opts.lr, "Adam learning rate");
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("ithp");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_run(static_cast<int>(argv.size()), argv.data());
}

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"Hierarchical information-bottleneck multimodal trainer"};
  app.require_subcommand(1);
  Options opts;

  CLI::App* train_cmd = app.add_subcommand("train", "fit the model; checkpoint + history CSV");
  add_data_flags(train_cmd, opts);
  add_model_flags(train_cmd, opts);
  add_train_flags(train_cmd, opts);
  train_cmd->add_option("--seed", opts.seed, "run seed");
  train_cmd->add_option("--folds", opts.folds, "k-fold evaluation protocol");
  train_cmd->add_option("--out", opts.out, "output directory");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_data_flags(eval_cmd, opts);
  eval_cmd->add_option("--checkpoint", opts.checkpoint, "checkpoint path (default <out>/checkpoint.ithp)");
  eval_cmd->add_option("--out", opts.out, "output directory");

  CLI::App* rank_cmd = app.add_subcommand("rank", "order modalities by information richness");
  add_data_flags(rank_cmd, opts);
  rank_cmd->add_option("--method", opts.method, "sampen or greedy")
      ->check(CLI::IsMember({"sampen", "greedy"}));
  rank_cmd->add_option("--seed", opts.seed, "probe seed (greedy)");
  rank_cmd->add_option("--out", opts.out, "output directory");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "hyperparameter grid; one metrics row per cell");
  add_data_flags(sweep_cmd, opts);
  add_model_flags(sweep_cmd, opts);
  add_train_flags(sweep_cmd, opts);
  sweep_cmd->add_option("--grid", opts.grid, "'beta,gamma' or 'latent'");
  sweep_cmd->add_option("--seed", opts.seed, "run seed");
  sweep_cmd->add_flag("--parallel", opts.parallel, "run independent cells in parallel");
  sweep_cmd->add_option("--out", opts.out, "output directory");

  CLI::App* synth_cmd = app.add_subcommand("synth", "materialize a synthetic dataset");
  synth_cmd->add_option("--synth", opts.synth, "synthetic spec JSON path, or 'default'");
  synth_cmd->add_option("--out", opts.out, "output directory");

  CLI::App* bench_cmd = app.add_subcommand("bench", "per-sample inference latency");
  add_data_flags(bench_cmd, opts);
  add_model_flags(bench_cmd, opts);
  bench_cmd->add_option("--iters", opts.iters, "timed calls (min 10000)");
  bench_cmd->add_option("--seed", opts.seed, "parameter init seed");
  bench_cmd->add_option("--out", opts.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (train_cmd->parsed()) return cmd_train(opts);
    if (eval_cmd->parsed()) return cmd_eval(opts);
    if (rank_cmd->parsed()) return cmd_rank(opts);
    if (sweep_cmd->parsed()) return cmd_sweep(opts);
    if (synth_cmd->parsed()) return cmd_synth(opts);
    if (bench_cmd->parsed()) return cmd_bench(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace ithp
