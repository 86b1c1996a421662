#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ithp/matrix.hpp"

namespace ithp {

struct ModalitySpec {
  std::string id;
  std::size_t dim = 0;
  std::string file;
  std::string dtype;  // "f32" (raw little-endian float32) or "csv"
};

struct DatasetManifest {
  std::string name;
  std::vector<ModalitySpec> modalities;
  std::string labels_file;
  std::string labels_kind;  // "binary" or "real"
  std::size_t sample_count = 0;

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

struct Dataset {
  std::vector<Matrix> modalities;  // manifest order
  std::vector<double> labels;
  bool binary_labels = true;

  std::size_t n() const { return labels.size(); }
  Dataset select(const std::vector<std::size_t>& indices) const;
};

// Loads every modality file and validates shapes, finiteness and label range
// against the manifest; errors name the offending file and row.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes manifest + modality files + labels into `dir`. `dtype` applies to
// every modality file.
void save_dataset(const Dataset& ds, const std::string& name,
                  const std::vector<std::string>& modality_ids,
                  const std::filesystem::path& dir, const std::string& dtype = "f32");

// Seeded shuffle then contiguous chunks; the first n % k folds get the extra
// sample.
std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then the last ceil(n * test_fraction) indices become the
// test set.
TrainTestSplit split_train_test(std::size_t n, double test_fraction, std::uint64_t seed);

// Planted-signal benchmark: a latent binary label drives a low-dimensional
// signal; every modality observes its own noisy linear projection of that
// signal plus modality-unique nuisance dimensions, with signal-to-noise
// falling as the modality index grows.
struct SynthSpec {
  std::size_t n = 2000;
  std::vector<std::size_t> dims{32, 16, 8};
  double signal_strength = 6.0;
  double noise = 1.5;
  std::uint64_t seed = 7;

  static SynthSpec load(const std::filesystem::path& path);
  static SynthSpec from_json_text(const std::string& text);
  void save(const std::filesystem::path& path) const;
};

Dataset synth_make(const SynthSpec& spec);

}  // namespace ithp
