#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "ithp/data.hpp"
#include "ithp/probe.hpp"
#include "ithp/rng.hpp"

using namespace ithp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p);
  os << content;
}

const char* kToyManifest = R"({
  "name": "toy",
  "sample_count": 2,
  "modalities": [
    {"id": "a", "dim": 3, "file": "a.csv", "dtype": "csv"},
    {"id": "b", "dim": 2, "file": "b.csv", "dtype": "csv"}
  ],
  "labels": {"file": "labels.txt", "kind": "binary"}
})";

}  // namespace

TEST_CASE("load_dataset reads the checked toy fixture") {
  TempDir dir("ithp_data_toy");
  write_file(dir.path / "manifest.json", kToyManifest);
  write_file(dir.path / "a.csv", "1.5,-2,0.25\n3,4,5\n");
  write_file(dir.path / "b.csv", "0.5,1\n-1,2\n");
  write_file(dir.path / "labels.txt", "1\n0\n");

  const Dataset ds = load_dataset(dir.path / "manifest.json");
  REQUIRE(ds.modalities.size() == 2);
  CHECK(ds.n() == 2);
  CHECK(ds.modalities[0](0, 0) == 1.5);
  CHECK(ds.modalities[0](0, 1) == -2.0);
  CHECK(ds.modalities[0](1, 2) == 5.0);
  CHECK(ds.modalities[1](1, 0) == -1.0);
  CHECK(ds.labels[0] == 1.0);
  CHECK(ds.labels[1] == 0.0);
  CHECK(ds.binary_labels);
}

TEST_CASE("load_dataset rejects a width mismatch") {
  TempDir dir("ithp_data_width");
  write_file(dir.path / "manifest.json", kToyManifest);
  write_file(dir.path / "a.csv", "1,2\n3,4\n");  // dim says 3
  write_file(dir.path / "b.csv", "0,0\n0,0\n");
  write_file(dir.path / "labels.txt", "1\n0\n");
  CHECK_THROWS_AS(load_dataset(dir.path / "manifest.json"), std::runtime_error);
}

TEST_CASE("load_dataset rejects non-finite values and names the row") {
  TempDir dir("ithp_data_nan");
  write_file(dir.path / "manifest.json", kToyManifest);
  write_file(dir.path / "a.csv", "1,2,3\n4,nan,6\n");
  write_file(dir.path / "b.csv", "0,0\n0,0\n");
  write_file(dir.path / "labels.txt", "1\n0\n");
  try {
    load_dataset(dir.path / "manifest.json");
    FAIL("expected a load error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a.csv") != std::string::npos);
    CHECK(msg.find("row 2") != std::string::npos);
  }
}

TEST_CASE("load_dataset rejects trailing garbage in a cell") {
  TempDir dir("ithp_data_garbage");
  write_file(dir.path / "manifest.json", kToyManifest);
  write_file(dir.path / "a.csv", "1,2,3\n4,5x,6\n");
  write_file(dir.path / "b.csv", "0,0\n0,0\n");
  write_file(dir.path / "labels.txt", "1\n0\n");
  CHECK_THROWS_AS(load_dataset(dir.path / "manifest.json"), std::runtime_error);
}

TEST_CASE("load_dataset rejects a missing file") {
  TempDir dir("ithp_data_missing");
  write_file(dir.path / "manifest.json", kToyManifest);
  write_file(dir.path / "a.csv", "1,2,3\n4,5,6\n");
  write_file(dir.path / "labels.txt", "1\n0\n");
  CHECK_THROWS_AS(load_dataset(dir.path / "manifest.json"), std::runtime_error);
}

TEST_CASE("dataset round-trips through both file formats") {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> dist;
  Dataset ds;
  ds.binary_labels = true;
  ds.modalities.emplace_back(6, 4);
  ds.modalities.emplace_back(6, 3);
  // f32-representable values so the raw path can be compared bitwise
  for (Matrix& m : ds.modalities) {
    for (double& v : m.data) v = static_cast<double>(static_cast<float>(dist(rng)));
  }
  for (std::size_t i = 0; i < 6; ++i) ds.labels.push_back(static_cast<double>(i % 2));

  SUBCASE("raw float32, bitwise") {
    TempDir dir("ithp_roundtrip_f32");
    save_dataset(ds, "rt", {"x", "y"}, dir.path, "f32");
    const Dataset back = load_dataset(dir.path / "manifest.json");
    for (std::size_t m = 0; m < ds.modalities.size(); ++m) {
      REQUIRE(back.modalities[m].same_shape(ds.modalities[m]));
      CHECK(std::memcmp(back.modalities[m].data.data(), ds.modalities[m].data.data(),
                        ds.modalities[m].size() * sizeof(double)) == 0);
    }
    CHECK(back.labels == ds.labels);
  }

  SUBCASE("csv, 1e-12") {
    TempDir dir("ithp_roundtrip_csv");
    save_dataset(ds, "rt", {"x", "y"}, dir.path, "csv");
    const Dataset back = load_dataset(dir.path / "manifest.json");
    for (std::size_t m = 0; m < ds.modalities.size(); ++m) {
      for (std::size_t i = 0; i < ds.modalities[m].size(); ++i) {
        CHECK(back.modalities[m].data[i] ==
              doctest::Approx(ds.modalities[m].data[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("kfold worked examples") {
  const auto even = kfold(10, 5, 1);
  REQUIRE(even.size() == 5);
  for (const auto& fold : even) CHECK(fold.size() == 2);

  const auto uneven = kfold(11, 5, 1);
  CHECK(uneven[0].size() == 3);
  for (std::size_t f = 1; f < 5; ++f) CHECK(uneven[f].size() == 2);

  const auto again = kfold(11, 5, 1);
  CHECK(uneven == again);

  CHECK_THROWS_AS(kfold(3, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(kfold(10, 1, 1), std::invalid_argument);
}

TEST_CASE("kfold is a partition") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + rng() % 200;
    const std::size_t k = 2 + rng() % 7;
    const auto folds = kfold(n, k, rng());
    std::vector<int> seen(n, 0);
    for (const auto& fold : folds) {
      for (std::size_t idx : fold) {
        REQUIRE(idx < n);
        seen[idx]++;
      }
    }
    for (int count : seen) CHECK(count == 1);
    std::size_t min_size = n, max_size = 0;
    for (const auto& fold : folds) {
      min_size = std::min(min_size, fold.size());
      max_size = std::max(max_size, fold.size());
    }
    CHECK(max_size - min_size <= 1);
  }
}

TEST_CASE("split_train_test is a partition") {
  const auto split = split_train_test(100, 0.3, 9);
  CHECK(split.test.size() == 30);
  CHECK(split.train.size() == 70);
  std::vector<int> seen(100, 0);
  for (std::size_t i : split.train) seen[i]++;
  for (std::size_t i : split.test) seen[i]++;
  for (int count : seen) CHECK(count == 1);
}

TEST_CASE("synth_make is deterministic given the seed") {
  SynthSpec spec;
  spec.n = 100;
  const Dataset a = synth_make(spec);
  const Dataset b = synth_make(spec);
  for (std::size_t m = 0; m < a.modalities.size(); ++m) {
    CHECK(std::memcmp(a.modalities[m].data.data(), b.modalities[m].data.data(),
                      a.modalities[m].size() * sizeof(double)) == 0);
  }
  CHECK(a.labels == b.labels);

  SynthSpec other = spec;
  other.seed += 1;
  const Dataset c = synth_make(other);
  CHECK(std::memcmp(a.modalities[0].data.data(), c.modalities[0].data.data(),
                    a.modalities[0].size() * sizeof(double)) != 0);
}

TEST_CASE("synth_make with zero noise is linearly separable on modality 0") {
  SynthSpec spec;
  spec.n = 500;
  spec.signal_strength = 6.0;
  spec.noise = 0.0;
  spec.seed = 5;
  const Dataset ds = synth_make(spec);

  ProbeConfig pc;
  pc.hidden = 0;
  pc.epochs = 300;
  pc.batch_size = 64;
  pc.learning_rate = 0.1;
  pc.seed = 1;
  const ProbeModel probe = probe_fit(ds.modalities[0], ds.labels, pc);
  CHECK(probe_accuracy(probe, ds.modalities[0], ds.labels) == 1.0);
}

TEST_CASE("synth_make with zero signal carries no label information") {
  SynthSpec spec;
  spec.n = 2000;
  spec.signal_strength = 0.0;
  spec.noise = 1.0;
  spec.seed = 11;
  const Dataset ds = synth_make(spec);

  const auto split = split_train_test(ds.n(), 0.5, 3);
  const Dataset train = ds.select(split.train);
  const Dataset test = ds.select(split.test);
  ProbeConfig pc;
  pc.hidden = 0;
  pc.epochs = 60;
  pc.batch_size = 64;
  pc.learning_rate = 0.05;
  pc.seed = 1;
  const ProbeModel probe = probe_fit(train.modalities[0], train.labels, pc);
  const double acc = probe_accuracy(probe, test.modalities[0], test.labels);
  CHECK(std::fabs(acc - 0.5) <= 0.05);
}

TEST_CASE("synth spec round-trips through JSON") {
  TempDir dir("ithp_synth_spec");
  SynthSpec spec;
  spec.n = 123;
  spec.dims = {9, 5, 3};
  spec.signal_strength = 2.5;
  spec.noise = 0.75;
  spec.seed = 99;
  spec.save(dir.path / "spec.json");
  const SynthSpec back = SynthSpec::load(dir.path / "spec.json");
  CHECK(back.n == spec.n);
  CHECK(back.dims == spec.dims);
  CHECK(back.signal_strength == spec.signal_strength);
  CHECK(back.noise == spec.noise);
  CHECK(back.seed == spec.seed);
}

TEST_CASE("checked-in default synth spec matches the built-in defaults") {
  const SynthSpec from_file = SynthSpec::load(fs::path(ITHP_ASSET_DIR) / "synth_default.json");
  const SynthSpec built_in;
  CHECK(from_file.n == built_in.n);
  CHECK(from_file.dims == built_in.dims);
  CHECK(from_file.signal_strength == built_in.signal_strength);
  CHECK(from_file.noise == built_in.noise);
  CHECK(from_file.seed == built_in.seed);
}
