#include "ithp/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ithp/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw f32 modality files assume a little-endian host");

namespace ithp {

namespace {

using nlohmann::json;

[[noreturn]] void load_error(const std::filesystem::path& file, const std::string& msg) {
  throw std::runtime_error("load error in " + file.string() + ": " + msg);
}

Matrix load_csv_matrix(const std::filesystem::path& file, std::size_t n, std::size_t dim) {
  std::ifstream is(file);
  if (!is) load_error(file, "cannot open");
  Matrix m(n, dim);
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (row >= n) load_error(file, "more rows than the manifest sample_count");
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= dim) load_error(file, "row " + std::to_string(row + 1) + " has too many columns");
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
      if (end == cell.c_str() || (end != nullptr && *end != '\0')) {
        load_error(file, "row " + std::to_string(row + 1) + ": unparsable value '" + cell + "'");
      }
      if (!std::isfinite(v)) {
        load_error(file, "non-finite value at row " + std::to_string(row + 1));
      }
      m(row, col) = v;
      ++col;
    }
    if (col != dim) {
      load_error(file, "row " + std::to_string(row + 1) + " has " + std::to_string(col) +
                           " columns, manifest says " + std::to_string(dim));
    }
    ++row;
  }
  if (row != n) {
    load_error(file, "has " + std::to_string(row) + " rows, manifest says " + std::to_string(n));
  }
  return m;
}

Matrix load_f32_matrix(const std::filesystem::path& file, std::size_t n, std::size_t dim) {
  std::ifstream is(file, std::ios::binary | std::ios::ate);
  if (!is) load_error(file, "cannot open");
  const std::size_t bytes = static_cast<std::size_t>(is.tellg());
  const std::size_t expected = n * dim * sizeof(float);
  if (bytes != expected) {
    load_error(file, "size " + std::to_string(bytes) + " bytes, expected " +
                         std::to_string(expected) + " for " + std::to_string(n) + "x" +
                         std::to_string(dim) + " float32");
  }
  is.seekg(0);
  std::vector<float> raw(n * dim);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (!is) load_error(file, "short read");
  Matrix m(n, dim);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      load_error(file, "non-finite value at row " + std::to_string(i / dim + 1));
    }
    m.data[i] = static_cast<double>(raw[i]);
  }
  return m;
}

std::vector<double> load_labels(const std::filesystem::path& file, std::size_t n, bool binary) {
  std::ifstream is(file);
  if (!is) load_error(file, "cannot open");
  std::vector<double> labels;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
    if (end == line.c_str() || (end != nullptr && *end != '\0')) {
      load_error(file, "row " + std::to_string(labels.size() + 1) + ": unparsable label");
    }
    if (!std::isfinite(v)) {
      load_error(file, "non-finite label at row " + std::to_string(labels.size() + 1));
    }
    if (binary && v != 0.0 && v != 1.0) {
      load_error(file, "binary label outside {0,1} at row " + std::to_string(labels.size() + 1));
    }
    labels.push_back(v);
  }
  if (labels.size() != n) {
    load_error(file, "has " + std::to_string(labels.size()) + " labels, manifest says " +
                         std::to_string(n));
  }
  return labels;
}

void write_f32_matrix(const std::filesystem::path& file, const Matrix& m) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  std::vector<float> raw(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) raw[i] = static_cast<float>(m.data[i]);
  os.write(reinterpret_cast<const char*>(raw.data()),
           static_cast<std::streamsize>(raw.size() * sizeof(float)));
}

void write_csv_matrix(const std::filesystem::path& file, const Matrix& m) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  char buf[32];
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << buf << (j + 1 == m.cols ? "" : ",");
    }
    os << '\n';
  }
}

}  // namespace

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path.string());
  json j;
  is >> j;
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  m.sample_count = j.at("sample_count").get<std::size_t>();
  for (const auto& e : j.at("modalities")) {
    ModalitySpec spec;
    spec.id = e.at("id").get<std::string>();
    spec.dim = e.at("dim").get<std::size_t>();
    spec.file = e.at("file").get<std::string>();
    spec.dtype = e.at("dtype").get<std::string>();
    if (spec.dim == 0) throw std::runtime_error("manifest: modality dim must be positive");
    if (spec.dtype != "f32" && spec.dtype != "csv") {
      throw std::runtime_error("manifest: unknown dtype '" + spec.dtype + "'");
    }
    m.modalities.push_back(std::move(spec));
  }
  m.labels_file = j.at("labels").at("file").get<std::string>();
  m.labels_kind = j.at("labels").at("kind").get<std::string>();
  if (m.labels_kind != "binary" && m.labels_kind != "real") {
    throw std::runtime_error("manifest: labels kind must be 'binary' or 'real'");
  }
  if (m.modalities.empty()) throw std::runtime_error("manifest: no modalities");
  return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  json j;
  j["name"] = name;
  j["sample_count"] = sample_count;
  json mods = json::array();
  for (const auto& m : modalities) {
    mods.push_back(json{{"id", m.id}, {"dim", m.dim}, {"file", m.file}, {"dtype", m.dtype}});
  }
  j["modalities"] = mods;
  j["labels"] = json{{"file", labels_file}, {"kind", labels_kind}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest: " + path.string());
  os << j.dump(2) << '\n';
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.binary_labels = binary_labels;
  out.labels.reserve(indices.size());
  for (const Matrix& m : modalities) {
    Matrix sub(indices.size(), m.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      std::memcpy(sub.row(i), m.row(indices[i]), m.cols * sizeof(double));
    }
    out.modalities.push_back(std::move(sub));
  }
  for (std::size_t idx : indices) out.labels.push_back(labels[idx]);
  return out;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  const DatasetManifest manifest = DatasetManifest::load(manifest_path);
  const std::filesystem::path dir = manifest_path.parent_path();
  Dataset ds;
  ds.binary_labels = manifest.labels_kind == "binary";
  for (const auto& spec : manifest.modalities) {
    const std::filesystem::path file = dir / spec.file;
    Matrix m = spec.dtype == "csv" ? load_csv_matrix(file, manifest.sample_count, spec.dim)
                                   : load_f32_matrix(file, manifest.sample_count, spec.dim);
    ds.modalities.push_back(std::move(m));
  }
  ds.labels = load_labels(dir / manifest.labels_file, manifest.sample_count, ds.binary_labels);
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& name,
                  const std::vector<std::string>& modality_ids,
                  const std::filesystem::path& dir, const std::string& dtype) {
  if (modality_ids.size() != ds.modalities.size()) {
    throw std::invalid_argument("save_dataset: one id per modality required");
  }
  std::filesystem::create_directories(dir);
  DatasetManifest manifest;
  manifest.name = name;
  manifest.sample_count = ds.n();
  for (std::size_t m = 0; m < ds.modalities.size(); ++m) {
    const std::string file = modality_ids[m] + (dtype == "csv" ? ".csv" : ".f32");
    if (dtype == "csv") {
      write_csv_matrix(dir / file, ds.modalities[m]);
    } else {
      write_f32_matrix(dir / file, ds.modalities[m]);
    }
    manifest.modalities.push_back({modality_ids[m], ds.modalities[m].cols, file, dtype});
  }
  manifest.labels_file = "labels.txt";
  manifest.labels_kind = ds.binary_labels ? "binary" : "real";
  {
    std::ofstream os(dir / manifest.labels_file);
    if (!os) throw std::runtime_error("cannot write labels file");
    char buf[32];
    for (double v : ds.labels) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << buf << '\n';
    }
  }
  manifest.save(dir / "manifest.json");
}

std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be >= 2");
  if (n < k) throw std::invalid_argument("kfold: need at least k samples");
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  auto rng = make_rng(seed);
  std::shuffle(indices.begin(), indices.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(indices.begin() + pos, indices.begin() + pos + size);
    pos += size;
  }
  return folds;
}

TrainTestSplit split_train_test(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("split_train_test: need at least two samples");
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
    throw std::invalid_argument("split_train_test: fraction must be in (0, 1)");
  }
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  auto rng = make_rng(seed);
  std::shuffle(indices.begin(), indices.end(), rng);
  const std::size_t test_n =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n * test_fraction)));
  TrainTestSplit split;
  split.train.assign(indices.begin(), indices.end() - static_cast<std::ptrdiff_t>(test_n));
  split.test.assign(indices.end() - static_cast<std::ptrdiff_t>(test_n), indices.end());
  return split;
}

SynthSpec SynthSpec::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  SynthSpec s;
  s.n = j.at("n").get<std::size_t>();
  s.dims = j.at("dims").get<std::vector<std::size_t>>();
  s.signal_strength = j.at("signal_strength").get<double>();
  s.noise = j.at("noise").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  if (s.dims.empty()) throw std::runtime_error("synth spec: dims must be nonempty");
  for (std::size_t d : s.dims) {
    if (d == 0) throw std::runtime_error("synth spec: dims must be positive");
  }
  return s;
}

SynthSpec SynthSpec::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open synth spec: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

void SynthSpec::save(const std::filesystem::path& path) const {
  json j;
  j["n"] = n;
  j["dims"] = dims;
  j["signal_strength"] = signal_strength;
  j["noise"] = noise;
  j["seed"] = seed;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write synth spec: " + path.string());
  os << j.dump(2) << '\n';
}

Dataset synth_make(const SynthSpec& spec) {
  constexpr std::size_t kSignalDim = 4;
  const std::size_t n_mod = spec.dims.size();
  auto rng = make_rng(derive_seed(spec.seed, 0x5D47A));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  // A latent binary truth drives a low-dimensional signal with a positive
  // class margin. Modality 0 mixes that signal densely across all of its
  // columns under the full observation noise: pooled it is the richest view,
  // but no single column gives the label away. Modalities 1 and 2 carry a
  // few narrow linear projections of the same signal with lighter
  // observation noise plus modality-unique nuisance; their aggregate signal
  // share falls with the modality index. The recorded label is a noisy
  // annotation of the latent truth whose flip rate scales with the noise
  // knob, so the zero-noise dataset has exact labels and stays linearly
  // separable through the margin.
  std::vector<std::size_t> signal_cols;
  std::vector<double> gain;
  std::vector<double> obs_noise;
  for (std::size_t m = 0; m < n_mod; ++m) {
    if (m == 0) {
      signal_cols.push_back(spec.dims[0]);
      gain.push_back(0.3);
      obs_noise.push_back(spec.noise);
    } else {
      signal_cols.push_back(std::max<std::size_t>(1, spec.dims[m] / 4));
      gain.push_back(0.3 / (1.0 + 0.5 * static_cast<double>(m - 1)));
      obs_noise.push_back(0.3 * spec.noise);
    }
  }
  const double flip_rate = std::min(0.4, 0.12 * spec.noise * spec.noise);

  // Fixed per-dataset mixing matrices, one per modality.
  std::vector<Matrix> mixing;
  for (std::size_t m = 0; m < n_mod; ++m) {
    Matrix w(signal_cols[m], kSignalDim);
    for (double& v : w.data) v = normal(rng) / std::sqrt(static_cast<double>(kSignalDim));
    mixing.push_back(std::move(w));
  }

  Dataset ds;
  ds.binary_labels = true;
  for (std::size_t m = 0; m < n_mod; ++m) ds.modalities.emplace_back(spec.n, spec.dims[m]);
  ds.labels.resize(spec.n);

  const double margin = spec.signal_strength / std::sqrt(static_cast<double>(kSignalDim));
  std::bernoulli_distribution annotation_flip(flip_rate);
  std::vector<double> signal(kSignalDim);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const bool y = coin(rng);
    const bool flipped = flip_rate > 0.0 && annotation_flip(rng);
    ds.labels[i] = (y != flipped) ? 1.0 : 0.0;
    for (std::size_t d = 0; d < kSignalDim; ++d) {
      signal[d] = normal(rng) + (y ? margin : -margin);
    }
    for (std::size_t m = 0; m < n_mod; ++m) {
      double* row = ds.modalities[m].row(i);
      const Matrix& w = mixing[m];
      for (std::size_t j = 0; j < signal_cols[m]; ++j) {
        double proj = 0.0;
        for (std::size_t d = 0; d < kSignalDim; ++d) proj += w(j, d) * signal[d];
        row[j] = gain[m] * proj + obs_noise[m] * normal(rng);
      }
      for (std::size_t j = signal_cols[m]; j < spec.dims[m]; ++j) {
        row[j] = normal(rng);  // modality-unique nuisance
      }
    }
  }
  return ds;
}

}  // namespace ithp
