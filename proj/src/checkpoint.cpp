#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ithp/config_json.hpp"
#include "ithp/model.hpp"

// Container layout: 5-byte magic "ITHP1", u32 header length, JSON header
// (config echo + tensor shapes), then each tensor as a u64 element count
// followed by that many float64 values. All integers and floats little-endian.
static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace ithp {

namespace {

constexpr char kMagic[5] = {'I', 'T', 'H', 'P', '1'};

using nlohmann::json;

json tensor_entry(const std::string& name, std::size_t rows, std::size_t cols) {
  return json{{"name", name}, {"rows", rows}, {"cols", cols}};
}

json tensor_table(const ITHPConfig& cfg) {
  json t = json::array();
  auto add_layer = [&t](const std::string& prefix, std::size_t out, std::size_t in) {
    t.push_back(tensor_entry(prefix + "/w", out, in));
    t.push_back(tensor_entry(prefix + "/b", 1, out));
  };
  for (std::size_t k = 0; k < cfg.n_levels(); ++k) {
    const std::size_t input = k == 0 ? cfg.modality_dims[0] : cfg.latent_dims[k - 1];
    const std::string p = "level" + std::to_string(k);
    add_layer(p + "/enc_l1", cfg.hidden_dims[k], input);
    add_layer(p + "/enc_mu", cfg.latent_dims[k], cfg.hidden_dims[k]);
    add_layer(p + "/enc_logvar", cfg.latent_dims[k], cfg.hidden_dims[k]);
    add_layer(p + "/det_l1", cfg.detector_hidden_dims[k], cfg.latent_dims[k]);
    add_layer(p + "/det_l2", cfg.modality_dims[k + 1], cfg.detector_hidden_dims[k]);
  }
  add_layer("predictor/l1", cfg.predictor_hidden, cfg.latent_dims.back());
  add_layer("predictor/l2", 1, cfg.predictor_hidden);
  return t;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

std::string to_string(DetectorKind kind) {
  return kind == DetectorKind::categorical ? "categorical" : "continuous";
}

std::string to_string(TaskKind kind) {
  return kind == TaskKind::binary_classification ? "binary_classification" : "regression";
}

DetectorKind detector_kind_from_string(const std::string& s) {
  if (s == "categorical") return DetectorKind::categorical;
  if (s == "continuous") return DetectorKind::continuous;
  throw std::invalid_argument("unknown detector kind: " + s);
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "binary_classification") return TaskKind::binary_classification;
  if (s == "regression") return TaskKind::regression;
  throw std::invalid_argument("unknown task kind: " + s);
}

json config_to_json(const ITHPConfig& cfg) {
  json j;
  j["n_modalities"] = cfg.n_modalities;
  j["modality_dims"] = cfg.modality_dims;
  j["latent_dims"] = cfg.latent_dims;
  j["hidden_dims"] = cfg.hidden_dims;
  j["detector_hidden_dims"] = cfg.detector_hidden_dims;
  j["predictor_hidden"] = cfg.predictor_hidden;
  j["beta"] = cfg.beta;
  j["gammas"] = cfg.gammas;
  j["lambdas"] = cfg.lambdas;
  j["alpha"] = cfg.alpha;
  json kinds = json::array();
  for (DetectorKind k : cfg.detector_kinds) kinds.push_back(to_string(k));
  j["detector_kinds"] = kinds;
  j["task_kind"] = to_string(cfg.task_kind);
  return j;
}

ITHPConfig config_from_json(const json& j) {
  ITHPConfig cfg;
  cfg.n_modalities = j.at("n_modalities").get<std::size_t>();
  cfg.modality_dims = j.at("modality_dims").get<std::vector<std::size_t>>();
  cfg.latent_dims = j.at("latent_dims").get<std::vector<std::size_t>>();
  cfg.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  cfg.detector_hidden_dims = j.at("detector_hidden_dims").get<std::vector<std::size_t>>();
  cfg.predictor_hidden = j.at("predictor_hidden").get<std::size_t>();
  cfg.beta = j.at("beta").get<double>();
  cfg.gammas = j.at("gammas").get<std::vector<double>>();
  cfg.lambdas = j.at("lambdas").get<std::vector<double>>();
  cfg.alpha = j.at("alpha").get<double>();
  for (const auto& k : j.at("detector_kinds")) {
    cfg.detector_kinds.push_back(detector_kind_from_string(k.get<std::string>()));
  }
  cfg.task_kind = task_kind_from_string(j.at("task_kind").get<std::string>());
  cfg.validate();
  return cfg;
}

void save_checkpoint(const std::filesystem::path& path, const ITHPConfig& cfg,
                     const ITHPParams& params) {
  cfg.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());

  json header;
  header["config"] = config_to_json(cfg);
  header["tensors"] = tensor_table(cfg);
  const std::string header_str = header.dump();

  os.write(kMagic, sizeof(kMagic));
  write_u32(os, static_cast<std::uint32_t>(header_str.size()));
  os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  for (const auto& span : param_spans(params)) {
    write_u64(os, span.size());
    os.write(reinterpret_cast<const char*>(span.data()),
             static_cast<std::streamsize>(span.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path.string());
}

std::pair<ITHPConfig, ITHPParams> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());

  char magic[5];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not an ITHP1 checkpoint: " + path.string());
  }
  const std::uint32_t header_len = read_u32(is);
  std::string header_str(header_len, '\0');
  is.read(header_str.data(), header_len);
  if (!is) throw std::runtime_error("truncated checkpoint header: " + path.string());

  const json header = json::parse(header_str);
  ITHPConfig cfg = config_from_json(header.at("config"));
  ITHPParams params = make_params(cfg);

  const json& tensors = header.at("tensors");
  auto spans = param_spans(params);
  if (tensors.size() != spans.size()) {
    throw std::runtime_error("checkpoint tensor table does not match config");
  }
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const std::uint64_t count = read_u64(is);
    const std::size_t rows = tensors[i].at("rows").get<std::size_t>();
    const std::size_t cols = tensors[i].at("cols").get<std::size_t>();
    if (count != spans[i].size() || rows * cols != spans[i].size()) {
      throw std::runtime_error("checkpoint tensor " +
                               tensors[i].at("name").get<std::string>() + " has wrong shape");
    }
    is.read(reinterpret_cast<char*>(spans[i].data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw std::runtime_error("truncated checkpoint tensor data: " + path.string());
  }
  return {std::move(cfg), std::move(params)};
}

}  // namespace ithp
