#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

namespace ithp {

// Binary confusion bookkeeping, kept per class so the support-weighted
// averages fall out directly.
struct ConfusionCounts {
  std::array<long, 2> tp{0, 0};
  std::array<long, 2> fp{0, 0};
  std::array<long, 2> fn{0, 0};
  std::array<long, 2> tn{0, 0};
  std::array<long, 2> support{0, 0};

  static ConfusionCounts from_predictions(std::span<const int> preds, std::span<const int> labels);
};

struct WeightedPRF {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
};

// Support-weighted per-class precision/recall/F. Classes with an undefined
// rate (zero denominator) contribute 0.
WeightedPRF weighted_prf(const ConfusionCounts& c);

double binary_accuracy(std::span<const int> preds, std::span<const int> labels);
double f1_binary(std::span<const int> preds, std::span<const int> labels);
double mae(std::span<const double> preds, std::span<const double> targets);
// Throws std::domain_error if either input is constant.
double pearson_corr(std::span<const double> x, std::span<const double> y);

struct MetricReport {
  std::optional<double> weighted_precision;
  std::optional<double> weighted_recall;
  std::optional<double> weighted_fscore;
  std::optional<double> ba;
  std::optional<double> f1;
  std::optional<double> mae;
  std::optional<double> corr;

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& j);
  std::string csv_header() const;  // only the populated fields
  std::string csv_row() const;
};

}  // namespace ithp
