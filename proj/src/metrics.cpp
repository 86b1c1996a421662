#include "ithp/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ithp {

namespace {

void check_binary_inputs(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw std::invalid_argument("prediction/label length mismatch");
  }
  if (preds.empty()) throw std::invalid_argument("empty prediction vector");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if ((preds[i] != 0 && preds[i] != 1) || (labels[i] != 0 && labels[i] != 1)) {
      throw std::invalid_argument("binary metrics expect values in {0, 1}");
    }
  }
}

double safe_rate(long num, long denom) { return denom == 0 ? 0.0 : static_cast<double>(num) / denom; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ConfusionCounts ConfusionCounts::from_predictions(std::span<const int> preds,
                                                  std::span<const int> labels) {
  check_binary_inputs(preds, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (int cls = 0; cls < 2; ++cls) {
      const bool pred_is = preds[i] == cls;
      const bool label_is = labels[i] == cls;
      if (pred_is && label_is) c.tp[cls]++;
      if (pred_is && !label_is) c.fp[cls]++;
      if (!pred_is && label_is) c.fn[cls]++;
      if (!pred_is && !label_is) c.tn[cls]++;
    }
    c.support[labels[i]]++;
  }
  return c;
}

WeightedPRF weighted_prf(const ConfusionCounts& c) {
  const long total = c.support[0] + c.support[1];
  if (total == 0) throw std::invalid_argument("weighted_prf: no samples");
  WeightedPRF out;
  for (int cls = 0; cls < 2; ++cls) {
    const double precision = safe_rate(c.tp[cls], c.tp[cls] + c.fp[cls]);
    const double recall = safe_rate(c.tp[cls], c.tp[cls] + c.fn[cls]);
    const double f =
        precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    const double w = static_cast<double>(c.support[cls]);
    out.precision += w * precision;
    out.recall += w * recall;
    out.fscore += w * f;
  }
  out.precision /= total;
  out.recall /= total;
  out.fscore /= total;
  return out;
}

double binary_accuracy(std::span<const int> preds, std::span<const int> labels) {
  check_binary_inputs(preds, labels);
  long correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == labels[i]) correct++;
  }
  return static_cast<double>(correct) / preds.size();
}

double f1_binary(std::span<const int> preds, std::span<const int> labels) {
  check_binary_inputs(preds, labels);
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1 && labels[i] == 1) tp++;
    if (preds[i] == 1 && labels[i] == 0) fp++;
    if (preds[i] == 0 && labels[i] == 1) fn++;
  }
  const double precision = safe_rate(tp, tp + fp);
  const double recall = safe_rate(tp, tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double mae(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) throw std::invalid_argument("mae: length mismatch");
  if (preds.empty()) throw std::invalid_argument("mae: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) acc += std::fabs(preds[i] - targets[i]);
  return acc / preds.size();
}

double pearson_corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson_corr: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson_corr: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::domain_error("pearson_corr: constant input has no defined correlation");
  }
  return sxy / std::sqrt(sxx * syy);
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("weighted_precision", weighted_precision);
  put("weighted_recall", weighted_recall);
  put("weighted_fscore", weighted_fscore);
  put("ba", ba);
  put("f1", f1);
  put("mae", mae);
  put("corr", corr);
  return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport r;
  auto get = [&j](const char* key) -> std::optional<double> {
    if (j.contains(key)) return j.at(key).get<double>();
    return std::nullopt;
  };
  r.weighted_precision = get("weighted_precision");
  r.weighted_recall = get("weighted_recall");
  r.weighted_fscore = get("weighted_fscore");
  r.ba = get("ba");
  r.f1 = get("f1");
  r.mae = get("mae");
  r.corr = get("corr");
  return r;
}

std::string MetricReport::csv_header() const {
  std::string out;
  auto put = [&out](const char* key, const std::optional<double>& v) {
    if (!v) return;
    if (!out.empty()) out += ',';
    out += key;
  };
  put("weighted_precision", weighted_precision);
  put("weighted_recall", weighted_recall);
  put("weighted_fscore", weighted_fscore);
  put("ba", ba);
  put("f1", f1);
  put("mae", mae);
  put("corr", corr);
  return out;
}

std::string MetricReport::csv_row() const {
  std::string out;
  auto put = [&out](const std::optional<double>& v) {
    if (!v) return;
    if (!out.empty()) out += ',';
    out += fmt(*v);
  };
  put(weighted_precision);
  put(weighted_recall);
  put(weighted_fscore);
  put(ba);
  put(f1);
  put(mae);
  put(corr);
  return out;
}

}  // namespace ithp
