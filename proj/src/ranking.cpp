#include "ithp/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ithp {

namespace {

// Euclidean distance between the length-`len` windows starting at a and b.
double window_distance(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double pooled_std(const Matrix& m) {
  const double n = static_cast<double>(m.size());
  double mean = 0.0;
  for (double v : m.data) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : m.data) var += (v - mean) * (v - mean);
  return std::sqrt(var / n);
}

}  // namespace

double sample_entropy(const Matrix& modality, std::size_t m, double r_factor) {
  if (modality.cols < m + 2) {
    throw std::invalid_argument("sample_entropy: need at least m + 2 features, got " +
                                std::to_string(modality.cols));
  }
  const double sd = pooled_std(modality);
  if (sd == 0.0) return 0.0;  // degenerate convention
  const double r = r_factor * sd;

  const std::size_t d = modality.cols;
  long long count_b = 0;
  long long count_a = 0;
  for (std::size_t s = 0; s < modality.rows; ++s) {
    const double* sample = modality.row(s);
    for (std::size_t i = 0; i + m < d; ++i) {
      if (window_distance(sample + i, sample + i + 1, m) < r) {
        count_b += 1;
        if (i + m + 2 < d && window_distance(sample + i, sample + i + 1, m + 1) < r) {
          count_a += 1;
        }
      }
    }
  }
  if (count_b == 0 || count_a == 0) {
    return std::numeric_limits<double>::infinity();  // maximal complexity
  }
  return -std::log(static_cast<double>(count_a) / static_cast<double>(count_b));
}

RankedModalities rank_by_sampen(std::span<const Matrix> modalities, std::size_t m,
                                double r_factor) {
  if (modalities.empty()) throw std::invalid_argument("rank_by_sampen: no modalities");
  RankedModalities ranked;
  ranked.method = "sampen";
  for (std::size_t i = 0; i < modalities.size(); ++i) {
    ranked.order.push_back({i, sample_entropy(modalities[i], m, r_factor)});
  }
  std::stable_sort(ranked.order.begin(), ranked.order.end(),
                   [](const RankedModality& a, const RankedModality& b) { return a.score > b.score; });
  return ranked;
}

RankedModalities greedy_rank(std::size_t n_modalities,
                             const std::function<double(const std::vector<std::size_t>&)>& evaluate) {
  RankedModalities ranked;
  ranked.method = "greedy";
  std::vector<std::size_t> selected;
  std::vector<bool> in_set(n_modalities, false);
  double current = evaluate(selected);

  while (selected.size() < n_modalities) {
    double best_improvement = -std::numeric_limits<double>::infinity();
    std::size_t best = n_modalities;  // null
    for (std::size_t cand = 0; cand < n_modalities; ++cand) {
      if (in_set[cand]) continue;
      std::vector<std::size_t> trial = selected;
      trial.push_back(cand);
      const double improvement = evaluate(trial) - current;
      if (improvement > best_improvement) {
        best_improvement = improvement;
        best = cand;
      }
    }
    if (best == n_modalities) break;  // null candidate
    selected.push_back(best);
    in_set[best] = true;
    current += best_improvement;
    ranked.order.push_back({best, best_improvement});
  }
  return ranked;
}

}  // namespace ithp
