#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ithp/matrix.hpp"

namespace ithp {

struct RankedModality {
  std::size_t index = 0;
  double score = 0.0;
};

struct RankedModalities {
  std::vector<RankedModality> order;
  std::string method;  // "sampen" or "greedy"
};

// Sample entropy over a modality matrix, counting only each template against
// its immediate successor window within the same sample (this is deliberately
// not the classical all-pairs SampEn; scores would differ). Tolerance is
// r_factor times the standard deviation pooled over all entries. Zero counts
// return +inf; constant data returns 0 before any counting.
double sample_entropy(const Matrix& modality, std::size_t m = 2, double r_factor = 0.2);

// Descending by score; ties keep input order.
RankedModalities rank_by_sampen(std::span<const Matrix> modalities, std::size_t m = 2,
                                double r_factor = 0.2);

// Greedy marginal-gain selection over modality indices 0..n-1. `evaluate`
// scores a subset; each selected index is recorded with its marginal gain.
RankedModalities greedy_rank(std::size_t n_modalities,
                             const std::function<double(const std::vector<std::size_t>&)>& evaluate);

}  // namespace ithp
