#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "ithp/ranking.hpp"
#include "test_util.hpp"

using namespace ithp;

namespace {

// Naive reimplementation of the counting loop: materializes every window
// before comparing, and recomputes the tolerance the slow way.
double brute_sample_entropy(const Matrix& data, std::size_t m, double r_factor) {
  std::vector<double> all(data.data);
  double mean = 0.0;
  for (double v : all) mean += v;
  mean /= static_cast<double>(all.size());
  double var = 0.0;
  for (double v : all) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(all.size()));
  if (sd == 0.0) return 0.0;
  const double r = r_factor * sd;

  auto window = [&](std::size_t row, std::size_t start, std::size_t len) {
    std::vector<double> w(len);
    for (std::size_t i = 0; i < len; ++i) w[i] = data(row, start + i);
    return w;
  };
  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
  };

  const std::size_t d = data.cols;
  long b_count = 0, a_count = 0;
  for (std::size_t row = 0; row < data.rows; ++row) {
    for (std::size_t i = 0; i + m < d; ++i) {
      if (dist(window(row, i, m), window(row, i + 1, m)) < r) {
        ++b_count;
        if (i + m + 2 < d && dist(window(row, i, m + 1), window(row, i + 1, m + 1)) < r) {
          ++a_count;
        }
      }
    }
  }
  if (b_count == 0 || a_count == 0) return std::numeric_limits<double>::infinity();
  return -std::log(static_cast<double>(a_count) / static_cast<double>(b_count));
}

}  // namespace

TEST_CASE("sample_entropy degenerate conventions") {
  const Matrix constant(5, 8, 3.25);
  CHECK(sample_entropy(constant) == 0.0);

  Matrix ramp(1, 6);
  for (std::size_t j = 0; j < 6; ++j) ramp(0, j) = static_cast<double>(j + 1);
  CHECK(std::isinf(sample_entropy(ramp)));

  Matrix too_narrow(2, 3);
  CHECK_THROWS_AS(sample_entropy(too_narrow), std::invalid_argument);
}

TEST_CASE("sample_entropy equals the brute-force counting oracle exactly") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng() % 50;
    const std::size_t cols = 5 + rng() % 12;
    // Small spread so that window matches actually occur.
    const Matrix m = test_util::uniform_matrix(rows, cols, rng, 0.0, 0.35);
    const double got = sample_entropy(m);
    const double want = brute_sample_entropy(m, 2, 0.2);
    if (std::isinf(want)) {
      CHECK(std::isinf(got));
    } else {
      CHECK(got == want);
    }
  }
}

TEST_CASE("sample_entropy is invariant under a constant shift") {
  std::mt19937_64 rng(37);
  const Matrix m = test_util::uniform_matrix(20, 10, rng, 0.0, 0.3);
  Matrix shifted = m;
  for (double& v : shifted.data) v += 17.5;
  CHECK(sample_entropy(m) == sample_entropy(shifted));
}

TEST_CASE("rank_by_sampen ordering") {
  std::mt19937_64 rng(41);
  SUBCASE("single modality") {
    const std::vector<Matrix> one{test_util::random_matrix(10, 8, rng)};
    const auto ranked = rank_by_sampen(one);
    REQUIRE(ranked.order.size() == 1);
    CHECK(ranked.order[0].index == 0);
    CHECK(ranked.method == "sampen");
  }
  SUBCASE("constant modality ranks last") {
    std::vector<Matrix> mods;
    mods.push_back(Matrix(10, 8, 1.0));                       // score 0
    mods.push_back(test_util::random_matrix(10, 8, rng));     // score > 0 or +inf
    const auto ranked = rank_by_sampen(mods);
    CHECK(ranked.order[0].index == 1);
    CHECK(ranked.order[1].index == 0);
  }
  SUBCASE("ties preserve input order") {
    std::vector<Matrix> mods;
    mods.push_back(Matrix(4, 8, 2.0));
    mods.push_back(Matrix(4, 8, 5.0));  // also constant -> score 0
    const auto ranked = rank_by_sampen(mods);
    CHECK(ranked.order[0].index == 0);
    CHECK(ranked.order[1].index == 1);
  }
}

TEST_CASE("greedy_rank on a modular function is a descending sort") {
  const std::vector<double> weights{3.0, 2.0, 1.0};
  const auto ranked = greedy_rank(3, [&](const std::vector<std::size_t>& s) {
    double total = 0.0;
    for (std::size_t i : s) total += weights[i];
    return total;
  });
  REQUIRE(ranked.order.size() == 3);
  CHECK(ranked.order[0].index == 0);
  CHECK(ranked.order[1].index == 1);
  CHECK(ranked.order[2].index == 2);
  CHECK(ranked.order[0].score == doctest::Approx(3.0));
  CHECK(ranked.order[2].score == doctest::Approx(1.0));
}

TEST_CASE("greedy_rank single modality") {
  const auto ranked = greedy_rank(1, [](const std::vector<std::size_t>& s) {
    return static_cast<double>(s.size());
  });
  REQUIRE(ranked.order.size() == 1);
  CHECK(ranked.order[0].index == 0);
}

TEST_CASE("greedy_rank never repeats and covers every modality") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> weights(5);
    for (double& w : weights) w = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const auto ranked = greedy_rank(5, [&](const std::vector<std::size_t>& s) {
      double total = 0.0;
      for (std::size_t i : s) total += weights[i];
      return total;
    });
    REQUIRE(ranked.order.size() == 5);
    std::vector<bool> seen(5, false);
    for (const auto& r : ranked.order) {
      CHECK(!seen[r.index]);
      seen[r.index] = true;
    }
  }
}

TEST_CASE("greedy prefix achieves (1 - 1/e) of the exhaustive coverage optimum") {
  std::mt19937_64 rng(47);
  const double guarantee = 1.0 - 1.0 / std::exp(1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // Random weighted coverage over a 12-element universe.
    constexpr std::size_t kUniverse = 12;
    constexpr std::size_t kMods = 4;
    std::vector<double> weight(kUniverse);
    for (double& w : weight) w = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    std::vector<std::vector<bool>> covers(kMods, std::vector<bool>(kUniverse, false));
    for (auto& cover : covers) {
      for (std::size_t u = 0; u < kUniverse; ++u) cover[u] = rng() % 2 == 0;
    }
    auto value = [&](const std::vector<std::size_t>& s) {
      double total = 0.0;
      for (std::size_t u = 0; u < kUniverse; ++u) {
        for (std::size_t m : s) {
          if (covers[m][u]) {
            total += weight[u];
            break;
          }
        }
      }
      return total;
    };

    const auto ranked = greedy_rank(kMods, value);
    REQUIRE(ranked.order.size() == kMods);

    for (std::size_t prefix = 1; prefix <= kMods; ++prefix) {
      std::vector<std::size_t> greedy_set;
      for (std::size_t i = 0; i < prefix; ++i) greedy_set.push_back(ranked.order[i].index);
      const double greedy_value = value(greedy_set);

      double best = 0.0;
      for (unsigned mask = 0; mask < (1u << kMods); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != prefix) continue;
        std::vector<std::size_t> subset;
        for (std::size_t m = 0; m < kMods; ++m) {
          if (mask & (1u << m)) subset.push_back(m);
        }
        best = std::max(best, value(subset));
      }
      CHECK(greedy_value >= guarantee * best - 1e-12);
    }
  }
}
