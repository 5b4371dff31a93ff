#include "rar/error.hpp"
#include "rar/simulation.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rar;

namespace {

std::vector<int> band_widths(const Partition& truth, Index rows, Index cols) {
  std::vector<int> widths(3, 0);
  for (Index c = 0; c < cols; ++c) ++widths[static_cast<std::size_t>(truth.labels[static_cast<std::size_t>(c)])];
  for (Index r = 1; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      CHECK(truth.labels[static_cast<std::size_t>(r * cols + c)] == truth.labels[static_cast<std::size_t>(c)]);
  return widths;
}

}  // namespace

TEST_CASE("default layout uses three near-equal vertical bands") {
  SimConfig cfg;
  auto [truth, w] = generate_map(cfg);
  CHECK(band_widths(truth, 30, 30) == std::vector<int>{10, 10, 10});
  CHECK(w.n_edges() == 1740);
  cfg.rows = 5;
  cfg.cols = 3;
  auto [small, ws] = generate_map(cfg);
  CHECK(band_widths(small, 5, 3) == std::vector<int>{1, 1, 1});
  cfg.cols = 2;
  CHECK_THROWS_AS(generate_map(cfg), ValidationError);
}

TEST_CASE("custom layouts are accepted iff every region is connected") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> lab(1, 3);
  SimConfig cfg;
  cfg.rows = 4;
  cfg.cols = 4;
  // L-shaped region 1 along the top row and left column.
  cfg.region_layout = {1, 1, 1, 1, 1, 2, 2, 3, 1, 2, 2, 3, 1, 2, 3, 3};
  CHECK_NOTHROW(generate_map(cfg));
  int accepted = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<int> layout(16);
    for (int& v : layout) v = lab(rng);
    cfg.region_layout = layout;
    bool connected = true;
    for (int c = 1; c <= 3; ++c) {
      std::vector<std::pair<int, int>> cells;
      for (int i = 0; i < 16; ++i)
        if (layout[static_cast<std::size_t>(i)] == c) cells.emplace_back(i / 4, i % 4);
      connected = connected && oracle::grid_connected(cells);
    }
    if (connected) {
      ++accepted;
      CHECK_NOTHROW(generate_map(cfg));
    } else {
      CHECK_THROWS_AS(generate_map(cfg), ValidationError);
    }
  }
  CHECK(accepted < 200);
}

TEST_CASE("smoothing at bandwidth zero is the identity") {
  const std::vector<double> eps{1.0, -2.0, 3.5, 0.25, 7.0, -1.0};
  const Eigen::VectorXd out = gaussian_smooth_residuals(eps, 2, 3, 0.0);
  for (std::size_t i = 0; i < eps.size(); ++i) CHECK(out[static_cast<Index>(i)] == eps[i]);
}

TEST_CASE("smoothing preserves constants") {
  const std::vector<double> eps(7 * 9, 2.5);
  const Eigen::VectorXd out = gaussian_smooth_residuals(eps, 7, 9, 1.7);
  CHECK((out.array() - 2.5).abs().maxCoeff() < 1e-14);
}

TEST_CASE("smoothed impulse matches the truncated normalized kernel") {
  std::vector<double> eps(15 * 15, 0.0);
  eps[7 * 15 + 7] = 1.0;
  const Eigen::VectorXd out = gaussian_smooth_residuals(eps, 15, 15, 1.0);
  const Eigen::VectorXd expected = oracle::smoothed_impulse(15, 15, 7, 7, 1.0);
  CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-14));
  const Eigen::VectorXd corner = gaussian_smooth_residuals(
      [] {
        std::vector<double> e(8 * 6, 0.0);
        e[0] = 1.0;
        return e;
      }(),
      8, 6, 1.3);
  CHECK((corner - oracle::smoothed_impulse(8, 6, 0, 0, 1.3)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("noiseless simulation gives y = x beta exactly") {
  SimConfig cfg;
  cfg.sigma2 = 0.0;
  cfg.smooth_bandwidth = 0.0;
  const SimulatedData sim = simulate_dataset(cfg);
  for (Index i = 0; i < sim.data.size(); ++i) {
    const double b = cfg.beta_true[static_cast<std::size_t>(sim.truth.labels[static_cast<std::size_t>(i)])];
    CHECK(sim.data.y[i] == sim.data.exposure[i] * b);
  }
  CHECK_FALSE(sim.data.intercept);
  CHECK_FALSE(sim.data.has_offset());
}

TEST_CASE("simulation is deterministic in the seed") {
  SimConfig cfg;
  cfg.seed = 99;
  const SimulatedData a = simulate_dataset(cfg);
  const SimulatedData b = simulate_dataset(cfg);
  CHECK(a.data.y == b.data.y);
  CHECK(a.data.exposure == b.data.exposure);
  cfg.seed = 100;
  CHECK_FALSE(simulate_dataset(cfg).data.y == a.data.y);
}

TEST_CASE("exposure mean is within the CLT bound") {
  SimConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    const SimulatedData sim = simulate_dataset(cfg);
    CHECK(std::abs(sim.data.exposure.mean() - 5.0) < 4.0 * 2.0 / 30.0);
  }
}

TEST_CASE("Hungarian assignment solves small problems") {
  Eigen::MatrixXd cost(3, 3);
  cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  CHECK(hungarian_min_cost(cost) == std::vector<int>{1, 0, 2});
  Eigen::MatrixXd wide(2, 4);
  wide << 9, 9, 1, 9, 9, 2, 9, 9;
  CHECK(hungarian_min_cost(wide) == std::vector<int>{2, 1});
  CHECK(hungarian_min_cost(Eigen::MatrixXd(wide.transpose())) == std::vector<int>{-1, 1, 0, -1});
}

TEST_CASE("region matching follows maximal overlap") {
  const std::vector<int> truth{0, 0, 0, 1, 1, 1, 2, 2, 2};
  CHECK(match_regions({2, 2, 2, 0, 0, 0, 1, 1, 1}, 3, truth, 3) == std::vector<int>{2, 0, 1});
  CHECK(match_regions({0, 0, 0, 0, 0, 0, 1, 1, 1}, 2, truth, 3)[2] == 1);
  const auto two = match_regions({0, 0, 0, 0, 0, 0, 1, 1, 1}, 2, truth, 3);
  CHECK(std::count(two.begin(), two.end(), -1) == 1);
}

TEST_CASE("noiseless replicate has zero bias and full coverage" * doctest::test_suite("fidelity")) {
  SimConfig cfg;
  cfg.rows = 15;
  cfg.cols = 15;
  cfg.sigma2 = 0.0;
  cfg.smooth_bandwidth = 0.0;
  EvaluateOptions opt;
  const SimResult r = evaluate(1, cfg, opt);
  REQUIRE(r.failures == 0);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(r.regions[c].mean_abs_bias < 1e-9);
    CHECK(r.regions[c].coverage == 1.0);
  }
}

TEST_CASE("evaluate aggregates do not depend on the thread count") {
  SimConfig cfg;
  cfg.rows = 12;
  cfg.cols = 12;
  cfg.seed = 31;
  EvaluateOptions one, three;
  one.segment.restarts = 3;
  three.segment.restarts = 3;
  three.threads = 3;
  const SimResult a = evaluate(6, cfg, one);
  const SimResult b = evaluate(6, cfg, three);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(a.regions[c].mean == b.regions[c].mean);
    CHECK(a.regions[c].sd == b.regions[c].sd);
    CHECK(a.regions[c].coverage == b.regions[c].coverage);
  }
  CHECK(a.pooled_mean == b.pooled_mean);
  CHECK(a.mean_adjusted_rand == b.mean_adjusted_rand);
  CHECK(a.k_counts == b.k_counts);
}

TEST_CASE("coverage and Rand indices stay in the unit interval") {
  SimConfig cfg;
  cfg.rows = 12;
  cfg.cols = 12;
  EvaluateOptions opt;
  opt.segment.restarts = 2;
  const SimResult r = evaluate(3, cfg, opt);
  for (const auto& reg : r.regions) {
    CHECK(reg.coverage >= 0.0);
    CHECK(reg.coverage <= 1.0);
  }
  for (const auto& rep : r.replicates) {
    CHECK(rep.rand >= 0.0);
    CHECK(rep.rand <= 1.0);
    CHECK(rep.adjusted_rand <= 1.0);
  }
}

TEST_CASE("invalid configurations are rejected") {
  SimConfig cfg;
  cfg.tau = 0.0;
  CHECK_THROWS_AS(simulate_dataset(cfg), ValidationError);
  cfg = SimConfig{};
  cfg.smooth_bandwidth = -1.0;
  CHECK_THROWS_AS(simulate_dataset(cfg), ValidationError);
  CHECK_THROWS_AS(evaluate(0, SimConfig{}, EvaluateOptions{}), ValidationError);
}
