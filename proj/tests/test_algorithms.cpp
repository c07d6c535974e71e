#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gpucb/algorithms.hpp"
#include "gpucb/harness.hpp"
#include "gpucb/rkhs.hpp"
#include "support.hpp"

using namespace gpucb;
using oracle::point;

namespace {

// Dense posterior of every candidate from the raw history, deduplicated the
// same way the library does it (effective points only).
std::vector<oracle::Posterior> dense_all(const History& h, std::span<const Point> candidates) {
  std::vector<double> values;
  for (const auto i : h.effective_indices()) values.push_back(h.values()[i]);
  const auto pts = h.effective_points();
  std::vector<oracle::Posterior> out;
  for (const auto& x : candidates) {
    out.push_back(oracle::dense_posterior(h.spec(), pts, values, x, kGramJitter));
  }
  return out;
}

double ei_oracle(double mu, double sigma, double best) {
  if (sigma <= 1e-12) return std::max(0.0, mu - best);
  const double z = (mu - best) / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return (mu - best) * cdf + sigma * pdf;
}

template <typename F>
std::size_t brute_argmax(std::size_t n, F score) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (score(i) > score(best)) best = i;
  }
  return best;
}

}  // namespace

TEST_SUITE("algorithms") {
  TEST_CASE("ucb on an empty history picks index 0") {
    const auto grid = make_grid(5, 2);
    const History h(KernelSpec::squared_exponential(0.25), 2, grid);
    CHECK(select_ucb(h.candidate_posterior(), 2.0) == 0);
    CHECK(select_ucb(h, grid, 2.0) == 0);
  }

  TEST_CASE("pure exploitation returns the observed maximizer") {
    const auto grid = make_grid(5, 2);
    History h(KernelSpec::squared_exponential(0.25), 2, grid);
    h.extend(grid[12], 0.8);
    CHECK(select_ucb(h.candidate_posterior(), 0.0) == 12);
  }

  TEST_CASE("ucb matches exhaustive dense scoring") {
    const auto spec = KernelSpec::squared_exponential(0.25);
    const std::vector<Point> cands{point({0.1, 0.1}), point({0.5, 0.4}), point({0.9, 0.8})};
    History h(spec, 2, cands);
    h.extend(point({0.2, 0.2}), 0.3);
    h.extend(point({0.7, 0.6}), -0.4);
    const auto dense = dense_all(h, cands);
    for (const double beta : {0.0, 0.5, 1.0, 3.0}) {
      const auto expected = brute_argmax(cands.size(), [&](std::size_t i) {
        return dense[i].mean + beta * std::sqrt(std::max(0.0, dense[i].var));
      });
      CHECK(select_ucb(h.candidate_posterior(), beta) == expected);
    }
  }

  TEST_CASE("expected improvement closed form") {
    CHECK(expected_improvement(0.2, 0.0, 0.5) == 0.0);
    CHECK(expected_improvement(0.5, 0.0, 0.5) == 0.0);
    CHECK(expected_improvement(0.9, 1e-13, 0.5) == doctest::Approx(0.4));
    CHECK(expected_improvement(0.3, 1.0, 0.3) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(expected_improvement(0.3, 1.0, 0.3) == doctest::Approx(0.39894).epsilon(1e-5));
    for (const double mu : {-1.0, -0.2, 0.0, 0.4, 2.0}) {
      for (const double sigma : {1e-6, 0.01, 0.3, 1.0}) {
        CHECK(std::abs(expected_improvement(mu, sigma, 0.1) - ei_oracle(mu, sigma, 0.1)) <= 1e-10);
      }
    }
  }

  TEST_CASE("ei matches an independent oracle on a toy problem") {
    const auto spec = KernelSpec::matern(2.5, 0.3);
    const std::vector<Point> cands{point({0.0, 0.5}), point({0.45, 0.5}), point({1.0, 0.5})};
    History h(spec, 2, cands);
    CHECK(select_ei(h.candidate_posterior(), std::nullopt) == 0);
    h.extend(point({0.3, 0.5}), 0.2);
    h.extend(point({0.8, 0.5}), 0.5);
    const auto dense = dense_all(h, cands);
    const auto post = h.candidate_posterior();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      CHECK(std::abs(expected_improvement(post.mean[j], post.std[j], 0.5) -
                     ei_oracle(dense[i].mean, std::sqrt(std::max(0.0, dense[i].var)), 0.5)) <= 1e-10);
    }
    const auto expected = brute_argmax(cands.size(), [&](std::size_t i) {
      return ei_oracle(dense[i].mean, std::sqrt(std::max(0.0, dense[i].var)), 0.5);
    });
    CHECK(select_ei(h, cands) == expected);
  }

  TEST_CASE("mvr examples") {
    const auto spec = KernelSpec::squared_exponential(0.25);
    const auto grid = make_grid(5, 2);
    History h(spec, 2, grid);
    CHECK(select_mvr(h.candidate_posterior()) == 0);

    const std::vector<Point> two{point({0.0}), point({1.0})};
    History h2(spec, 1, two);
    h2.extend(two[0], 1.0);
    CHECK(select_mvr(h2.candidate_posterior()) == 1);

    h.extend(grid[0], 0.1);
    h.extend(grid[12], 0.2);
    h.extend(grid[24], 0.3);
    const auto dense = dense_all(h, grid);
    const auto expected = brute_argmax(grid.size(), [&](std::size_t i) { return dense[i].var; });
    CHECK(select_mvr(h, grid) == expected);
    CHECK(select_mvr(h.candidate_posterior()) == expected);
  }

  TEST_CASE("uniform selection") {
    RandomStream rng(5);
    for (int i = 0; i < 10; ++i) CHECK(select_uniform(1, rng) == 0);
    RandomStream a(77);
    RandomStream b(77);
    for (int i = 0; i < 100; ++i) CHECK(select_uniform(625, a) == select_uniform(625, b));
    RandomStream c(78);
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 100000; ++i) ++counts[select_uniform(4, c)];
    for (const int n : counts) CHECK(std::abs(n / 1e5 - 0.25) <= 0.01);
  }

  TEST_CASE("phased elimination starts with the first survivor") {
    const auto grid = make_grid(5, 2);
    const History h(KernelSpec::squared_exponential(0.25), 2, grid);
    PhasedEliminationState state(grid.size(), 5);
    CHECK(select_pe(state, h.candidate_posterior(), 1.0) == 0);
    CHECK(state.steps_in_phase() == 1);
    CHECK(state.survivors().size() == grid.size());
  }

  TEST_CASE("phased elimination keeps the maximizer and shrinks monotonically") {
    const auto spec = KernelSpec::squared_exponential(0.25);
    const auto grid = make_grid(25, 2);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      RandomStream rng(seed);
      const auto f = sample_objective(spec, 2, 50, rng);
      const auto values = evaluate_on(f, grid);
      const auto best = grid_maximum(values);
      History h(spec, 2, grid);
      PhasedEliminationState state(grid.size(), 5);
      std::size_t phase = 0;
      std::vector<std::size_t> previous(state.survivors().begin(), state.survivors().end());
      for (int t = 0; t < 200; ++t) {
        CHECK(confidence_bound_excess(h, values, f.norm()) <= 1e-6);
        const std::size_t idx = state.select(h.candidate_posterior(), f.norm());
        const auto survivors = state.survivors();
        CHECK(std::find(survivors.begin(), survivors.end(), best.index) != survivors.end());
        CHECK(std::find(survivors.begin(), survivors.end(), idx) != survivors.end());
        if (state.phase() != phase) {
          CHECK(std::includes(previous.begin(), previous.end(), survivors.begin(), survivors.end()));
          previous.assign(survivors.begin(), survivors.end());
          phase = state.phase();
        }
        h.extend(grid[idx], values[idx]);
      }
      const auto sizes = state.phase_survivor_counts();
      CHECK(std::is_sorted(sizes.rbegin(), sizes.rend()));
      CHECK(sizes.size() >= 4);
      CHECK(state.batch_size() == 5u << state.phase());
    }
  }

  TEST_CASE("ucb argmax is invariant to a common positive scale") {
    const auto spec = KernelSpec::matern(1.5, 0.25);
    const auto grid = make_grid(9, 2);
    RandomStream rng(3);
    History h(spec, 2, grid);
    History scaled(spec, 2, grid);
    for (int t = 0; t < 15; ++t) {
      const auto i = rng.uniform_index(grid.size());
      const double y = rng.uniform(-1, 1);
      h.extend(grid[i], y);
      scaled.extend(grid[i], 3.5 * y);
      CHECK(select_ucb(h.candidate_posterior(), 0.7) == select_ucb(scaled.candidate_posterior(), 3.5 * 0.7));
    }
  }

  TEST_CASE("policy names and factory") {
    CHECK(parse_policy_kind("ucb") == PolicyKind::Ucb);
    CHECK(parse_policy_kind("GP-UCB") == PolicyKind::Ucb);
    CHECK(parse_policy_kind("ei") == PolicyKind::ExpectedImprovement);
    CHECK(parse_policy_kind("mvr") == PolicyKind::MaxVarianceReduction);
    CHECK(parse_policy_kind("pe") == PolicyKind::PhasedElimination);
    CHECK(parse_policy_kind("random") == PolicyKind::UniformRandom);
    CHECK(parse_policy_kind("reds") == PolicyKind::Reds);
    CHECK_THROWS_AS(parse_policy_kind("thompson"), std::invalid_argument);
    CHECK(policy_name(PolicyKind::PhasedElimination) == "pe");

    CHECK_THROWS_AS(make_policy(PolicyConfig{PolicyKind::Reds, 1.0, 5}, 10), UnimplementedPolicy);
    CHECK_THROWS_AS(make_policy(PolicyConfig{PolicyKind::Ucb, std::nullopt, 5}, 10), std::invalid_argument);
    CHECK_THROWS_AS(make_policy(PolicyConfig{PolicyKind::Ucb, -1.0, 5}, 10), std::invalid_argument);
    CHECK_THROWS_AS(make_policy(PolicyConfig{PolicyKind::PhasedElimination, 1.0, 0}, 10), std::invalid_argument);
    CHECK(make_policy(PolicyConfig{PolicyKind::ExpectedImprovement, std::nullopt, 5}, 10)->kind() ==
          PolicyKind::ExpectedImprovement);
  }

  TEST_CASE("selectors return in-range indices deterministically") {
    const auto spec = KernelSpec::squared_exponential(0.25);
    const auto grid = make_grid(7, 2);
    for (const auto kind : {PolicyKind::Ucb, PolicyKind::ExpectedImprovement, PolicyKind::MaxVarianceReduction,
                            PolicyKind::PhasedElimination, PolicyKind::UniformRandom}) {
      auto p1 = make_policy(PolicyConfig{kind, 1.0, 5}, grid.size());
      auto p2 = make_policy(PolicyConfig{kind, 1.0, 5}, grid.size());
      History h1(spec, 2, grid);
      History h2(spec, 2, grid);
      RandomStream r1(8);
      RandomStream r2(8);
      for (int t = 0; t < 30; ++t) {
        const auto a = p1->select(h1, r1);
        const auto b = p2->select(h2, r2);
        CHECK(a == b);
        CHECK(a < grid.size());
        const double y = std::sin(3.0 * grid[a][0]) * std::cos(2.0 * grid[a][1]);
        h1.extend(grid[a], y);
        h2.extend(grid[b], y);
      }
    }
  }
}
