#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "gpucb/kernels.hpp"
#include "support.hpp"

using namespace gpucb;
using oracle::point;

TEST_SUITE("kernels") {
  TEST_CASE("squared exponential closed form") {
    const auto se = KernelSpec::squared_exponential(0.25);
    CHECK(kernel_eval(se, point({0, 0}), point({0, 0})) == 1.0);
    CHECK(kernel_eval(se, point({0, 0}), point({0.25, 0})) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(kernel_eval(se, point({0, 0}), point({0.25, 0})) == doctest::Approx(0.60653).epsilon(1e-5));
  }

  TEST_CASE("matern closed forms") {
    const auto m32 = KernelSpec::matern(1.5, 1.0);
    CHECK(m32.at_distance(0.0) == 1.0);
    const double expected = (1.0 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0));
    CHECK(kernel_eval(m32, point({1, 0}), point({0, 0})) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(expected == doctest::Approx(0.48335).epsilon(1e-5));

    CHECK(KernelSpec::matern(0.5, 0.5).at_distance(0.5) == doctest::Approx(std::exp(-1.0)));
    const double s = std::sqrt(5.0) * 0.3 / 0.25;
    CHECK(KernelSpec::matern(2.5, 0.25).at_distance(0.3) == doctest::Approx((1 + s + s * s / 3) * std::exp(-s)));
  }

  TEST_CASE("gram matrix examples") {
    const auto se = KernelSpec::squared_exponential(0.25);
    const std::vector<Point> one{point({0.3, 0.7})};
    const auto g1 = gram_matrix(se, one);
    CHECK(g1.rows() == 1);
    CHECK(g1(0, 0) == 1.0);

    const std::vector<Point> dup{point({0.3, 0.7}), point({0.3, 0.7})};
    const auto g2 = gram_matrix(se, dup);
    CHECK((g2.array() == 1.0).all());
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(g2).rank() == 1);

    const std::vector<Point> pair{point({0, 0}), point({0.25, 0})};
    const auto g3 = gram_matrix(se, pair);
    CHECK(g3(0, 0) == 1.0);
    CHECK(g3(1, 1) == 1.0);
    CHECK(g3(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(g3(1, 0) == g3(0, 1));
  }

  TEST_CASE("kernel_vector agrees with kernel_eval") {
    const auto spec = KernelSpec::matern(2.5, 0.25);
    RandomStream rng(3);
    const auto pts = oracle::random_points(rng, 6, 3);
    const auto x = oracle::random_points(rng, 1, 3).front();
    const auto v = kernel_vector(spec, pts, x);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(v[static_cast<Eigen::Index>(i)] == kernel_eval(spec, pts[i], x));
    }
  }

  TEST_CASE("unit diagonal, bit-exact symmetry and boundedness") {
    RandomStream rng(11);
    const KernelSpec specs[] = {KernelSpec::squared_exponential(0.25), KernelSpec::matern(0.5, 0.25),
                                KernelSpec::matern(1.5, 0.3), KernelSpec::matern(2.5, 0.1)};
    for (const auto& spec : specs) {
      for (int trial = 0; trial < 200; ++trial) {
        const auto pts = oracle::random_points(rng, 2, 1 + trial % 4);
        CHECK(kernel_eval(spec, pts[0], pts[0]) == 1.0);
        const double a = kernel_eval(spec, pts[0], pts[1]);
        const double b = kernel_eval(spec, pts[1], pts[0]);
        CHECK(a == b);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
      }
    }
  }

  TEST_CASE("gram matrices are positive semidefinite up to roundoff") {
    RandomStream rng(5);
    const KernelSpec specs[] = {KernelSpec::squared_exponential(0.25), KernelSpec::matern(0.5, 0.25),
                                KernelSpec::matern(1.5, 0.25), KernelSpec::matern(2.5, 0.25)};
    for (const auto& spec : specs) {
      for (int trial = 0; trial < 50; ++trial) {
        const auto pts = oracle::random_points(rng, 1 + static_cast<std::size_t>(trial % 12), 2);
        const auto g = gram_matrix(spec, pts);
        CHECK(g == g.transpose());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g);
        CHECK(solver.eigenvalues().minCoeff() >= -1e-9);
      }
    }
  }

  TEST_CASE("closed forms are non-increasing in distance") {
    const double ell = 0.25;
    const KernelSpec specs[] = {KernelSpec::squared_exponential(ell), KernelSpec::matern(0.5, ell),
                                KernelSpec::matern(1.5, ell), KernelSpec::matern(2.5, ell)};
    for (const auto& spec : specs) {
      double previous = spec.at_distance(0.0);
      for (int i = 1; i <= 300; ++i) {
        const double value = spec.at_distance(3.0 * ell * i / 300.0);
        CHECK(value <= previous);
        previous = value;
      }
    }
  }

  TEST_CASE("invalid specs and inputs are rejected") {
    CHECK_THROWS_AS(KernelSpec::squared_exponential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::squared_exponential(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::matern(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::matern(1.5, 0.0), std::invalid_argument);
    const auto se = KernelSpec::squared_exponential(1.0);
    CHECK_THROWS_AS(kernel_eval(se, point({0, 0}), point({0, 0, 0})), std::invalid_argument);
    CHECK_THROWS_AS(kernel_eval(se, point({0, std::numeric_limits<double>::quiet_NaN()}), point({0, 0})),
                    std::invalid_argument);
    CHECK_THROWS_AS(kernel_eval(se, point({0, std::numeric_limits<double>::infinity()}), point({0, 0})),
                    std::invalid_argument);
    CHECK_THROWS_AS(gram_matrix(se, std::vector<Point>{}), std::invalid_argument);
  }

  TEST_CASE("describe and equality") {
    CHECK(KernelSpec::squared_exponential(0.25).describe() == "se(ell=0.25)");
    CHECK(KernelSpec::matern(1.5, 0.25).describe() == "matern(nu=1.5,ell=0.25)");
    CHECK(KernelSpec::matern(1.5, 0.25) == KernelSpec::matern(1.5, 0.25));
    CHECK_FALSE(KernelSpec::matern(1.5, 0.25) == KernelSpec::matern(2.5, 0.25));
  }
}
