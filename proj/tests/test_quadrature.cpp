#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "critline/jet.hpp"
#include "critline/quadrature.hpp"
#include "oracles.hpp"

using namespace critline;

TEST(Quadrature, RuleWeightsSumToOneAndNodesAreSymmetric) {
  for (int n : {1, 2, 5, 12, 24, 40}) {
    const auto rule = gauss_legendre_unit(n);
    ASSERT_EQ(rule.nodes.size(), static_cast<std::size_t>(n));
    EXPECT_NEAR(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0), 1.0, 1e-14);
    for (int i = 0; i < n; ++i) {
      EXPECT_GT(rule.nodes[i], 0.0);
      EXPECT_LT(rule.nodes[i], 1.0);
      EXPECT_NEAR(rule.nodes[i] + rule.nodes[n - 1 - i], 1.0, 1e-15);
      if (i > 0) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
    }
  }
  EXPECT_THROW(gauss_legendre_unit(0), std::invalid_argument);
}

TEST(Quadrature, RuleMatchesBoostAbscissae) {
  const auto rule = gauss_legendre_unit(16);
  const oracle::UnitRule<16> ref;
  ASSERT_EQ(ref.x.size(), 16u);
  for (std::size_t j = 0; j < ref.x.size(); ++j) {
    const double xj = static_cast<double>(ref.x[j]);
    const auto it = std::min_element(rule.nodes.begin(), rule.nodes.end(),
                                     [&](double a, double b) { return std::abs(a - xj) < std::abs(b - xj); });
    EXPECT_NEAR(*it, xj, 1e-15);
    EXPECT_NEAR(rule.weights[static_cast<std::size_t>(it - rule.nodes.begin())], static_cast<double>(ref.w[j]), 1e-15);
  }
}

TEST(Quadrature, ExactForPolynomialsUpToDegree2nMinus1) {
  for (int n : {2, 4, 8}) {
    const auto rule = gauss_legendre_unit(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Quadrature, TensorIntegralAndNodeCount) {
  // integral over [0,1]^3 of x y^2 z^3 = 1/2 * 1/3 * 1/4
  GridSpec spec{.dims = 3, .nodes_per_dim = 4};
  const auto r = integrate_cube([](std::span<const double> p) { return p[0] * p[1] * p[1] * p[2] * p[2] * p[2]; }, spec);
  EXPECT_NEAR(r.value, 1.0 / 24.0, 1e-15);
  EXPECT_EQ(r.evaluations, 64u);
  EXPECT_EQ(spec.node_count(), 64u);
  EXPECT_NEAR(r.refinement_delta, std::abs(r.value - r.coarse_value), 0.0);
}

TEST(Quadrature, SmoothIntegrandConvergesUnderRefinement) {
  auto f = [](std::span<const double> p) { return std::exp(p[0] * p[1] - p[2]) * std::cos(p[3]); };
  const double exact_like = integrate_cube(f, GridSpec{.dims = 4, .nodes_per_dim = 20}).value;
  const double coarse = integrate_cube(f, GridSpec{.dims = 4, .nodes_per_dim = 8}).value;
  EXPECT_LT(std::abs(exact_like - coarse), 1e-12);
}

TEST(Quadrature, ParallelSumIsBitwiseIdenticalToSerial) {
  using J = Jet<2, 1>;
  auto f = [](std::span<const double> p) {
    return J::exp(J::Affine{p[0] - p[1], {p[2], -p[0]}}) * (1.0 + p[1] * p[2]);
  };
  const GridSpec spec{.dims = 3, .nodes_per_dim = 9};
  const auto serial = integrate_cube(f, spec, Exec{1});
  for (unsigned w : {2u, 3u, 8u}) {
    const auto par = integrate_cube(f, spec, Exec{w});
    for (std::size_t i = 0; i < J::kSize; ++i) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(serial.value[i]), std::bit_cast<std::uint64_t>(par.value[i]));
    }
  }
}

TEST(Quadrature, NonFiniteIntegrandReportsThePoint) {
  auto f = [](std::span<const double> p) {
    return p[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  for (unsigned w : {1u, 4u}) {
    try {
      integrate_cube(f, GridSpec{.dims = 2, .nodes_per_dim = 4}, Exec{w});
      FAIL() << "expected NonFiniteIntegrand";
    } catch (const NonFiniteIntegrand& e) {
      ASSERT_EQ(e.point().size(), 2u);
      EXPECT_GT(e.point()[0], 0.5);
    }
  }
}

TEST(Quadrature, InvalidGridsAreRejected) {
  auto one = [](std::span<const double>) { return 1.0; };
  EXPECT_THROW(integrate_cube(one, GridSpec{.dims = 0}), std::invalid_argument);
  EXPECT_THROW(integrate_cube(one, GridSpec{.dims = 6}), std::invalid_argument);
  EXPECT_THROW(integrate_cube(one, GridSpec{.dims = 2, .nodes_per_dim = 1}), std::invalid_argument);
  EXPECT_THROW(integrate_c12_region(one, GridSpec{.dims = 2}), std::invalid_argument);
}

TEST(Quadrature, RegionVolumeAndFirstMoment) {
  const GridSpec spec{.dims = 3, .nodes_per_dim = 6};
  const auto vol = integrate_c12_region([](std::span<const double>) { return 1.0; }, spec);
  EXPECT_NEAR(vol.value, 1.0 / 6.0, 1e-15);
  const auto mom = integrate_c12_region([](std::span<const double> p) { return p[0] + p[1]; }, spec);
  EXPECT_NEAR(mom.value, 1.0 / 12.0, 1e-15);
  const auto t1 = integrate_c12_region([](std::span<const double> p) { return p[0]; }, spec);
  EXPECT_NEAR(t1.value, 1.0 / 24.0, 1e-15);
}

TEST(Quadrature, RegionAgreesWithMonteCarlo) {
  auto f = [](std::span<const double> p) { return std::exp(p[0] - 2.0 * p[1]) * (1.0 + p[2] * p[2]); };
  const double q = integrate_c12_region(f, GridSpec{.dims = 3, .nodes_per_dim = 12}).value;
  const auto [mean, se] = oracle::region_monte_carlo(
      [&](double t1, double t2, double u) {
        const std::array<double, 3> p{t1, t2, u};
        return f(std::span<const double>(p));
      },
      200000, 42);
  EXPECT_LT(std::abs(q - mean), 5.0 * se);
}
