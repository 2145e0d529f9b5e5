#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "critline/jet.hpp"
#include "oracles.hpp"

using namespace critline;

namespace {

template <class J>
J random_jet(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  J j;
  for (std::size_t f = 0; f < J::kSize; ++f) j[f] = u(rng);
  return j;
}

template <class J>
double max_rel_diff(const J& a, const J& b) {
  double m = 0.0;
  for (std::size_t f = 0; f < J::kSize; ++f) m = std::max(m, std::abs(a[f] - b[f]) / std::max(1.0, std::abs(b[f])));
  return m;
}

template <class A, class B>
concept Multipliable = requires(A a, B b) { a * b; };

}  // namespace

TEST(Jet, TrivialExtractions) {
  using J1 = Jet<2>;
  const auto x = J1::variable(0);
  EXPECT_DOUBLE_EQ(extract(x * x, {2}), 2.0);

  using J2 = Jet<2, 1>;
  EXPECT_DOUBLE_EQ(extract(J2::constant(7.0), {1, 1}), 0.0);
  const auto e = exp(3.0 * J2::variable(0) + 2.0 * J2::variable(1));
  EXPECT_NEAR(extract(e, {2, 1}), 18.0, 1e-13);
}

TEST(Jet, ShapeMismatchDoesNotCompile) {
  static_assert(Multipliable<Jet<2, 2>, Jet<2, 2>>);
  static_assert(!Multipliable<Jet<2, 2>, Jet<2, 1>>);
  static_assert(!Multipliable<Jet<2>, Jet<2, 2>>);
  EXPECT_EQ((Jet<1, 2, 3>::shape().size()), 2u * 3u * 4u);
}

TEST(Jet, OutOfRangeAccessThrows) {
  using J = Jet<2, 1>;
  EXPECT_THROW(J::variable(2), std::out_of_range);
  EXPECT_THROW(extract(J::constant(1.0), {3, 0}), std::out_of_range);
  EXPECT_THROW((void)J::constant(1.0).coeff({0, 2}), std::out_of_range);
}

TEST(Jet, RingAxioms) {
  using J = Jet<2, 1, 2>;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_jet<J>(rng);
    const auto b = random_jet<J>(rng);
    const auto c = random_jet<J>(rng);
    EXPECT_LT(max_rel_diff(a * b, b * a), 1e-14);
    EXPECT_LT(max_rel_diff((a * b) * c, a * (b * c)), 1e-13);
    EXPECT_LT(max_rel_diff(a * (b + c), a * b + a * c), 1e-13);
    EXPECT_LT(max_rel_diff(a * J::constant(1.0), a), 1e-15);
  }
}

TEST(Jet, ProductMatchesBruteForceTruncatedConvolution) {
  using J = Jet<2, 2, 1>;
  std::mt19937_64 rng(5);
  auto a = random_jet<J>(rng);
  const auto b = random_jet<J>(rng);
  a[3] = 0.0;  // exercise the zero-skipping path
  J expect;
  for (std::size_t i = 0; i < J::kSize; ++i) {
    for (std::size_t j = 0; j < J::kSize; ++j) {
      const auto mi = J::multi_index(i);
      const auto mj = J::multi_index(j);
      J::MultiIndex sum{};
      bool inside = true;
      for (int v = 0; v < J::kVars; ++v) {
        sum[v] = mi[v] + mj[v];
        inside = inside && sum[v] <= J::kOrders[v];
      }
      if (!inside) continue;
      J unit;
      unit[0] = 0.0;
      std::size_t k = 0;
      for (std::size_t f = 0; f < J::kSize; ++f) {
        if (J::multi_index(f) == sum) k = f;
      }
      expect[k] += a[i] * b[j];
    }
  }
  EXPECT_LT(max_rel_diff(a * b, expect), 1e-15);
  for (std::size_t f = 0; f < J::kSize; ++f) {
    const auto alpha = J::multi_index(f);
    EXPECT_NEAR(extract_product(a, b, alpha), extract(a * b, alpha), 1e-13);
  }
}

TEST(Jet, ExpIsAHomomorphism) {
  using J = Jet<2, 2, 2>;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_jet<J>(rng);
    auto b = random_jet<J>(rng);
    a[0] = u(rng);
    b[0] = u(rng);
    EXPECT_LT(max_rel_diff(exp(a + b), exp(a) * exp(b)), 1e-12);
    EXPECT_LT(max_rel_diff(exp(a), exp_series(a)), 1e-12);
  }
}

TEST(Jet, AffineFastPathsAgreeWithGeneralPaths) {
  using J = Jet<2, 1, 2, 1>;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    J::Affine a{u(rng), {u(rng), u(rng), u(rng), u(rng)}};
    const J aj = J::from_affine(a);
    EXPECT_TRUE(aj.is_affine());
    EXPECT_LT(max_rel_diff(J::exp(a), exp_series(aj)), 1e-13);
    const Polynomial p{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    EXPECT_LT(max_rel_diff(J::compose(p, a), compose_poly_horner(p, aj)), 1e-13);
    const J x = random_jet<J>(rng);
    EXPECT_LT(max_rel_diff(J::exp_times(a, x), J::exp(a) * x), 1e-13);
    EXPECT_LT(max_rel_diff(a * x, aj * x), 1e-14);
  }
}

TEST(Jet, PolynomialIntegrandsAreExact) {
  // (1 + x1 + 2 x2)^3 has x1 x2^2 coefficient 3 * 4 = 12, so the derivative is 1! 2! 12 = 24.
  using J = Jet<1, 2>;
  const auto x1 = J::variable(0);
  const auto x2 = J::variable(1);
  const auto base = 1.0 + x1 + 2.0 * x2;
  EXPECT_DOUBLE_EQ(extract(base * base * base, {1, 2}), 24.0);
  EXPECT_DOUBLE_EQ(extract(compose_poly(Polynomial::monomial(3), base), {1, 2}), 24.0);
}

TEST(Jet, ExtractIsLinear) {
  using J = Jet<2, 2>;
  std::mt19937_64 rng(3);
  const auto a = random_jet<J>(rng);
  const auto b = random_jet<J>(rng);
  for (std::size_t f = 0; f < J::kSize; ++f) {
    const auto alpha = J::multi_index(f);
    EXPECT_NEAR(extract(2.5 * a - 1.5 * b, alpha), 2.5 * extract(a, alpha) - 1.5 * extract(b, alpha), 1e-13);
  }
}

TEST(Jet, DerivativesMatchFiniteDifferences) {
  using J = Jet<2, 2, 1>;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const J::Affine e{u(rng), {u(rng), u(rng), u(rng)}};
    const J::Affine l{u(rng), {u(rng), u(rng), u(rng)}};
    const Polynomial p{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const J jet = J::exp(e) * J::compose(p, l);
    auto scalar = [&](const std::vector<oracle::Fine>& x) {
      oracle::Fine ea = e.c0, la = l.c0;
      for (int v = 0; v < 3; ++v) {
        ea += e.slope[v] * x[v];
        la += l.slope[v] * x[v];
      }
      oracle::Fine pv = 0;
      for (int k = p.degree(); k >= 0; --k) pv = pv * la + p.coeff(k);
      return oracle::Fine(exp(ea) * pv);
    };
    double scale = 0.0;
    for (std::size_t f = 0; f < J::kSize; ++f) scale = std::max(scale, std::abs(jet[f]));
    for (std::size_t f = 0; f < J::kSize; ++f) {
      const auto alpha = J::multi_index(f);
      const double want = oracle::mixed_derivative(scalar, {alpha[0], alpha[1], alpha[2]}, oracle::Fine("1e-4")).convert_to<double>();
      const double got = extract(jet, alpha);
      EXPECT_LT(std::abs(got - want) / std::max(std::abs(want), 1e-10 * scale), 1e-6) << "trial " << trial << " flat " << f;
    }
  }
}
