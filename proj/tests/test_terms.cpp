#include <gtest/gtest.h>

#include <bit>
#include <cstdint>

#include "critline/terms.hpp"
#include "oracles.hpp"

using namespace critline;

namespace {

MollifierConfig with_grids(MollifierConfig cfg, int n) {
  cfg.grids = {n, n, n, n, n, n};
  return cfg;
}

double rel(double got, double want) { return std::abs(got - want) / std::max(1e-12, std::abs(want)); }

}  // namespace

TEST(Terms, AggregateWeightsCrossTermsTwice) {
  EXPECT_DOUBLE_EQ(aggregate(1, 2, 3, 4, 5, 6), 1 + 2 + 3 + 8 + 10 + 12);
}

TEST(Terms, VanishingP2AndP3GiveExactZeros) {
  auto cfg = with_grids(paper_kappa_config(), 4);
  cfg.polys.p2 = {0, 0, 0};
  cfg.polys.p3 = {0, 0};
  normalize(cfg, 1.0);
  const auto tb = eval_all(cfg);
  EXPECT_EQ(tb.c2.value, 0.0);
  EXPECT_EQ(tb.c3.value, 0.0);
  EXPECT_EQ(tb.c12.value, 0.0);
  EXPECT_EQ(tb.c23.value, 0.0);
  EXPECT_EQ(tb.c31.value, 0.0);
  EXPECT_EQ(tb.c_total, tb.c1.value);
}

TEST(Terms, LinearP1WithTrivialQAtVanishingR) {
  MollifierConfig cfg;
  cfg.theta1 = 0.5;
  cfg.theta2 = 0.4;
  cfg.theta3 = 0.25;
  cfg.R = 1e-9;
  cfg.polys.q_kappa = {1, 0, 0, 0};
  cfg.polys.p1 = {1, 0, 0, 0, 0};
  cfg.grids.c1 = 8;
  EXPECT_NEAR(eval_c1(cfg).value, 3.0, 1e-7);
}

TEST(Terms, ValuePointwiseAndBilinearPathsAgree) {
  const auto cfg = with_grids(paper_kappa_config(), 5);
  const terms::Context ctx(cfg);
  const auto& p = cfg.polys;
  const auto coef = coefficient_vector(p);
  const auto qm = quadratic_model(cfg, cfg.grids);
  auto check = [&](auto term, const terms::Matrix& m, double value) {
    using T = decltype(term);
    const auto a = slot_polynomial(p, T::slot_a);
    const auto b = slot_polynomial(p, T::slot_b);
    const double pw = terms::evaluate_pointwise(term, a, b, 5, Exec{});
    EXPECT_LT(rel(pw, value), 1e-11);
    EXPECT_LT(rel(QuadraticModel::apply(m, coef), value), 1e-11);
  };
  const auto tb = eval_all(cfg);
  check(terms::C12{ctx}, qm.c12, tb.c12.value);
  check(terms::C2{ctx}, qm.c2, tb.c2.value);
  check(terms::C3{ctx}, qm.c3, tb.c3.value);
  check(terms::C23{ctx}, qm.c23, tb.c23.value);
  check(terms::C31{ctx}, qm.c31, tb.c31.value);
  EXPECT_LT(rel(QuadraticModel::apply(qm.c1, coef), tb.c1.value), 1e-12);
  EXPECT_LT(rel(QuadraticModel::apply(qm.total(), coef), tb.c_total), 1e-12);
}

TEST(Terms, WorkerCountDoesNotChangeResults) {
  const auto cfg = with_grids(paper_kappa_star_config(), 5);
  const auto serial = eval_all(cfg, Exec{1});
  const auto par = eval_all(cfg, Exec{4});
  for (auto m : {&TermBreakdown::c1, &TermBreakdown::c2, &TermBreakdown::c3, &TermBreakdown::c12, &TermBreakdown::c23,
                 &TermBreakdown::c31}) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>((serial.*m).value), std::bit_cast<std::uint64_t>((par.*m).value));
  }
}

TEST(Terms, RefinementDeltaIsReported) {
  const auto cfg = with_grids(paper_kappa_config(), 8);
  const auto v = eval_c2(cfg);
  EXPECT_EQ(v.nodes_per_dim, 8);
  EXPECT_EQ(v.evaluations, 8u * 8u * 8u * 8u);
  EXPECT_GT(v.refinement_delta, 0.0);
  EXPECT_LT(v.refinement_delta, 1e-4);
}

TEST(Terms, LowDimensionalTermsMatchOracle) {
  const auto cfg = paper_kappa_config();
  const oracle::Params p(cfg);
  EXPECT_LT(rel(eval_c1(cfg).value, static_cast<double>(oracle::c1(p))), 1e-10);
  EXPECT_LT(rel(eval_c12(cfg).value, static_cast<double>(oracle::c12(p))), 1e-3);
  EXPECT_LT(rel(eval_c2(cfg).value, static_cast<double>(oracle::c2(p))), 1e-3);
  EXPECT_LT(rel(eval_c31(cfg).value, static_cast<double>(oracle::c31(p))), 1e-3);
}

TEST(Terms, FiveDimensionalTermsMatchOracleOnMatchedGrid) {
  // Both sides use the same 5-point rule so only the finite-difference error remains.
  const auto cfg = with_grids(paper_kappa_config(), 5);
  const oracle::Params p(cfg);
  EXPECT_LT(rel(eval_c3(cfg).value, static_cast<double>(oracle::c3<5>(p))), 1e-3);
  EXPECT_LT(rel(eval_c23(cfg).value, static_cast<double>(oracle::c23<5>(p))), 1e-3);
}

TEST(Terms, NegativeDiagonalTermsProduceWarnings) {
  auto cfg = with_grids(paper_kappa_config(), 4);
  const auto tb = eval_all(cfg);
  EXPECT_TRUE(tb.warnings.empty());
  EXPECT_GT(tb.c2.value, 0.0);
  EXPECT_GT(tb.c3.value, 0.0);
}
