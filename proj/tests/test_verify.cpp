#include <gtest/gtest.h>

#include <random>

#include "critline/terms.hpp"
#include "critline/verify.hpp"

using namespace critline;

TEST(Verify, IntegralIdentityHoldsAcrossShifts) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> z(0.1, 3.0);
  std::uniform_real_distribution<double> s(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) EXPECT_LT(check_int_identity(z(rng), s(rng)), 1e-11);
  EXPECT_LT(check_int_identity(1.5, 0.0), 1e-15);
  EXPECT_LT(check_int_identity(2.0, 1e-12), 1e-14);
  EXPECT_THROW(check_int_identity(1.0, 1.0, GridSpec{2, 8}), std::invalid_argument);
}

TEST(Verify, CoarseGridShowsIdentityResidual) {
  // Too few nodes for e^{-10 t}: the check must be able to fail.
  EXPECT_GT(check_int_identity(3.0, 10.0, GridSpec{1, 3}), 1e-6);
}

TEST(Verify, PartialFractionHoldsAndGuardsSingularities) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  int checked = 0;
  while (checked < 100) {
    const double a = u(rng), b = u(rng), c = u(rng);
    if (std::abs(a + c) < 1e-2 || std::abs(b + c) < 1e-2 || std::abs(b - a) < 1e-2) continue;
    EXPECT_LT(check_partial_fraction(a, b, c), 1e-11);
    ++checked;
  }
  EXPECT_THROW(check_partial_fraction(1.0, 1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(check_partial_fraction(1.0, 2.0, -1.0), std::invalid_argument);
}

TEST(Verify, ShiftVectorValidation) {
  EXPECT_NO_THROW((ShiftVector{1, -2, 3, 10}.validate()));
  EXPECT_THROW((ShiftVector{11, 0, 0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((ShiftVector{0, std::numeric_limits<double>::quiet_NaN(), 0, 0}.validate()), std::invalid_argument);
}

TEST(Verify, OperatorReductionMatchesDirectTerm) {
  for (auto cfg : {paper_kappa_config(), paper_kappa_star_config()}) {
    cfg.grids.c31 = 8;
    const auto r = check_operator_reduction_c31(cfg);
    EXPECT_TRUE(r.relative);
    EXPECT_LT(r.residual, 1e-10);
    EXPECT_NEAR(r.direct, eval_c31(cfg).value, 1e-15);
  }
}

TEST(Verify, ReductionRejectsOversizedQ) {
  auto cfg = paper_kappa_config();
  cfg.grids.c31 = 4;
  EXPECT_THROW(check_operator_reduction_c31(cfg, 3), std::invalid_argument);
  EXPECT_THROW(check_operator_reduction_c31(cfg, 6), std::invalid_argument);
}

TEST(Verify, ShiftedTermAtZeroShiftIsFinite) {
  auto cfg = paper_kappa_config();
  cfg.grids.c31 = 6;
  const double v0 = eval_c31_shifted(cfg, ShiftVector{});
  EXPECT_TRUE(std::isfinite(v0));
  EXPECT_THROW(eval_c31_shifted(cfg, ShiftVector{0, 20, 0, 0}), std::invalid_argument);
}
