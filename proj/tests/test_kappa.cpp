#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "critline/kappa.hpp"

using namespace critline;

TEST(Kappa, BoundFormula) {
  EXPECT_DOUBLE_EQ(bound_value(1.0, 1.3), 1.0);
  EXPECT_NEAR(bound_value(std::exp(0.5), 1.25), 0.6, 1e-15);
  EXPECT_LT(bound_value(3.0, 1.0), 0.0);
}

TEST(Kappa, InvalidAggregatesAreRejected) {
  EXPECT_THROW(bound_value(0.0, 1.0), InvalidAggregate);
  EXPECT_THROW(bound_value(-1.0, 1.0), InvalidAggregate);
  EXPECT_THROW(bound_value(std::numeric_limits<double>::quiet_NaN(), 1.0), InvalidAggregate);
  EXPECT_THROW(bound_value(std::numeric_limits<double>::infinity(), 1.0), InvalidAggregate);
  EXPECT_THROW(bound_value(2.0, 0.0), InvalidAggregate);
}

TEST(Kappa, ReportCarriesTermsAndLabel) {
  auto cfg = paper_kappa_star_config();
  cfg.grids = {6, 6, 6, 4, 4, 6};
  const auto r = evaluate_bound(cfg);
  EXPECT_EQ(r.mode, Mode::kappa_star);
  EXPECT_EQ(r.R, cfg.R);
  EXPECT_EQ(r.c_total, r.terms.c_total);
  EXPECT_DOUBLE_EQ(r.bound, 1.0 - std::log(r.c_total) / cfg.R);
  EXPECT_STREQ(BoundReport::label, "asymptotic lower bound");
}
