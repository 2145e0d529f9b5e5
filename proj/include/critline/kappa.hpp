#pragma once

// Zero-proportion bound from the aggregate constant: bound = 1 - ln(c) / R.

#include <cmath>
#include <stdexcept>
#include <string>

#include "critline/mollifier.hpp"
#include "critline/quadrature.hpp"
#include "critline/terms.hpp"

namespace critline {

class InvalidAggregate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct BoundReport {
  Mode mode = Mode::kappa;
  double R = 0.0;
  double c_total = 0.0;
  double bound = 0.0;
  TermBreakdown terms;
  /// The o(1) term is dropped, so the number is an asymptotic statement.
  static constexpr const char* label = "asymptotic lower bound";
};

inline double bound_value(double c_total, double R) {
  if (!(c_total > 0.0) || !std::isfinite(c_total)) {
    throw InvalidAggregate("aggregate constant must be positive and finite, got " + std::to_string(c_total));
  }
  if (!(R > 0.0)) throw InvalidAggregate("R must be positive, got " + std::to_string(R));
  return 1.0 - std::log(c_total) / R;
}

inline BoundReport bound_from_terms(const TermBreakdown& tb, double R, Mode mode) {
  BoundReport r;
  r.mode = mode;
  r.R = R;
  r.c_total = tb.c_total;
  r.bound = bound_value(tb.c_total, R);
  r.terms = tb;
  return r;
}

/// Evaluate all six terms for cfg and convert. In kappa_star mode Q must be
/// linear.
inline BoundReport evaluate_bound(const MollifierConfig& cfg, Exec exec = {}) {
  if (cfg.mode() == Mode::kappa_star && cfg.polys.Q().degree() > 1) {
    throw ConfigError({"q: kappa_star mode requires a linear Q"});
  }
  return bound_from_terms(eval_all(cfg, exec), cfg.R, cfg.mode());
}

}  // namespace critline
