#pragma once

// Structural identity checks: the integral representation of
// (1 - z^{-s}) / s, a partial-fraction identity in the shifts, and the
// reduction of the shifted c31 constant to the working c31 by the operator
// Q(-d/db) Q(-d/dc) at b = c = -R.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "critline/jet.hpp"
#include "critline/mollifier.hpp"
#include "critline/quadrature.hpp"
#include "critline/terms.hpp"

namespace critline {

/// Scaled shifts (alpha L, beta L, gamma L, delta L).
struct ShiftVector {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  static constexpr double kMaxAbs = 10.0;

  void validate() const {
    for (double s : {a, b, c, d}) {
      if (!std::isfinite(s) || std::abs(s) > kMaxAbs) {
        throw std::invalid_argument("ShiftVector: scaled shifts must be finite with magnitude <= 10");
      }
    }
  }
};

/// (1 - e^{-s z_log}) / s against z_log * int_0^1 e^{-s z_log t} dt.
/// Residual is |LHS - RHS| / max(1, |LHS|).
inline double check_int_identity(double z_log, double s, const GridSpec& grid = GridSpec{1, 24}) {
  if (grid.dims != 1) throw std::invalid_argument("check_int_identity: grid must be one-dimensional");
  const double lhs = (s == 0.0) ? z_log : -std::expm1(-s * z_log) / s;
  GridSpec spec = grid;
  spec.estimate_error = false;
  const auto r = integrate_cube([&](std::span<const double> t) { return std::exp(-s * z_log * t[0]); }, spec);
  const double rhs = z_log * r.value;
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

/// 1/((a+c)(b+c)) against 1/((a+c)(b-a)) + 1/((a-b)(b+c)).
/// Residual is |LHS - RHS| / max(1, |LHS|).
inline double check_partial_fraction(double a, double b, double c, double min_denominator = 1e-6) {
  const double ac = a + c;
  const double bc = b + c;
  const double ba = b - a;
  if (!(std::abs(ac) > min_denominator && std::abs(bc) > min_denominator && std::abs(ba) > min_denominator)) {
    throw std::invalid_argument("check_partial_fraction: near-singular input (a+c, b+c, b-a must exceed " +
                                std::to_string(min_denominator) + " in magnitude)");
  }
  const double lhs = 1.0 / (ac * bc);
  const double rhs = 1.0 / (ac * ba) + 1.0 / (-ba * bc);
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

struct ReductionCheck {
  double reduced = 0.0;  // operator applied to the shifted constant
  double direct = 0.0;   // eval_c31
  double residual = 0.0;
  bool relative = true;  // false when direct is too small to divide by
};

namespace detail {

/// Shifted c31 integrand with jet variables (x1, x2, x3, db, dc); the shifts
/// are a, b0 + db, c0 + dc.
struct C31Shifted {
  using J = Jet<1, 1, 2, 5, 5>;
  using A = J::Affine;

  double th1, th3, a, b0, c0;
  Polynomial p1, p3;

  J operator()(std::span<const double> p) const {
    const double t1 = p[0], t2 = p[1], u = p[2];
    const A x1 = A::variable(0);
    const A x2 = A::variable(1);
    const A x3 = A::variable(2);
    const J b = J::from_affine(A::variable(3, b0));
    const J c = J::from_affine(A::variable(4, c0));
    const A w = 1.0 + th1 * x1 + th3 * x3;
    const A twist = th1 * (x2 - x1) + t1 * w;
    // th1 (a x1 + b x2) + th3 c x3 - (a + c) t1 w - (b - a) t2 twist
    J expo = J::from_affine(th1 * a * x1 - a * t1 * w + a * t2 * twist);
    expo += b * J::from_affine(th1 * x2 - t2 * twist);
    expo += c * J::from_affine(th3 * x3 - t1 * w);
    J val = exp(expo);
    val = (-th1 * (x1 - x2) + t1 * w) * val;
    val = w * val;
    val *= (1.0 - u);
    val = val * J::compose(p1, x1 + x2 + 1.0 - (th3 / th1) * (1.0 - u));
    val = val * J::compose(p3, x3 + u);
    return val;
  }
};

}  // namespace detail

/// Shifted c31 at (a, b, c) (no operator applied).
inline double eval_c31_shifted(const MollifierConfig& cfg, const ShiftVector& s, Exec exec = {}) {
  s.validate();
  detail::C31Shifted f{cfg.theta1, cfg.theta3, s.a, s.b, s.c, cfg.polys.P1(), cfg.polys.P3()};
  GridSpec spec{3, cfg.grids.c31};
  spec.estimate_error = false;
  const auto r = integrate_cube(f, spec, exec);
  return extract(r.value, {1, 1, 2, 0, 0}) / (cfg.theta1 * cfg.theta1);
}

/// Apply Q(-d/db) Q(-d/dc) to the shifted c31 at a = 0, b = c = -R and
/// compare with eval_c31 on the same grid.
inline ReductionCheck check_operator_reduction_c31(const MollifierConfig& cfg, int derivative_order_cap = 5,
                                                   Exec exec = {}) {
  using J = detail::C31Shifted::J;
  constexpr int kShiftOrder = J::kOrders[3];
  if (derivative_order_cap < 0 || derivative_order_cap > kShiftOrder) {
    throw std::invalid_argument("check_operator_reduction_c31: derivative order cap must lie in [0, " +
                                std::to_string(kShiftOrder) + "]");
  }
  const Polynomial q = cfg.polys.Q();
  if (q.degree() > derivative_order_cap) {
    throw std::invalid_argument("check_operator_reduction_c31: Q has degree " + std::to_string(q.degree()) +
                                ", above the cap " + std::to_string(derivative_order_cap));
  }
  detail::C31Shifted f{cfg.theta1, cfg.theta3, 0.0, -cfg.R, -cfg.R, cfg.polys.P1(), cfg.polys.P3()};
  GridSpec spec{3, cfg.grids.c31};
  spec.estimate_error = false;
  const J integral = integrate_cube(f, spec, exec).value;

  double reduced = 0.0;
  for (int i = 0; i <= q.degree(); ++i) {
    for (int j = 0; j <= q.degree(); ++j) {
      const double w = q.coeff(i) * q.coeff(j);
      if (w == 0.0) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      reduced += sign * w * extract(integral, {1, 1, 2, i, j});
    }
  }
  reduced /= cfg.theta1 * cfg.theta1;

  ReductionCheck out;
  out.reduced = reduced;
  out.direct = eval_c31(cfg, exec).value;
  const double diff = std::abs(out.reduced - out.direct);
  out.relative = std::abs(out.direct) > 1e-14;
  out.residual = out.relative ? diff / std::abs(out.direct) : diff;
  return out;
}

}  // namespace critline
