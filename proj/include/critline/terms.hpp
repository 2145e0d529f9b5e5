#pragma once

// The six main-term constants c1, c2, c3, c12, c23, c31 of the mollified
// second moment and their aggregate
//
//   c = c1 + c2 + c3 + 2 c12 + 2 c23 + 2 c31.
//
// Each jet term is an integral over [0,1]^k (or the simplex-type region for
// c12) of a jet-valued integrand in the auxiliary variables x, followed by a
// mixed derivative at x = 0. Integrands are transcribed factor by factor and
// split as  kernel(x; t) * A(arg_a(x; t)) * B(arg_b(x; t))  where A and B are
// the mollifier polynomials entering the term (P1, P2'' or P3). The split
// gives two evaluation paths:
//
//  * value path: integrate the full jet, then extract the derivative once;
//  * bilinear path: replace A and B by basis monomials and extract per node,
//    producing the matrix of the term as a bilinear form in the polynomial
//    coefficients (used by the optimizer).

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "critline/jet.hpp"
#include "critline/mollifier.hpp"
#include "critline/polynomial.hpp"
#include "critline/quadrature.hpp"

namespace critline {

/// Polynomial entering one side of a term.
enum class Slot { p1, p2_second, p3 };

/// Coefficient vector layout: (a1..a5, b3..b5, c4, c5).
inline constexpr std::size_t kCoefCount = 10;

inline constexpr std::size_t slot_offset(Slot s) {
  return s == Slot::p1 ? 0 : (s == Slot::p2_second ? 5 : 8);
}
inline constexpr std::size_t slot_size(Slot s) {
  return s == Slot::p1 ? 5 : (s == Slot::p2_second ? 3 : 2);
}

/// Basis polynomial of the i-th coordinate of a slot.
inline Polynomial slot_basis(Slot s, std::size_t i) {
  const int k = static_cast<int>(i);
  switch (s) {
    case Slot::p1:
      return Polynomial::monomial(k + 1);
    case Slot::p2_second:
      return Polynomial::monomial(k + 3).derivative(2);
    case Slot::p3:
      return Polynomial::monomial(k + 4);
  }
  return {};
}

inline Polynomial slot_polynomial(const PolynomialSpec& p, Slot s) {
  switch (s) {
    case Slot::p1:
      return p.P1();
    case Slot::p2_second:
      return p.P2_second_derivative();
    case Slot::p3:
      return p.P3();
  }
  return {};
}

inline std::array<double, kCoefCount> coefficient_vector(const PolynomialSpec& p) {
  return {p.p1[0], p.p1[1], p.p1[2], p.p1[3], p.p1[4], p.p2[0], p.p2[1], p.p2[2], p.p3[0], p.p3[1]};
}

struct TermValue {
  double value = 0.0;
  double refinement_delta = 0.0;
  int nodes_per_dim = 0;
  std::size_t evaluations = 0;
};

struct TermBreakdown {
  TermValue c1, c2, c3, c12, c23, c31;
  double c_total = 0.0;
  std::vector<std::string> warnings;
};

inline double aggregate(double c1, double c2, double c3, double c12, double c23, double c31) {
  return c1 + c2 + c3 + 2.0 * c12 + 2.0 * c23 + 2.0 * c31;
}

namespace terms {

struct Context {
  double th1, th2, th3, R;
  Polynomial Q;

  explicit Context(const MollifierConfig& cfg)
      : th1(cfg.theta1), th2(cfg.theta2), th3(cfg.theta3), R(cfg.R), Q(cfg.polys.Q()) {}
};

template <class J>
struct KernelParts {
  J kernel;
  typename J::Affine arg_a;
  typename J::Affine arg_b;
};

/// c12: region t1 + t2 <= u, point (t1, t2, u); d^2/dx1 dx2.
struct C12 {
  using J = Jet<1, 1>;
  using A = J::Affine;
  static constexpr Slot slot_a = Slot::p1;
  static constexpr Slot slot_b = Slot::p2_second;
  static constexpr int dims = 3;
  static constexpr bool simplex = true;
  static constexpr J::MultiIndex orders{1, 1};
  static int nodes(const TermGrids& g) { return g.c12; }

  Context ctx;
  double prefactor() const { return 4.0 * ctx.th2 * ctx.th2 / (ctx.th1 * ctx.th1); }

  KernelParts<J> parts(std::span<const double> p) const {
    const double t1 = p[0], t2 = p[1], u = p[2];
    const auto& [th1, th2, th3, R, Q] = ctx;
    const A x1 = A::variable(0);
    const A x2 = A::variable(1);
    J kernel = J::compose(Q, -th1 * x1 + th2 * t1) * J::compose(Q, 1.0 + th1 * x2 - th2 * t2);
    kernel *= (1.0 - u);
    kernel = J::exp_times(R * (1.0 - th1 * (x1 - x2) + th2 * (t1 - t2)), kernel);
    return {kernel, x1 + x2 + 1.0 - (th2 / th1) * (1.0 - u), A::constant(u - t1 - t2)};
  }
};

/// c2: [0,1]^4, point (t1, t2, t3, u); d^4/dx1^2 dx2^2.
struct C2 {
  using J = Jet<2, 2>;
  using A = J::Affine;
  static constexpr Slot slot_a = Slot::p2_second;
  static constexpr Slot slot_b = Slot::p2_second;
  static constexpr int dims = 4;
  static constexpr bool simplex = false;
  static constexpr J::MultiIndex orders{2, 2};
  static int nodes(const TermGrids& g) { return g.c2; }

  Context ctx;
  double prefactor() const { return 2.0 / (3.0 * ctx.th2); }

  KernelParts<J> parts(std::span<const double> p) const {
    const double t1 = p[0], t2 = p[1], t3 = p[2], u = p[3];
    const auto& [th1, th2, th3, R, Q] = ctx;
    const A x1 = A::variable(0);
    const A x2 = A::variable(1);
    const A s = x1 + x2 - t1 * (x1 + u) - t2 * (x2 + u);
    const A inner = 1.0 + th2 * s;
    J kernel = J::compose(Q, th2 * (-x1 + t2 * (x2 + u)) + t3 * inner) *
               J::compose(Q, th2 * (-x2 + t1 * (x1 + u)) + t3 * inner);
    kernel = inner * kernel;
    kernel = (x1 + u) * kernel;
    kernel = (x2 + u) * kernel;
    kernel *= std::pow(1.0 - u, 4);
    kernel = J::exp_times(-th2 * R * s + 2.0 * R * t3 * inner, kernel);
    return {kernel, (x1 + u) * (1.0 - t1), (x2 + u) * (1.0 - t2)};
  }
};

/// c3: [0,1]^5, point (t1, t2, t3, t4, u); d^8/dx1^2 dx2^2 dx3^2 dx4^2.
struct C3 {
  using J = Jet<2, 2, 2, 2>;
  using A = J::Affine;
  static constexpr Slot slot_a = Slot::p3;
  static constexpr Slot slot_b = Slot::p3;
  static constexpr int dims = 5;
  static constexpr bool simplex = false;
  static constexpr J::MultiIndex orders{2, 2, 2, 2};
  static int nodes(const TermGrids& g) { return g.c3; }

  Context ctx;
  double prefactor() const { return 1.0 / (12.0 * std::pow(ctx.th3, 4)); }

  KernelParts<J> parts(std::span<const double> p) const {
    const double t1 = p[0], t2 = p[1], t3 = p[2], t4 = p[3], u = p[4];
    const auto& [th1, th2, th3, R, Q] = ctx;
    const A x1 = A::variable(0);
    const A x2 = A::variable(1);
    const A x3 = A::variable(2);
    const A x4 = A::variable(3);
    const A w1 = 1.0 + th3 * (x1 + x3);
    const A w2 = 1.0 + th3 * (x2 + x4);
    const A g3 = t1 + th3 * (-x1 + x2 + (x1 + x3) * t1);
    const A g4 = t2 + th3 * (x3 - x4 + (x2 + x4) * t2);
    const A expo = -th3 * R * (x2 + x3) + R * t1 * (1.0 - t4) * w1 + R * t2 * (1.0 - t3) * w2 + R * t3 * g3 +
                   R * t4 * g4;
    const A l1 = t1 - t2 + th3 * (-x1 + x2 + (x1 + x3) * t1 - (x2 + x4) * t2);
    const A l2 = t1 - t2 + th3 * (-x3 + x4 + (x1 + x3) * t1 - (x2 + x4) * t2);
    J kernel = J::compose(Q, -th3 * x2 + t2 * (1.0 - t3) * w2 + t3 * g3) *
               J::compose(Q, -th3 * x3 + t1 * (1.0 - t4) * w1 + t4 * g4);
    kernel = l1 * kernel;
    kernel = l2 * kernel;
    kernel = w1 * kernel;
    kernel = w2 * kernel;
    kernel *= std::pow(1.0 - u, 3);
    kernel = J::exp_times(expo, kernel);
    return {kernel, x1 + x2 + u, x3 + x4 + u};
  }
};

/// c23: [0,1]^5, point (t1, t2, t3, t4, u); d^6/dx1^2 dx2^2 dx3^2.
struct C23 {
  using J = Jet<2, 2, 2>;
  using A = J::Affine;
  static constexpr Slot slot_a = Slot::p2_second;
  static constexpr Slot slot_b = Slot::p3;
  static constexpr int dims = 5;
  static constexpr bool simplex = false;
  static constexpr J::MultiIndex orders{2, 2, 2};
  static int nodes(const TermGrids& g) { return g.c23; }

  Context ctx;
  double prefactor() const { return 2.0 / (3.0 * ctx.th2 * ctx.th2); }

  KernelParts<J> parts(std::span<const double> p) const {
    const double t1 = p[0], t2 = p[1], t3 = p[2], t4 = p[3], u = p[4];
    const auto& [th1, th2, th3, R, Q] = ctx;
    const A x1 = A::variable(0);
    const A x2 = A::variable(1);
    const A x3 = A::variable(2);
    const A a = th2 * (1.0 + x1) - th3 * (1.0 - u);
    const A b = 1.0 + th2 * x1 + th3 * x2;
    const A twist = th3 * (x2 - x3) - t1 * (2.0 * t2 - 1.0) * a;
    const A expo = -R * (th2 * x1 + th3 * x2) + R * t1 * t2 * (1.0 - t3 - t3 * t4) * a +
                   R * t3 * (1.0 + t4) * b + R * (1.0 - t4) * twist;
    const A f1 = -th3 * (x2 - x3) + t1 * (2.0 * t2 - 1.0) * a + t3 * (b - t1 * t2 * a);
    const A lead = x1 + 1.0 - (th3 / th2) * (1.0 - u);
    J kernel = J::compose(Q, -th3 * x2 + t1 * t2 * (1.0 - t3 * t4) * a + t3 * t4 * b + (1.0 - t4) * twist) *
               J::compose(Q, -th2 * x1 + t3 * (b - t1 * t2 * a));
    kernel = f1 * kernel;
    kernel = (b - t1 * t2 * a) * kernel;
    kernel *= t1;
    kernel = lead * kernel;
    kernel = lead * kernel;
    kernel *= std::pow(1.0 - u, 3);
    kernel = J::exp_times(expo, kernel);
    return {kernel, lead * (1.0 - t1), x2 + x3 + u};
  }
};

/// c31: [0,1]^3, point (t1, t2, u); d^4/dx1 dx2 dx3^2.
struct C31 {
  using J = Jet<1, 1, 2>;
  using A = J::Affine;
  static constexpr Slot slot_a = Slot::p1;
  static constexpr Slot slot_b = Slot::p3;
  static constexpr int dims = 3;
  static constexpr bool simplex = false;
  static constexpr J::MultiIndex orders{1, 1, 2};
  static int nodes(const TermGrids& g) { return g.c31; }

  Context ctx;
  double prefactor() const { return 1.0 / (ctx.th1 * ctx.th1); }

  KernelParts<J> parts(std::span<const double> p) const {
    const double t1 = p[0], t2 = p[1], u = p[2];
    const auto& [th1, th2, th3, R, Q] = ctx;
    const A x1 = A::variable(0);
    const A x2 = A::variable(1);
    const A x3 = A::variable(2);
    const A w = 1.0 + th1 * x1 + th3 * x3;
    const A expo = -R * (th1 * x2 + th3 * x3) + R * t1 * (1.0 + t2) * w - th1 * R * t2 * (x1 - x2);
    J kernel = J::compose(Q, -th1 * x2 + t1 * t2 * w - th1 * t2 * (x1 - x2)) * J::compose(Q, -th3 * x3 + t1 * w);
    kernel = (-th1 * (x1 - x2) + t1 * w) * kernel;
    kernel = w * kernel;
    kernel *= (1.0 - u);
    kernel = J::exp_times(expo, kernel);
    return {kernel, x1 + x2 + 1.0 - (th3 / th1) * (1.0 - u), x3 + u};
  }
};

/// Mollifier polynomials are only ever evaluated on [0, 1] at x = 0.
inline void check_argument(double arg) {
  if (arg < -1e-12 || arg > 1.0 + 1e-12) {
    throw std::logic_error("polynomial argument " + std::to_string(arg) + " outside [0, 1] at x = 0");
  }
}

template <class Term, class F>
auto integrate_term(F& f, const GridSpec& spec, Exec exec) {
  if constexpr (Term::simplex) {
    return integrate_c12_region(f, spec, exec);
  } else {
    return integrate_cube(f, spec, exec);
  }
}

/// Value path: integrate kernel * A(arg_a) * B(arg_b) as a jet, extract once.
template <class Term>
TermValue evaluate(const Term& term, const Polynomial& a, const Polynomial& b, int nodes, Exec exec) {
  using J = typename Term::J;
  GridSpec spec{Term::dims, nodes};
  auto f = [&](std::span<const double> p) -> J {
    const auto parts = term.parts(p);
    check_argument(parts.arg_a.c0);
    check_argument(parts.arg_b.c0);
    return parts.kernel * J::compose(a, parts.arg_a) * J::compose(b, parts.arg_b);
  };
  const auto r = integrate_term<Term>(f, spec, exec);
  const double scale = term.prefactor();
  const double fine = scale * extract(r.value, Term::orders);
  const double coarse = scale * extract(r.coarse_value, Term::orders);
  return {fine, std::abs(fine - coarse), nodes, r.evaluations};
}

/// Per-node extraction of the same integrand; equal to `evaluate` by linearity.
template <class Term>
double evaluate_pointwise(const Term& term, const Polynomial& a, const Polynomial& b, int nodes, Exec exec) {
  using J = typename Term::J;
  GridSpec spec{Term::dims, nodes};
  spec.estimate_error = false;
  auto f = [&](std::span<const double> p) -> double {
    const auto parts = term.parts(p);
    return extract_product(parts.kernel * J::compose(a, parts.arg_a), J::compose(b, parts.arg_b), Term::orders);
  };
  return term.prefactor() * integrate_term<Term>(f, spec, exec).value;
}

using Matrix = std::array<std::array<double, kCoefCount>, kCoefCount>;

/// Matrix M of the term as a bilinear form: term = v^T M v with v the
/// coefficient vector. Only the (slot_a, slot_b) block is nonzero.
template <class Term>
Matrix bilinear_form(const Term& term, int nodes, Exec exec) {
  constexpr std::size_t na = slot_size(Term::slot_a);
  constexpr std::size_t nb = slot_size(Term::slot_b);
  using J = typename Term::J;
  std::array<Polynomial, na> basis_a;
  std::array<Polynomial, nb> basis_b;
  for (std::size_t i = 0; i < na; ++i) basis_a[i] = slot_basis(Term::slot_a, i);
  for (std::size_t j = 0; j < nb; ++j) basis_b[j] = slot_basis(Term::slot_b, j);

  GridSpec spec{Term::dims, nodes};
  spec.estimate_error = false;
  auto f = [&](std::span<const double> p) {
    const auto parts = term.parts(p);
    std::array<J, nb> bj;
    for (std::size_t j = 0; j < nb; ++j) bj[j] = J::compose(basis_b[j], parts.arg_b);
    FixedVector<na * nb> out;
    for (std::size_t i = 0; i < na; ++i) {
      const J ka = parts.kernel * J::compose(basis_a[i], parts.arg_a);
      for (std::size_t j = 0; j < nb; ++j) out[i * nb + j] = extract_product(ka, bj[j], Term::orders);
    }
    return out;
  };
  const auto r = integrate_term<Term>(f, spec, exec);
  Matrix m{};
  const double scale = term.prefactor();
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      m[slot_offset(Term::slot_a) + i][slot_offset(Term::slot_b) + j] = scale * r.value[i * nb + j];
    }
  }
  return m;
}

template <class Term>
TermValue evaluate_config(const MollifierConfig& cfg, Exec exec) {
  const Term term{Context(cfg)};
  return evaluate(term, slot_polynomial(cfg.polys, Term::slot_a), slot_polynomial(cfg.polys, Term::slot_b),
                  Term::nodes(cfg.grids), exec);
}

}  // namespace terms

/// c1 = P1(1)^2 + (1/theta1) int_0^1 int_0^1 e^{2Rt} (Q(t) P1'(u) + theta1 Q'(t) P1(u) + theta1 R Q(t) P1(u))^2 dt du
inline TermValue eval_c1(const MollifierConfig& cfg, Exec exec = {}) {
  const Polynomial p1 = cfg.polys.P1();
  const Polynomial dp1 = p1.derivative();
  const Polynomial q = cfg.polys.Q();
  const Polynomial dq = q.derivative();
  const double th1 = cfg.theta1;
  const double R = cfg.R;
  auto f = [&](std::span<const double> p) {
    const double t = p[0], u = p[1];
    const double inner = q(t) * dp1(u) + th1 * dq(t) * p1(u) + th1 * R * q(t) * p1(u);
    return std::exp(2.0 * R * t) * inner * inner;
  };
  const int n = cfg.grids.c1;
  const auto r = integrate_cube(f, GridSpec{2, n}, exec);
  const double head = p1(1.0) * p1(1.0);
  return {head + r.value / th1, r.refinement_delta / th1, n, r.evaluations};
}

inline TermValue eval_c12(const MollifierConfig& cfg, Exec exec = {}) {
  return terms::evaluate_config<terms::C12>(cfg, exec);
}
inline TermValue eval_c2(const MollifierConfig& cfg, Exec exec = {}) {
  return terms::evaluate_config<terms::C2>(cfg, exec);
}
inline TermValue eval_c3(const MollifierConfig& cfg, Exec exec = {}) {
  return terms::evaluate_config<terms::C3>(cfg, exec);
}
inline TermValue eval_c23(const MollifierConfig& cfg, Exec exec = {}) {
  return terms::evaluate_config<terms::C23>(cfg, exec);
}
inline TermValue eval_c31(const MollifierConfig& cfg, Exec exec = {}) {
  return terms::evaluate_config<terms::C31>(cfg, exec);
}

inline TermBreakdown eval_all(const MollifierConfig& cfg, Exec exec = {}) {
  validate(cfg, Strictness::structural);
  TermBreakdown tb;
  tb.c1 = eval_c1(cfg, exec);
  tb.c12 = eval_c12(cfg, exec);
  tb.c2 = eval_c2(cfg, exec);
  tb.c3 = eval_c3(cfg, exec);
  tb.c23 = eval_c23(cfg, exec);
  tb.c31 = eval_c31(cfg, exec);
  tb.c_total = aggregate(tb.c1.value, tb.c2.value, tb.c3.value, tb.c12.value, tb.c23.value, tb.c31.value);
  if (tb.c2.value < 0.0) tb.warnings.push_back("c2 is negative: " + std::to_string(tb.c2.value));
  if (tb.c3.value < 0.0) tb.warnings.push_back("c3 is negative: " + std::to_string(tb.c3.value));
  return tb;
}

/// c1 as a quadratic form in the P1 coefficients (a1..a5) at fixed R, Q.
inline terms::Matrix c1_form(const MollifierConfig& cfg, Exec exec = {}) {
  const Polynomial q = cfg.polys.Q();
  const Polynomial dq = q.derivative();
  const double th1 = cfg.theta1;
  const double R = cfg.R;
  GridSpec spec{2, cfg.grids.c1};
  spec.estimate_error = false;
  auto f = [&](std::span<const double> p) {
    const double t = p[0], u = p[1];
    const double qt = q(t);
    const double lin = th1 * (dq(t) + R * qt);
    std::array<double, 5> g{};
    double upow = 1.0;  // u^(i)
    for (int i = 0; i < 5; ++i) {
      g[static_cast<std::size_t>(i)] = qt * (i + 1) * upow + lin * upow * u;
      upow *= u;
    }
    FixedVector<25> out;
    const double e = std::exp(2.0 * R * t);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) out[i * 5 + j] = e * g[i] * g[j];
    }
    return out;
  };
  const auto r = integrate_cube(f, spec, exec);
  terms::Matrix m{};
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) m[i][j] = 1.0 + r.value[i * 5 + j] / th1;
  }
  return m;
}

/// All six terms as bilinear forms in the coefficient vector, for fixed
/// theta, R and Q (the polynomial coefficients of cfg are ignored).
struct QuadraticModel {
  terms::Matrix c1, c2, c3, c12, c23, c31;

  static double apply(const terms::Matrix& m, std::span<const double, kCoefCount> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < kCoefCount; ++i) {
      for (std::size_t j = 0; j < kCoefCount; ++j) s += v[i] * m[i][j] * v[j];
    }
    return s;
  }

  /// Symmetric matrix of c_total.
  terms::Matrix total() const {
    terms::Matrix t{};
    for (std::size_t i = 0; i < kCoefCount; ++i) {
      for (std::size_t j = 0; j < kCoefCount; ++j) {
        const double w = c1[i][j] + c2[i][j] + c3[i][j] + 2.0 * (c12[i][j] + c23[i][j] + c31[i][j]);
        t[i][j] += 0.5 * w;
        t[j][i] += 0.5 * w;
      }
    }
    return t;
  }
};

inline QuadraticModel quadratic_model(const MollifierConfig& cfg, const TermGrids& grids, Exec exec = {}) {
  using namespace terms;
  const Context ctx(cfg);
  QuadraticModel qm;
  MollifierConfig c1cfg = cfg;
  c1cfg.grids.c1 = grids.c1;
  qm.c1 = c1_form(c1cfg, exec);
  qm.c12 = bilinear_form(C12{ctx}, grids.c12, exec);
  qm.c2 = bilinear_form(C2{ctx}, grids.c2, exec);
  qm.c3 = bilinear_form(C3{ctx}, grids.c3, exec);
  qm.c23 = bilinear_form(C23{ctx}, grids.c23, exec);
  qm.c31 = bilinear_form(C31{ctx}, grids.c31, exec);
  return qm;
}

}  // namespace critline
