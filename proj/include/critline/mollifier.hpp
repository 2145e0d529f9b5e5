#pragma once

// Free data of the three-piece mollifier: length exponents theta_i, the shift
// R, and the polynomials P1, P2, P3, Q with their structural constraints.

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "critline/polynomial.hpp"

namespace critline {

/// kappa: Q is a combination of 1 and odd powers of (1 - 2x).
/// kappa_star: Q(x) = 1 - q x (linear Q gives the simple-zero bound).
enum class Mode { kappa, kappa_star };

inline const char* to_string(Mode m) { return m == Mode::kappa ? "kappa" : "kappa_star"; }

inline Mode mode_from_string(const std::string& s) {
  if (s == "kappa") return Mode::kappa;
  if (s == "kappa_star") return Mode::kappa_star;
  throw std::invalid_argument("unknown mode '" + s + "' (expected kappa or kappa_star)");
}

inline constexpr double kTheta1Max = 4.0 / 7.0;
inline constexpr double kTheta2Max = 0.5;
inline constexpr double kTheta3Max = 0.25;
inline constexpr double kConstraintTol = 1e-12;

struct PolynomialSpec {
  std::array<double, 5> p1{};  // coefficients of x^1 .. x^5
  std::array<double, 3> p2{};  // x^3 .. x^5
  std::array<double, 2> p3{};  // x^4 .. x^5
  Mode q_mode = Mode::kappa;
  std::array<double, 4> q_kappa{1.0, 0.0, 0.0, 0.0};  // on 1, (1-2x), (1-2x)^3, (1-2x)^5
  double q_slope = 0.0;                               // kappa_star: Q(x) = 1 - q_slope x

  Polynomial P1() const { return Polynomial({0.0, p1[0], p1[1], p1[2], p1[3], p1[4]}); }
  Polynomial P2() const { return Polynomial({0.0, 0.0, 0.0, p2[0], p2[1], p2[2]}); }
  Polynomial P3() const { return Polynomial({0.0, 0.0, 0.0, 0.0, p3[0], p3[1]}); }
  Polynomial P2_second_derivative() const { return P2().derivative(2); }

  /// Q in monomial coefficients.
  Polynomial Q() const {
    if (q_mode == Mode::kappa_star) return Polynomial({1.0, -q_slope});
    Polynomial q = Polynomial({q_kappa[0]});
    q += Polynomial::affine_power(1.0, -2.0, 1) * q_kappa[1];
    q += Polynomial::affine_power(1.0, -2.0, 3) * q_kappa[2];
    q += Polynomial::affine_power(1.0, -2.0, 5) * q_kappa[3];
    return q;
  }

  friend bool operator==(const PolynomialSpec&, const PolynomialSpec&) = default;
};

/// Quadrature resolution (nodes per dimension) for each main term.
struct TermGrids {
  int c1 = 24;
  int c12 = 24;
  int c2 = 16;
  int c3 = 16;
  int c23 = 16;
  int c31 = 24;

  friend bool operator==(const TermGrids&, const TermGrids&) = default;
};

struct MollifierConfig {
  double theta1 = kTheta1Max;
  double theta2 = kTheta2Max;
  double theta3 = kTheta3Max;
  double R = 1.0;
  PolynomialSpec polys;
  TermGrids grids;

  Mode mode() const { return polys.q_mode; }

  friend bool operator==(const MollifierConfig&, const MollifierConfig&) = default;
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics)
      : std::invalid_argument(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  static std::string join(const std::vector<std::string>& d) {
    std::string s = "invalid mollifier configuration";
    for (const auto& line : d) s += "\n  " + line;
    return s;
  }
  std::vector<std::string> diagnostics_;
};

/// `structural` checks the polynomial and theta constraints only; `run` adds
/// the engine guard R in [0.5, 2.5] applied to user-facing runs.
enum class Strictness { structural, run };

inline std::vector<std::string> check(const MollifierConfig& cfg, Strictness level = Strictness::run) {
  std::vector<std::string> out;
  auto finite = [&](double v, const std::string& name) {
    if (!std::isfinite(v)) out.push_back(name + ": not finite");
  };
  finite(cfg.theta1, "theta1");
  finite(cfg.theta2, "theta2");
  finite(cfg.theta3, "theta3");
  finite(cfg.R, "R");
  for (std::size_t i = 0; i < cfg.polys.p1.size(); ++i) finite(cfg.polys.p1[i], "p1[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < cfg.polys.p2.size(); ++i) finite(cfg.polys.p2[i], "p2[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < cfg.polys.p3.size(); ++i) finite(cfg.polys.p3[i], "p3[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < cfg.polys.q_kappa.size(); ++i) finite(cfg.polys.q_kappa[i], "q[" + std::to_string(i) + "]");
  finite(cfg.polys.q_slope, "q_slope");
  if (!out.empty()) return out;

  if (!(0.0 < cfg.theta3 && cfg.theta3 < cfg.theta2 && cfg.theta2 < cfg.theta1 && cfg.theta1 < 1.0)) {
    out.push_back("theta: need 0 < theta3 < theta2 < theta1 < 1");
  }
  if (cfg.theta1 > kTheta1Max + 1e-15) out.push_back("theta1: must not exceed 4/7");
  if (cfg.theta2 > kTheta2Max + 1e-15) out.push_back("theta2: must not exceed 1/2");
  if (cfg.theta3 > kTheta3Max + 1e-15) out.push_back("theta3: must not exceed 1/4");
  if (cfg.R < 0.0) out.push_back("R: must be non-negative");
  if (level == Strictness::run && (cfg.R < 0.5 || cfg.R > 2.5)) out.push_back("R: must lie in [0.5, 2.5]");

  const double norm = cfg.polys.P1()(1.0) + cfg.polys.P3()(1.0);
  if (std::abs(norm - 1.0) > kConstraintTol) {
    out.push_back("p1, p3: P1(1) + P3(1) = " + std::to_string(norm) + ", must equal 1");
  }
  const double q0 = cfg.polys.Q()(0.0);
  if (std::abs(q0 - 1.0) > kConstraintTol) out.push_back("q: Q(0) = " + std::to_string(q0) + ", must equal 1");

  for (const auto& [name, g] : {std::pair{"grids.c1", cfg.grids.c1}, std::pair{"grids.c12", cfg.grids.c12},
                                std::pair{"grids.c2", cfg.grids.c2}, std::pair{"grids.c3", cfg.grids.c3},
                                std::pair{"grids.c23", cfg.grids.c23}, std::pair{"grids.c31", cfg.grids.c31}}) {
    if (g < 2) out.push_back(std::string(name) + ": need at least 2 nodes per dimension");
  }
  return out;
}

inline void validate(const MollifierConfig& cfg, Strictness level = Strictness::run) {
  auto d = check(cfg, level);
  if (!d.empty()) throw ConfigError(std::move(d));
}

/// Published kappa configuration (R = 1.26).
inline MollifierConfig paper_kappa_config() {
  MollifierConfig cfg;
  cfg.R = 1.26;
  cfg.polys.q_mode = Mode::kappa;
  cfg.polys.q_kappa = {0.49068, 0.61077, -0.14199, 0.04054};
  cfg.polys.p1 = {0.83651, 0.09758, -0.29393, 0.73372, -0.3753};
  cfg.polys.p2 = {0.0237, -0.00744, 0.00174};
  cfg.polys.p3 = {0.00155, -0.00013};
  return cfg;
}

/// Published simple-zero configuration (R = 1.12, linear Q).
inline MollifierConfig paper_kappa_star_config() {
  MollifierConfig cfg;
  cfg.R = 1.12;
  cfg.polys.q_mode = Mode::kappa_star;
  cfg.polys.q_slope = 1.03232;
  cfg.polys.p1 = {0.82653, 0.02626, -0.00774, 0.34803, -0.19371};
  cfg.polys.p2 = {0.0324, -0.00759, 0.00742};
  cfg.polys.p3 = {0.00094, -0.00031};
  return cfg;
}

/// Number of free coordinates: a2..a5, b3..b5, c4, c5, then the Q coordinates
/// (q1, q3, q5 in kappa mode; the slope in kappa_star mode).
inline std::size_t free_param_count(Mode mode) { return 9 + (mode == Mode::kappa ? 3 : 1); }

inline std::vector<double> to_free_params(const MollifierConfig& cfg) {
  const auto& p = cfg.polys;
  std::vector<double> v{p.p1[1], p.p1[2], p.p1[3], p.p1[4], p.p2[0], p.p2[1], p.p2[2], p.p3[0], p.p3[1]};
  if (p.q_mode == Mode::kappa) {
    v.insert(v.end(), {p.q_kappa[1], p.q_kappa[2], p.q_kappa[3]});
  } else {
    v.push_back(p.q_slope);
  }
  return v;
}

/// Inverse of to_free_params. a1 is fixed by P1(1) + P3(1) = 1 and the
/// constant of Q by Q(0) = 1. Theta and grids are taken from `base`.
inline MollifierConfig from_free_params(std::span<const double> v, Mode mode, double R,
                                        const MollifierConfig& base = {}) {
  if (v.size() != free_param_count(mode)) {
    throw std::invalid_argument("from_free_params: expected " + std::to_string(free_param_count(mode)) +
                                " coordinates, got " + std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw std::invalid_argument("from_free_params: coordinate " + std::to_string(i) + " is not finite");
  }
  MollifierConfig cfg = base;
  cfg.R = R;
  auto& p = cfg.polys;
  p.q_mode = mode;
  p.p1 = {0.0, v[0], v[1], v[2], v[3]};
  p.p2 = {v[4], v[5], v[6]};
  p.p3 = {v[7], v[8]};
  p.p1[0] = 1.0 - (v[0] + v[1] + v[2] + v[3]) - (v[7] + v[8]);
  if (mode == Mode::kappa) {
    p.q_kappa = {1.0 - (v[9] + v[10] + v[11]), v[9], v[10], v[11]};
    p.q_slope = 0.0;
  } else {
    p.q_kappa = {1.0, 0.0, 0.0, 0.0};
    p.q_slope = v[9];
  }
  return cfg;
}

/// Absorb a deficit in P1(1) + P3(1) = 1 into the x-coefficient of P1.
/// Returns the amount added to a1; deficits above `max_adjustment` are an error.
inline double normalize(MollifierConfig& cfg, double max_adjustment = 1e-3) {
  const double deficit = 1.0 - (cfg.polys.P1()(1.0) + cfg.polys.P3()(1.0));
  if (std::abs(deficit) <= kConstraintTol) return 0.0;
  if (std::abs(deficit) > max_adjustment) {
    throw ConfigError({"p1, p3: P1(1) + P3(1) misses 1 by " + std::to_string(deficit) +
                       ", beyond the renormalisation limit"});
  }
  cfg.polys.p1[0] += deficit;
  return deficit;
}

}  // namespace critline
