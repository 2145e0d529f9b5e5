#pragma once

// Maximisation of the bound over the mollifier parameters.
//
// For fixed R and Q, c_total is a quadratic form v^T M v in the polynomial
// coefficients v = (a1..a5, b3..b5, c4, c5) under the single linear
// constraint e^T v = 1 (P1(1) + P3(1) = 1). Its minimum is
//
//   c* = 1 / (e^T M^{-1} e),  attained at v* = M^{-1} e / (e^T M^{-1} e),
//
// so the simplex only has to search over R and the coordinates of Q. The
// search runs on a coarse grid; the winner is re-evaluated on the fine grid
// and replaces the start only if it is better there.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "critline/kappa.hpp"
#include "critline/mollifier.hpp"
#include "critline/quadrature.hpp"
#include "critline/terms.hpp"

namespace critline {

struct ProfiledPolynomials {
  PolynomialSpec polys;
  double c_total = 0.0;
};

/// Optimal P1, P2, P3 for the R and Q of cfg on the given grids. Returns
/// nullopt if the quadratic form is not positive definite.
inline std::optional<ProfiledPolynomials> profile_polynomials(const MollifierConfig& cfg, const TermGrids& grids,
                                                              Exec exec = {}) {
  const auto total = quadratic_model(cfg, grids, exec).total();
  Eigen::Matrix<double, 10, 10> m;
  for (std::size_t i = 0; i < kCoefCount; ++i) {
    for (std::size_t j = 0; j < kCoefCount; ++j) m(static_cast<int>(i), static_cast<int>(j)) = total[i][j];
  }
  if (!m.allFinite()) return std::nullopt;
  Eigen::Matrix<double, 10, 1> e;
  e << 1, 1, 1, 1, 1, 0, 0, 0, 1, 1;
  const Eigen::LDLT<Eigen::Matrix<double, 10, 10>> ldlt(m);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Eigen::Matrix<double, 10, 1> w = ldlt.solve(e);
  const double ew = e.dot(w);
  if (!(ew > 0.0) || !std::isfinite(ew)) return std::nullopt;
  const Eigen::Matrix<double, 10, 1> v = w / ew;

  ProfiledPolynomials out;
  out.polys = cfg.polys;
  out.polys.p1 = {v(0), v(1), v(2), v(3), v(4)};
  out.polys.p2 = {v(5), v(6), v(7)};
  out.polys.p3 = {v(8), v(9)};
  // Restore the constraint exactly after the solve.
  out.polys.p1[0] = 1.0 - (v(1) + v(2) + v(3) + v(4)) - (v(8) + v(9));
  out.c_total = 1.0 / ew;
  return out;
}

struct TracePoint {
  std::size_t evaluation = 0;
  double bound = 0.0;  // best search-grid bound so far
};

struct OptimizeProgress {
  std::size_t evaluation = 0;
  double R = 0.0;
  double bound = 0.0;       // this candidate, search grid
  double best_bound = 0.0;  // best so far, search grid
};

struct OptimizeOptions {
  std::size_t budget = 2000;  // objective evaluations during the search
  TermGrids search_grids{12, 12, 12, 10, 10, 12};
  std::optional<TermGrids> fine_grids;  // defaults to the start's grids
  std::uint64_t seed = 1;
  int restarts = 3;
  double jitter = 1e-2;
  double R_min = 0.9;
  double R_max = 1.6;
  double tolerance = 1e-10;  // simplex spread in bound that counts as converged
  Exec exec;
  std::function<void(const OptimizeProgress&)> progress;
};

struct OptimizationResult {
  MollifierConfig best_config;
  double best_bound = 0.0;   // fine grid
  double start_bound = 0.0;  // fine grid
  std::size_t iterations = 0;  // objective evaluations used
  std::vector<TracePoint> trace;
  bool converged = false;
  bool improved = false;
};

/// Search coordinates: (R, q1, q3, q5) in kappa mode, (R, slope) in kappa_star mode.
inline std::vector<double> search_coordinates(const MollifierConfig& cfg) {
  if (cfg.mode() == Mode::kappa) {
    return {cfg.R, cfg.polys.q_kappa[1], cfg.polys.q_kappa[2], cfg.polys.q_kappa[3]};
  }
  return {cfg.R, cfg.polys.q_slope};
}

inline MollifierConfig apply_search_coordinates(const MollifierConfig& base, const std::vector<double>& y) {
  MollifierConfig cfg = base;
  cfg.R = y[0];
  if (cfg.mode() == Mode::kappa) {
    cfg.polys.q_kappa = {1.0 - (y[1] + y[2] + y[3]), y[1], y[2], y[3]};
  } else {
    cfg.polys.q_slope = y[1];
  }
  return cfg;
}

namespace detail {

/// Nelder-Mead minimisation with a shared evaluation budget.
class NelderMead {
 public:
  using Objective = std::function<double(const std::vector<double>&)>;

  NelderMead(Objective f, std::size_t& evaluations, std::size_t budget)
      : f_(std::move(f)), evaluations_(evaluations), budget_(budget) {}

  struct Outcome {
    std::vector<double> x;
    double fx = 0.0;
    bool converged = false;
  };

  Outcome run(const std::vector<double>& x0, const std::vector<double>& steps, double tolerance) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts{x0};
    for (std::size_t i = 0; i < n; ++i) {
      auto p = x0;
      p[i] += steps[i];
      pts.push_back(p);
    }
    std::vector<double> vals;
    for (const auto& p : pts) {
      if (exhausted()) return best_of(pts, vals, false);
      vals.push_back(eval(p));
    }

    while (true) {
      std::vector<std::size_t> order(n + 1);
      for (std::size_t i = 0; i <= n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[n - 1];
      if (std::abs(vals[worst] - vals[best]) <= tolerance) return {pts[best], vals[best], true};
      if (exhausted()) return {pts[best], vals[best], false};

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == worst) continue;
        for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / static_cast<double>(n);
      }
      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
        return p;
      };

      const auto xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < vals[best]) {
        if (!exhausted()) {
          const auto xe = along(-2.0);
          const double fe = eval(xe);
          if (fe < fr) {
            pts[worst] = xe;
            vals[worst] = fe;
            continue;
          }
        }
        pts[worst] = xr;
        vals[worst] = fr;
        continue;
      }
      if (fr < vals[second]) {
        pts[worst] = xr;
        vals[worst] = fr;
        continue;
      }
      if (exhausted()) return {pts[best], vals[best], false};
      const bool outside = fr < vals[worst];
      const auto xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        if (exhausted()) return {pts[best], vals[best], false};
        for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
        vals[i] = eval(pts[i]);
      }
    }
  }

 private:
  bool exhausted() const { return evaluations_ >= budget_; }

  double eval(const std::vector<double>& x) {
    ++evaluations_;
    return f_(x);
  }

  static Outcome best_of(const std::vector<std::vector<double>>& pts, const std::vector<double>& vals, bool conv) {
    if (vals.empty()) return {pts.front(), std::numeric_limits<double>::infinity(), conv};
    const auto it = std::min_element(vals.begin(), vals.end());
    return {pts[static_cast<std::size_t>(it - vals.begin())], *it, conv};
  }

  Objective f_;
  std::size_t& evaluations_;
  std::size_t budget_;
};

}  // namespace detail

inline OptimizationResult optimize(const MollifierConfig& start, const OptimizeOptions& opt = {}) {
  validate(start, Strictness::run);
  OptimizationResult res;
  MollifierConfig fine_start = start;
  if (opt.fine_grids) fine_start.grids = *opt.fine_grids;
  res.start_bound = evaluate_bound(fine_start, opt.exec).bound;
  res.best_config = fine_start;
  res.best_bound = res.start_bound;
  res.trace.push_back({0, res.start_bound});
  if (opt.budget == 0) return res;

  const double worst = std::numeric_limits<double>::infinity();
  double best_search = -worst;
  std::vector<double> best_y = search_coordinates(fine_start);
  std::size_t evals = 0;

  // Minimise -bound on the search grid; infeasible points score +inf.
  auto objective = [&](const std::vector<double>& y) {
    if (!(y[0] >= opt.R_min && y[0] <= opt.R_max)) return worst;
    for (double v : y) {
      if (!std::isfinite(v)) return worst;
    }
    const MollifierConfig cfg = apply_search_coordinates(fine_start, y);
    if (!check(cfg, Strictness::structural).empty()) return worst;
    const auto prof = profile_polynomials(cfg, opt.search_grids, opt.exec);
    double b = -worst;
    if (prof) {
      MollifierConfig cand = cfg;
      cand.polys = prof->polys;
      validate(cand, Strictness::structural);
      b = 1.0 - std::log(prof->c_total) / cfg.R;
    }
    if (b > best_search) {
      best_search = b;
      best_y = y;
    }
    res.trace.push_back({evals, std::max(best_search, res.trace.back().bound)});
    if (opt.progress) opt.progress({evals, y[0], b, best_search});
    return std::isfinite(b) ? -b : worst;
  };

  detail::NelderMead nm(objective, evals, opt.budget);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto steps_for = [](const std::vector<double>& y) {
    std::vector<double> s(y.size());
    s[0] = 0.05;
    for (std::size_t i = 1; i < y.size(); ++i) s[i] = std::max(0.01, 0.05 * std::abs(y[i]));
    return s;
  };

  auto outcome = nm.run(best_y, steps_for(best_y), opt.tolerance);
  bool converged = outcome.converged;
  for (int r = 0; r < opt.restarts && evals < opt.budget; ++r) {
    auto y = best_y;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += opt.jitter * normal(rng) * std::max(1.0, std::abs(y[i]));
    y[0] = std::clamp(y[0], opt.R_min, opt.R_max);
    outcome = nm.run(y, steps_for(y), opt.tolerance);
    converged = converged && outcome.converged;
  }
  res.iterations = evals;

  // Confirm on the fine grid.
  MollifierConfig cand = apply_search_coordinates(fine_start, best_y);
  if (const auto prof = profile_polynomials(cand, cand.grids, opt.exec)) {
    cand.polys = prof->polys;
    const double fine_bound = evaluate_bound(cand, opt.exec).bound;
    if (fine_bound > res.start_bound) {
      res.best_config = cand;
      res.best_bound = fine_bound;
      res.improved = true;
    }
  }
  res.converged = converged && res.improved;
  return res;
}

}  // namespace critline
