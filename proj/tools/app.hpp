#pragma once

// Command implementations behind the critline executable. Each command
// writes its report to a file (or stdout) and returns a process exit code.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "critline/config_io.hpp"
#include "critline/kappa.hpp"
#include "critline/mollifier.hpp"
#include "critline/optimizer.hpp"
#include "critline/quadrature.hpp"
#include "critline/terms.hpp"
#include "critline/verify.hpp"

namespace critline::app {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kVerificationFailure = 4 };

struct GridOverrides {
  std::optional<int> all;
  std::optional<int> c1, c12, c2, c3, c23, c31;
};

struct RunOptions {
  std::string command;
  std::string config_path;
  std::string preset;
  std::string out_path;  // empty: stdout
  std::string format;  // json or csv; empty selects the command default
  unsigned workers = 1;  // 0: hardware concurrency
  std::uint64_t seed = 1;
  GridOverrides nodes;

  // sweep
  double r_min = 1.0;
  double r_max = 1.5;
  int r_steps = 11;

  // optimize
  std::size_t budget = 2000;
  int restarts = 3;
  std::optional<int> search_nodes;  // nodes per dimension during the search
  std::string trace_path;

  // verify
  int identity_samples = 100;
};

struct ResolvedConfig {
  MollifierConfig config;
  std::string source;
  double normalization_adjustment = 0.0;
};

inline ResolvedConfig resolve_config(const RunOptions& run) {
  if (!run.config_path.empty() && !run.preset.empty()) {
    throw ConfigError({"give either --config or --preset, not both"});
  }
  ResolvedConfig r;
  if (!run.config_path.empty()) {
    const auto loaded = load_config(run.config_path);
    r.config = loaded.config;
    r.normalization_adjustment = loaded.normalization_adjustment;
    r.source = run.config_path;
  } else if (run.preset == "paper_kappa") {
    r.config = paper_kappa_config();
    r.source = "preset:paper_kappa";
  } else if (run.preset == "paper_kappa_star") {
    r.config = paper_kappa_star_config();
    r.source = "preset:paper_kappa_star";
  } else if (run.preset.empty()) {
    throw ConfigError({"no configuration given (use --config FILE or --preset NAME)"});
  } else {
    throw ConfigError({"unknown preset '" + run.preset + "' (expected paper_kappa or paper_kappa_star)"});
  }
  auto set = [&](const std::optional<int>& v, int& dst) {
    if (run.nodes.all) dst = *run.nodes.all;
    if (v) dst = *v;
  };
  set(run.nodes.c1, r.config.grids.c1);
  set(run.nodes.c12, r.config.grids.c12);
  set(run.nodes.c2, r.config.grids.c2);
  set(run.nodes.c3, r.config.grids.c3);
  set(run.nodes.c23, r.config.grids.c23);
  set(run.nodes.c31, r.config.grids.c31);
  return r;
}

inline Exec exec_for(const RunOptions& run) {
  unsigned w = run.workers;
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  return Exec{w};
}

inline Json config_json(const MollifierConfig& cfg) {
  Json j;
  j["mode"] = to_string(cfg.mode());
  j["R"] = cfg.R;
  j["theta"] = {cfg.theta1, cfg.theta2, cfg.theta3};
  j["p1"] = cfg.polys.p1;
  j["p2"] = cfg.polys.p2;
  j["p3"] = cfg.polys.p3;
  if (cfg.mode() == Mode::kappa) {
    j["q"] = cfg.polys.q_kappa;
  } else {
    j["q_slope"] = cfg.polys.q_slope;
  }
  j["nodes"] = {{"c1", cfg.grids.c1},   {"c12", cfg.grids.c12}, {"c2", cfg.grids.c2},
                {"c3", cfg.grids.c3},   {"c23", cfg.grids.c23}, {"c31", cfg.grids.c31}};
  j["text"] = write_config(cfg);
  return j;
}

inline Json term_json(const TermValue& t) {
  return {{"value", t.value},
          {"refinement_delta", t.refinement_delta},
          {"nodes_per_dim", t.nodes_per_dim},
          {"evaluations", t.evaluations}};
}

inline Json bound_json(const BoundReport& r) {
  Json j;
  j["label"] = BoundReport::label;
  j["mode"] = to_string(r.mode);
  j["R"] = r.R;
  j["c_total"] = r.c_total;
  j["bound"] = r.bound;
  j["terms"] = {{"c1", term_json(r.terms.c1)},   {"c2", term_json(r.terms.c2)},   {"c3", term_json(r.terms.c3)},
                {"c12", term_json(r.terms.c12)}, {"c23", term_json(r.terms.c23)}, {"c31", term_json(r.terms.c31)}};
  j["warnings"] = r.terms.warnings;
  return j;
}

/// Writes text to the output path or stdout.
inline void emit(const RunOptions& run, const std::string& text) {
  if (run.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(run.out_path);
  if (!out) throw std::runtime_error("cannot write " + run.out_path);
  out << text;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string csv_row(std::initializer_list<double> values) {
  std::string s;
  for (double v : values) s += (s.empty() ? "" : ",") + format_number(v);
  return s + "\n";
}

inline int cmd_eval(const RunOptions& run) {
  const Stopwatch clock;
  const auto rc = resolve_config(run);
  validate(rc.config, Strictness::run);
  const auto report = evaluate_bound(rc.config, exec_for(run));
  if (run.format == "csv") {
    emit(run, "R,c_total,bound\n" + csv_row({report.R, report.c_total, report.bound}));
    return kOk;
  }
  Json j;
  j["command"] = "eval";
  j["source"] = rc.source;
  j["report"] = bound_json(report);
  j["normalization_adjustment"] = rc.normalization_adjustment;
  j["config"] = config_json(rc.config);
  j["timing"] = {{"wall_seconds", clock.seconds()}};
  emit(run, j.dump(2) + "\n");
  return kOk;
}

inline int cmd_sweep(const RunOptions& run) {
  const Stopwatch clock;
  const auto rc = resolve_config(run);
  if (run.r_steps < 1 || !(run.r_min <= run.r_max) || (run.r_steps == 1 && run.r_min != run.r_max)) {
    throw ConfigError({"sweep: need r_min <= r_max and at least one step (one step requires r_min == r_max)"});
  }
  std::vector<BoundReport> rows;
  for (int i = 0; i < run.r_steps; ++i) {
    MollifierConfig cfg = rc.config;
    cfg.R = run.r_steps == 1 ? run.r_min : run.r_min + (run.r_max - run.r_min) * i / (run.r_steps - 1);
    validate(cfg, Strictness::run);
    rows.push_back(evaluate_bound(cfg, exec_for(run)));
  }
  if (run.format == "json") {
    Json j;
    j["command"] = "sweep";
    j["source"] = rc.source;
    j["rows"] = Json::array();
    for (const auto& r : rows) j["rows"].push_back({{"R", r.R}, {"c_total", r.c_total}, {"bound", r.bound}});
    j["config"] = config_json(rc.config);
    j["timing"] = {{"wall_seconds", clock.seconds()}};
    emit(run, j.dump(2) + "\n");
    return kOk;
  }
  std::string csv = "R,c_total,bound\n";
  for (const auto& r : rows) csv += csv_row({r.R, r.c_total, r.bound});
  emit(run, csv);
  return kOk;
}

struct VerifyThresholds {
  double int_identity = 1e-11;
  double partial_fraction = 1e-11;
  double operator_reduction = 1e-6;
};

inline int cmd_verify(const RunOptions& run, const VerifyThresholds& thr = {}) {
  const Stopwatch clock;
  const auto rc = resolve_config(run);
  validate(rc.config, Strictness::structural);

  std::mt19937_64 rng(run.seed);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  std::uniform_real_distribution<double> zlog(0.0, 5.0);
  double int_max = 0.0;
  double pf_max = 0.0;
  for (int i = 0; i < run.identity_samples; ++i) int_max = std::max(int_max, check_int_identity(zlog(rng), shift(rng)));
  for (int i = 0; i < run.identity_samples;) {
    const double a = shift(rng), b = shift(rng), c = shift(rng);
    if (std::abs(a + c) < 1e-2 || std::abs(b + c) < 1e-2 || std::abs(b - a) < 1e-2) continue;
    pf_max = std::max(pf_max, check_partial_fraction(a, b, c));
    ++i;
  }
  const auto red = check_operator_reduction_c31(rc.config, 5, exec_for(run));

  Json checks = Json::array();
  bool ok = true;
  auto add = [&](const char* name, double residual, double threshold, Json extra = Json::object()) {
    const bool pass = residual < threshold;
    ok = ok && pass;
    Json c{{"name", name}, {"residual", residual}, {"threshold", threshold}, {"pass", pass}};
    c.update(extra);
    checks.push_back(c);
  };
  add("int_identity", int_max, thr.int_identity, {{"samples", run.identity_samples}});
  add("partial_fraction", pf_max, thr.partial_fraction, {{"samples", run.identity_samples}});
  add("operator_reduction_c31", red.residual, thr.operator_reduction,
      {{"reduced", red.reduced}, {"direct", red.direct}, {"relative", red.relative}});

  Json j;
  j["command"] = "verify";
  j["source"] = rc.source;
  j["pass"] = ok;
  j["checks"] = checks;
  j["config"] = config_json(rc.config);
  j["timing"] = {{"wall_seconds", clock.seconds()}};
  emit(run, j.dump(2) + "\n");
  return ok ? kOk : kVerificationFailure;
}

inline int cmd_optimize(const RunOptions& run, std::ostream& progress_log = std::cerr) {
  const Stopwatch clock;
  const auto rc = resolve_config(run);
  OptimizeOptions opt;
  opt.budget = run.budget;
  opt.seed = run.seed;
  opt.restarts = run.restarts;
  if (run.search_nodes) {
    const int n = *run.search_nodes;
    opt.search_grids = {n, n, n, n, n, n};
  }
  opt.exec = exec_for(run);
  opt.progress = [&](const OptimizeProgress& p) {
    progress_log << "eval " << p.evaluation << "  R " << format_number(p.R) << "  bound " << format_number(p.bound)
                 << "  best " << format_number(p.best_bound) << "\n";
  };
  const auto res = optimize(rc.config, opt);

  if (!run.trace_path.empty()) {
    std::ofstream trace(run.trace_path);
    if (!trace) throw std::runtime_error("cannot write " + run.trace_path);
    trace << "evaluation,best_bound\n";
    for (const auto& t : res.trace) trace << t.evaluation << "," << format_number(t.bound) << "\n";
  }
  Json j;
  j["command"] = "optimize";
  j["source"] = rc.source;
  j["start_bound"] = res.start_bound;
  j["best_bound"] = res.best_bound;
  j["evaluations"] = res.iterations;
  j["converged"] = res.converged;
  j["improved"] = res.improved;
  j["seed"] = run.seed;
  j["best_config"] = config_json(res.best_config);
  j["start_config"] = config_json(rc.config);
  j["timing"] = {{"wall_seconds", clock.seconds()}};
  emit(run, j.dump(2) + "\n");
  return kOk;
}

/// Dispatch with the exit-code mapping; diagnostics go to `err`.
inline int run_command(const RunOptions& run, std::ostream& err = std::cerr) {
  try {
    if (run.command == "eval") return cmd_eval(run);
    if (run.command == "sweep") return cmd_sweep(run);
    if (run.command == "verify") return cmd_verify(run);
    if (run.command == "optimize") return cmd_optimize(run, err);
    err << "unknown command '" << run.command << "'\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NonFiniteIntegrand& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const InvalidAggregate& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace critline::app
