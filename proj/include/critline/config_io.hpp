#pragma once

// Plain-text key-value configuration files.
//
//   # comment
//   mode    = kappa              # or kappa_star
//   R       = 1.26
//   theta1  = 4/7                # optional, default 4/7 (1/2, 1/4 for theta2, theta3)
//   p1      = a1 a2 a3 a4 a5     # P1 coefficients of x .. x^5
//   p2      = b3 b4 b5           # P2 coefficients of x^3 .. x^5
//   p3      = c4 c5              # P3 coefficients of x^4 .. x^5
//   q       = q0 q1 q3 q5        # kappa: Q on 1, (1-2x), (1-2x)^3, (1-2x)^5
//   q_slope = q                  # kappa_star: Q(x) = 1 - q x
//   nodes.c1 = 24                # optional per-term quadrature overrides
//
// Numbers may be written as decimals or as fractions n/d. Unknown,
// duplicate and missing keys are errors reported with line numbers.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "critline/mollifier.hpp"

namespace critline {

struct LoadedConfig {
  MollifierConfig config;
  double normalization_adjustment = 0.0;  // amount added to a1 by normalize()
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_decimal(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

inline std::optional<double> parse_number(std::string_view s) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s);
  const auto num = parse_decimal(trim(s.substr(0, slash)));
  const auto den = parse_decimal(trim(s.substr(slash + 1)));
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

inline std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
};

}  // namespace detail

/// Parse configuration text. `source` names the input in diagnostics.
inline LoadedConfig parse_config(std::string_view text, const std::string& source = "config") {
  using detail::trim;
  static const std::vector<std::string> known = {
      "mode",     "R",        "theta1",    "theta2",    "theta3",   "p1",       "p2",       "p3",
      "q",        "q_slope",  "nodes.c1",  "nodes.c12", "nodes.c2", "nodes.c3", "nodes.c23", "nodes.c31"};

  std::vector<std::string> errors;
  auto fail = [&](int line, const std::string& msg) {
    errors.push_back(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + msg);
  };

  std::map<std::string, detail::Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(line_no, "expected 'key = value'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail(line_no, "unknown key '" + key + "'");
      continue;
    }
    if (const auto it = entries.find(key); it != entries.end()) {
      fail(line_no, "duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) + ")");
      continue;
    }
    if (value.empty()) {
      fail(line_no, "key '" + key + "' has no value");
      continue;
    }
    entries[key] = {value, line_no};
  }

  auto numbers = [&](const std::string& key, std::size_t count) -> std::vector<double> {
    const auto& e = entries.at(key);
    std::istringstream words(e.value);
    std::vector<double> out;
    std::string w;
    while (words >> w) {
      const auto v = detail::parse_number(w);
      if (!v || !std::isfinite(*v)) {
        fail(e.line, key + ": '" + w + "' is not a number");
        return {};
      }
      out.push_back(*v);
    }
    if (out.size() != count) {
      fail(e.line, key + ": expected " + std::to_string(count) + " value(s), got " + std::to_string(out.size()));
      return {};
    }
    return out;
  };

  LoadedConfig loaded;
  MollifierConfig& cfg = loaded.config;

  Mode mode = Mode::kappa;
  if (!entries.count("mode")) {
    fail(0, "missing key 'mode'");
  } else {
    try {
      mode = mode_from_string(entries.at("mode").value);
    } catch (const std::invalid_argument& e) {
      fail(entries.at("mode").line, e.what());
    }
  }
  cfg.polys.q_mode = mode;

  std::vector<std::string> required = {"R", "p1", "p2", "p3"};
  required.push_back(mode == Mode::kappa ? "q" : "q_slope");
  for (const auto& key : required) {
    if (!entries.count(key)) fail(0, "missing key '" + key + "'");
  }
  const std::string other_q = mode == Mode::kappa ? "q_slope" : "q";
  if (entries.count(other_q)) {
    fail(entries.at(other_q).line, "key '" + other_q + "' does not apply in mode " + to_string(mode));
  }

  auto scalar = [&](const std::string& key, double& dst) {
    if (!entries.count(key)) return;
    const auto v = numbers(key, 1);
    if (!v.empty()) dst = v[0];
  };
  scalar("R", cfg.R);
  scalar("theta1", cfg.theta1);
  scalar("theta2", cfg.theta2);
  scalar("theta3", cfg.theta3);
  scalar("q_slope", cfg.polys.q_slope);
  auto vec = [&](const std::string& key, auto& dst) {
    if (!entries.count(key)) return;
    const auto v = numbers(key, dst.size());
    if (!v.empty()) std::copy(v.begin(), v.end(), dst.begin());
  };
  vec("p1", cfg.polys.p1);
  vec("p2", cfg.polys.p2);
  vec("p3", cfg.polys.p3);
  vec("q", cfg.polys.q_kappa);

  const std::array<std::pair<const char*, int*>, 6> grids{{{"nodes.c1", &cfg.grids.c1},
                                                          {"nodes.c12", &cfg.grids.c12},
                                                          {"nodes.c2", &cfg.grids.c2},
                                                          {"nodes.c3", &cfg.grids.c3},
                                                          {"nodes.c23", &cfg.grids.c23},
                                                          {"nodes.c31", &cfg.grids.c31}}};
  for (const auto& [key, dst] : grids) {
    if (!entries.count(key)) continue;
    const auto& e = entries.at(key);
    const auto v = detail::parse_int(e.value);
    if (!v || *v < 2) {
      fail(e.line, std::string(key) + ": expected an integer >= 2");
      continue;
    }
    *dst = *v;
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));

  loaded.normalization_adjustment = normalize(cfg);
  validate(cfg, Strictness::structural);
  return loaded;
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open file"});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Serialise cfg so that parse_config reproduces it bit-for-bit.
inline std::string write_config(const MollifierConfig& cfg) {
  std::ostringstream os;
  auto list = [&](const auto& values) {
    std::string s;
    for (double v : values) s += (s.empty() ? "" : " ") + format_number(v);
    return s;
  };
  os << "mode = " << to_string(cfg.mode()) << "\n";
  os << "R = " << format_number(cfg.R) << "\n";
  os << "theta1 = " << format_number(cfg.theta1) << "\n";
  os << "theta2 = " << format_number(cfg.theta2) << "\n";
  os << "theta3 = " << format_number(cfg.theta3) << "\n";
  os << "p1 = " << list(cfg.polys.p1) << "\n";
  os << "p2 = " << list(cfg.polys.p2) << "\n";
  os << "p3 = " << list(cfg.polys.p3) << "\n";
  if (cfg.mode() == Mode::kappa) {
    os << "q = " << list(cfg.polys.q_kappa) << "\n";
  } else {
    os << "q_slope = " << format_number(cfg.polys.q_slope) << "\n";
  }
  os << "nodes.c1 = " << cfg.grids.c1 << "\n";
  os << "nodes.c12 = " << cfg.grids.c12 << "\n";
  os << "nodes.c2 = " << cfg.grids.c2 << "\n";
  os << "nodes.c3 = " << cfg.grids.c3 << "\n";
  os << "nodes.c23 = " << cfg.grids.c23 << "\n";
  os << "nodes.c31 = " << cfg.grids.c31 << "\n";
  return os.str();
}

}  // namespace critline
