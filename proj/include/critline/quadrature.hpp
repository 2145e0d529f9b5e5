#pragma once

// Tensor-product Gauss-Legendre integration over [0,1]^d and over the
// region {0 <= u <= 1, t1, t2 >= 0, t1 + t2 <= u}.
//
// Summation order is fixed: the grid is split into one chunk per node of the
// first coordinate, each chunk is summed sequentially in lexicographic order,
// and chunk partials are combined by a pairwise tree. The partition does not
// depend on the worker count, so results are bit-identical for any number of
// workers.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace critline {

struct GaussLegendreRule {
  std::vector<double> nodes;    // ascending, in (0, 1)
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1].
inline GaussLegendreRule gauss_legendre_unit(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_unit: need at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n from the Tricomi-style initial guess.
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0.0L;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1.0L;
      long double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    // Recompute derivative at the converged root for the weight.
    long double p0 = 1.0L;
    long double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0L);
    const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    // x is the i-th largest root on [-1, 1].
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = static_cast<double>((1.0L + x) / 2.0L);
    rule.nodes[static_cast<std::size_t>(i)] = static_cast<double>((1.0L - x) / 2.0L);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = static_cast<double>(w / 2.0L);
    rule.weights[static_cast<std::size_t>(i)] = static_cast<double>(w / 2.0L);
  }
  return rule;
}

struct GridSpec {
  int dims = 1;
  int nodes_per_dim = 24;
  /// Resolution of the comparison grid for refinement_delta; 0 selects ceil(n/2).
  int coarse_nodes_per_dim = 0;
  bool estimate_error = true;

  int coarse_nodes() const {
    return coarse_nodes_per_dim > 0 ? coarse_nodes_per_dim : std::max(2, (nodes_per_dim + 1) / 2);
  }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (int d = 0; d < dims; ++d) n *= static_cast<std::size_t>(nodes_per_dim);
    return n;
  }

  void validate() const {
    if (dims < 1 || dims > 5) throw std::invalid_argument("GridSpec: dims must be in [1, 5]");
    if (nodes_per_dim < 2) throw std::invalid_argument("GridSpec: nodes_per_dim must be >= 2");
    if (coarse_nodes_per_dim < 0 || coarse_nodes_per_dim == 1) {
      throw std::invalid_argument("GridSpec: coarse_nodes_per_dim must be 0 or >= 2");
    }
  }
};

/// Fixed-length real vector usable as a vector-valued integrand.
template <std::size_t N>
struct FixedVector {
  std::array<double, N> v{};

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  FixedVector& operator+=(const FixedVector& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
    return *this;
  }
  FixedVector& operator*=(double s) {
    for (double& x : v) x *= s;
    return *this;
  }
  bool all_finite() const {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  }
  double max_abs_diff(const FixedVector& o) const {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::abs(v[i] - o.v[i]));
    return m;
  }
};

struct Exec {
  unsigned workers = 1;
};

template <class T>
struct QuadResult {
  T value{};
  T coarse_value{};
  double refinement_delta = 0.0;  // distance between value and coarse_value
  std::size_t evaluations = 0;    // integrand calls on the main grid
};

class NonFiniteIntegrand : public std::runtime_error {
 public:
  explicit NonFiniteIntegrand(std::vector<double> point)
      : std::runtime_error(describe(point)), point_(std::move(point)) {}

  const std::vector<double>& point() const { return point_; }

 private:
  static std::string describe(const std::vector<double>& p) {
    std::ostringstream os;
    os.precision(17);
    os << "non-finite integrand value at (";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
    return os.str();
  }

  std::vector<double> point_;
};

namespace detail {

template <class T>
bool quad_finite(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::isfinite(v);
  } else {
    return v.all_finite();
  }
}

template <class T>
double quad_distance(const T& a, const T& b) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(a - b);
  } else {
    return a.max_abs_diff(b);
  }
}

template <class T>
T tree_sum(std::span<const T> parts) {
  if (parts.empty()) return T{};
  if (parts.size() == 1) return parts[0];
  const std::size_t mid = parts.size() / 2;
  T left = tree_sum(parts.first(mid));
  left += tree_sum(parts.subspan(mid));
  return left;
}

/// Weighted tensor-grid sum of f over [0,1]^dims. `count` receives the number
/// of integrand calls.
template <class T, class F>
T tensor_sum(F& f, int dims, const GaussLegendreRule& rule, Exec exec, std::size_t& count) {
  const std::size_t n = rule.nodes.size();
  std::size_t inner = 1;
  for (int d = 1; d < dims; ++d) inner *= n;

  std::vector<T> partials(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto run_chunk = [&](std::size_t i0) {
    std::vector<double> point(static_cast<std::size_t>(dims));
    T acc{};
    point[0] = rule.nodes[i0];
    for (std::size_t m = 0; m < inner; ++m) {
      std::size_t rem = m;
      double w = rule.weights[i0];
      for (int d = dims - 1; d >= 1; --d) {
        const std::size_t k = rem % n;
        rem /= n;
        point[static_cast<std::size_t>(d)] = rule.nodes[k];
        w *= rule.weights[k];
      }
      T v = f(std::span<const double>(point));
      if (!quad_finite(v)) throw NonFiniteIntegrand(point);
      v *= w;
      acc += v;
    }
    partials[i0] = std::move(acc);
  };

  auto worker = [&] {
    for (std::size_t i0 = next.fetch_add(1); i0 < n; i0 = next.fetch_add(1)) {
      try {
        run_chunk(i0);
      } catch (...) {
        errors[i0] = std::current_exception();
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(exec.workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  count = n * inner;
  return tree_sum(std::span<const T>(partials));
}

template <class T, class F>
QuadResult<T> integrate_with_refinement(F& f, const GridSpec& spec, Exec exec) {
  spec.validate();
  QuadResult<T> out;
  out.value = tensor_sum<T>(f, spec.dims, gauss_legendre_unit(spec.nodes_per_dim), exec, out.evaluations);
  if (spec.estimate_error) {
    std::size_t ignored = 0;
    out.coarse_value = tensor_sum<T>(f, spec.dims, gauss_legendre_unit(spec.coarse_nodes()), exec, ignored);
    out.refinement_delta = quad_distance(out.value, out.coarse_value);
  } else {
    out.coarse_value = out.value;
  }
  return out;
}

}  // namespace detail

/// Integrate f(point) over [0,1]^spec.dims. f takes std::span<const double>
/// and returns a value type supporting +=, *= double and value-initialisation
/// to zero (double, Jet, fixed-size vectors).
template <class F>
auto integrate_cube(F&& f, const GridSpec& spec, Exec exec = {}) {
  using T = std::remove_cvref_t<std::invoke_result_t<F&, std::span<const double>>>;
  return detail::integrate_with_refinement<T>(f, spec, exec);
}

/// Integrate f(t1, t2, u) (passed as a 3-span) over t1, t2 >= 0, t1 + t2 <= u,
/// 0 <= u <= 1 via t1 = u v1, t2 = u v2 (1 - v1), Jacobian u^2 (1 - v1).
template <class F>
auto integrate_c12_region(F&& f, const GridSpec& spec, Exec exec = {}) {
  if (spec.dims != 3) throw std::invalid_argument("integrate_c12_region: grid must be 3-dimensional");
  using T = std::remove_cvref_t<std::invoke_result_t<F&, std::span<const double>>>;
  auto mapped = [&f](std::span<const double> v) -> T {
    const double u = v[2];
    const std::array<double, 3> p{u * v[0], u * v[1] * (1.0 - v[0]), u};
    T val = f(std::span<const double>(p));
    if (!detail::quad_finite(val)) throw NonFiniteIntegrand({p[0], p[1], p[2]});
    val *= u * u * (1.0 - v[0]);
    return val;
  };
  return detail::integrate_with_refinement<T>(mapped, spec, exec);
}

}  // namespace critline
