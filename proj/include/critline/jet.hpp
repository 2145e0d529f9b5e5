#pragma once

// Truncated multivariate Taylor expansions ("jets") at x = 0.
//
// A Jet<O_1, ..., O_n> holds the coefficient of x_1^a_1 ... x_n^a_n for every
// multi-index with a_v <= O_v. Products discard multi-indices that leave the
// box, so arithmetic is exact for the retained coefficients. Storage is dense
// and row-major (last variable fastest); all index tables are built at
// compile time.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "critline/polynomial.hpp"

namespace critline {

inline constexpr int kMaxJetVars = 6;
inline constexpr int kMaxJetOrder = 8;

/// Runtime description of a jet's truncation box.
struct JetShape {
  int var_count = 0;
  std::array<int, kMaxJetVars> max_order{};

  constexpr std::size_t size() const {
    std::size_t n = 1;
    for (int v = 0; v < var_count; ++v) n *= static_cast<std::size_t>(max_order[v] + 1);
    return n;
  }
  friend constexpr bool operator==(const JetShape&, const JetShape&) = default;
};

namespace detail {

template <int... Orders>
struct JetLayout {
  static constexpr int vars = sizeof...(Orders);
  static constexpr std::array<int, vars> orders{Orders...};
  static constexpr std::size_t size = (std::size_t{1} * ... * static_cast<std::size_t>(Orders + 1));
  static constexpr int total_order = (0 + ... + Orders);
  static constexpr std::size_t pair_count =
      (std::size_t{1} * ... * static_cast<std::size_t>((Orders + 1) * (Orders + 2) / 2));

  using Index = std::array<std::uint8_t, vars>;
  struct Pair {
    std::uint16_t j;
    std::uint16_t k;
  };

  static constexpr std::array<std::size_t, vars> strides = [] {
    std::array<std::size_t, vars> s{};
    std::size_t acc = 1;
    for (int v = vars - 1; v >= 0; --v) {
      s[v] = acc;
      acc *= static_cast<std::size_t>(orders[v] + 1);
    }
    return s;
  }();

  static constexpr std::array<Index, size> index = [] {
    std::array<Index, size> out{};
    for (std::size_t f = 0; f < size; ++f) {
      std::size_t rem = f;
      for (int v = 0; v < vars; ++v) {
        out[f][v] = static_cast<std::uint8_t>(rem / strides[v]);
        rem %= strides[v];
      }
    }
    return out;
  }();

  static constexpr double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  }

  static constexpr std::array<int, size> degree = [] {
    std::array<int, size> out{};
    for (std::size_t f = 0; f < size; ++f) {
      int d = 0;
      for (int v = 0; v < vars; ++v) d += index[f][v];
      out[f] = d;
    }
    return out;
  }();

  // prod_v a_v!
  static constexpr std::array<double, size> factorial_product = [] {
    std::array<double, size> out{};
    for (std::size_t f = 0; f < size; ++f) {
      double p = 1.0;
      for (int v = 0; v < vars; ++v) p *= factorial(index[f][v]);
      out[f] = p;
    }
    return out;
  }();

  // |a|! / prod_v a_v!
  static constexpr std::array<double, size> multinomial = [] {
    std::array<double, size> out{};
    for (std::size_t f = 0; f < size; ++f) out[f] = factorial(degree[f]) / factorial_product[f];
    return out;
  }();

  // Product table grouped by left operand: for each i, the (j, k) with
  // index[i] + index[j] = index[k] inside the box. The valid j form the
  // sub-box index[j] <= orders - index[i], and k = i + j since the flat
  // index is linear in the multi-index.
  static constexpr std::array<std::uint32_t, size + 1> pair_offsets = [] {
    std::array<std::uint32_t, size + 1> out{};
    std::uint32_t count = 0;
    for (std::size_t i = 0; i < size; ++i) {
      out[i] = count;
      std::uint32_t n = 1;
      for (int v = 0; v < vars; ++v) n *= static_cast<std::uint32_t>(orders[v] - index[i][v] + 1);
      count += n;
    }
    out[size] = count;
    return out;
  }();

  static constexpr std::array<Pair, pair_count> pairs = [] {
    std::array<Pair, pair_count> out{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < size; ++i) {
      std::array<int, vars> j{};
      while (true) {
        std::size_t flat = 0;
        for (int v = 0; v < vars; ++v) flat += static_cast<std::size_t>(j[v]) * strides[v];
        out[n++] = Pair{static_cast<std::uint16_t>(flat), static_cast<std::uint16_t>(i + flat)};
        int v = vars - 1;
        while (v >= 0 && j[v] == orders[v] - index[i][v]) j[v--] = 0;
        if (v < 0) break;
        ++j[v];
      }
    }
    return out;
  }();

  static_assert(size <= 0xFFFF, "jet too large for 16-bit product tables");
};

}  // namespace detail

/// c0 + sum_v slope_v x_v. Linear combinations stay in this form; a Jet is
/// only materialised by exp, polynomial composition or a product with a Jet.
template <int N>
struct AffineForm {
  double c0 = 0.0;
  std::array<double, N> slope{};

  static AffineForm constant(double c) { return AffineForm{c, {}}; }
  static AffineForm variable(int v, double base = 0.0) {
    if (v < 0 || v >= N) {
      throw std::out_of_range("AffineForm::variable: index " + std::to_string(v) + " outside [0, " +
                              std::to_string(N) + ")");
    }
    AffineForm a{base, {}};
    a.slope[static_cast<std::size_t>(v)] = 1.0;
    return a;
  }

  AffineForm& operator+=(const AffineForm& o) {
    c0 += o.c0;
    for (int v = 0; v < N; ++v) slope[v] += o.slope[v];
    return *this;
  }
  AffineForm& operator-=(const AffineForm& o) {
    c0 -= o.c0;
    for (int v = 0; v < N; ++v) slope[v] -= o.slope[v];
    return *this;
  }
  AffineForm& operator*=(double s) {
    c0 *= s;
    for (double& x : slope) x *= s;
    return *this;
  }

  friend AffineForm operator+(AffineForm a, const AffineForm& b) { return a += b; }
  friend AffineForm operator-(AffineForm a, const AffineForm& b) { return a -= b; }
  friend AffineForm operator+(AffineForm a, double s) { return a.c0 += s, a; }
  friend AffineForm operator+(double s, AffineForm a) { return a.c0 += s, a; }
  friend AffineForm operator-(AffineForm a, double s) { return a.c0 -= s, a; }
  friend AffineForm operator-(double s, AffineForm a) { return (a *= -1.0).c0 += s, a; }
  friend AffineForm operator-(AffineForm a) { return a *= -1.0; }
  friend AffineForm operator*(AffineForm a, double s) { return a *= s; }
  friend AffineForm operator*(double s, AffineForm a) { return a *= s; }
};

template <int... Orders>
class Jet {
  static_assert(sizeof...(Orders) >= 1 && sizeof...(Orders) <= kMaxJetVars,
                "Jet: variable count out of range");
  static_assert(((Orders >= 1 && Orders <= kMaxJetOrder) && ...), "Jet: per-variable order out of range");

  using Layout = detail::JetLayout<Orders...>;

 public:
  static constexpr int kVars = Layout::vars;
  static constexpr std::size_t kSize = Layout::size;
  static constexpr int kTotalOrder = Layout::total_order;
  static constexpr std::array<int, kVars> kOrders = Layout::orders;
  using MultiIndex = std::array<int, kVars>;

  using Affine = AffineForm<kVars>;

  constexpr Jet() = default;

  static Jet from_affine(const Affine& a) {
    Jet j;
    j.c_[0] = a.c0;
    for (int v = 0; v < kVars; ++v) j.c_[Layout::strides[v]] = a.slope[v];
    return j;
  }

  static constexpr JetShape shape() {
    JetShape s;
    s.var_count = kVars;
    for (int v = 0; v < kVars; ++v) s.max_order[v] = kOrders[v];
    return s;
  }

  static Jet constant(double c) {
    Jet j;
    j.c_[0] = c;
    return j;
  }

  /// base + x_v
  static Jet variable(int v, double base = 0.0) {
    if (v < 0 || v >= kVars) {
      throw std::out_of_range("Jet::variable: index " + std::to_string(v) + " outside [0, " +
                              std::to_string(kVars) + ")");
    }
    Jet j;
    j.c_[0] = base;
    j.c_[Layout::strides[v]] = 1.0;
    return j;
  }

  double value() const { return c_[0]; }

  double coeff(const MultiIndex& alpha) const { return c_[flat_index(alpha, "Jet::coeff")]; }
  double& operator[](std::size_t flat) { return c_[flat]; }
  double operator[](std::size_t flat) const { return c_[flat]; }
  std::span<const double, kSize> coeffs() const { return c_; }

  static MultiIndex multi_index(std::size_t flat) {
    MultiIndex m{};
    for (int v = 0; v < kVars; ++v) m[v] = Layout::index[flat][v];
    return m;
  }

  /// Coefficient of the linear monomial in x_v.
  double slope(int v) const { return c_[Layout::strides[v]]; }

  /// True when every coefficient of total degree >= 2 vanishes.
  bool is_affine() const {
    for (std::size_t f = 0; f < kSize; ++f) {
      if (Layout::degree[f] >= 2 && c_[f] != 0.0) return false;
    }
    return true;
  }

  bool all_finite() const {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return std::isfinite(v); });
  }

  double max_abs_diff(const Jet& o) const {
    double m = 0.0;
    for (std::size_t f = 0; f < kSize; ++f) m = std::max(m, std::abs(c_[f] - o.c_[f]));
    return m;
  }

  std::size_t nonzeros() const {
    return static_cast<std::size_t>(std::count_if(c_.begin(), c_.end(), [](double v) { return v != 0.0; }));
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t f = 0; f < kSize; ++f) c_[f] += o.c_[f];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t f = 0; f < kSize; ++f) c_[f] -= o.c_[f];
    return *this;
  }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  Jet& operator/=(double s) { return *this *= (1.0 / s); }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator-(Jet a) {
    for (double& v : a.c_) v = -v;
    return a;
  }

  /// Truncated product. Zero coefficients of the sparser operand are skipped,
  /// which makes products with affine factors cheap.
  friend Jet operator*(const Jet& a, const Jet& b) {
    const bool swap = a.nonzeros() > b.nonzeros();
    const Jet& l = swap ? b : a;
    const Jet& r = swap ? a : b;
    Jet out;
    for (std::size_t i = 0; i < kSize; ++i) {
      const double li = l.c_[i];
      if (li == 0.0) continue;
      for (std::uint32_t p = Layout::pair_offsets[i]; p < Layout::pair_offsets[i + 1]; ++p) {
        const auto& pr = Layout::pairs[p];
        out.c_[pr.k] += li * r.c_[pr.j];
      }
    }
    return out;
  }

  /// (c0 + sum_v s_v x_v) * a without forming the affine factor as a jet.
  friend Jet operator*(const Affine& l, const Jet& a) {
    Jet out;
    for (std::size_t f = 0; f < kSize; ++f) out.c_[f] = l.c0 * a.c_[f];
    for (int v = 0; v < kVars; ++v) {
      const double s = l.slope[v];
      if (s == 0.0) continue;
      // Entries with index_v = k >= 1 form contiguous runs of length stride_v.
      const std::size_t stride = Layout::strides[v];
      const std::size_t block = stride * static_cast<std::size_t>(kOrders[v] + 1);
      for (std::size_t base = 0; base < kSize; base += block) {
        for (std::size_t f = base + stride; f < base + block; ++f) out.c_[f] += s * a.c_[f - stride];
      }
    }
    return out;
  }
  friend Jet operator*(const Jet& a, const Affine& l) { return l * a; }

  /// exp of an affine form as a jet.
  static Jet exp(const Affine& a) {
    std::array<double, kTotalOrder + 1> t{};
    const double e0 = std::exp(a.c0);
    double inv_fact = 1.0;
    for (int k = 0; k <= kTotalOrder; ++k) {
      t[k] = e0 * inv_fact;
      inv_fact /= (k + 1);
    }
    return series(t, a);
  }

  /// exp(e) * x. exp(e) factors as e^{c0} prod_v exp(s_v x_v), so the product
  /// is a one-dimensional truncated convolution along each variable in turn.
  static Jet exp_times(const Affine& e, Jet x) {
    for (int v = 0; v < kVars; ++v) {
      const double s = e.slope[v];
      if (s == 0.0) continue;
      std::array<double, kMaxJetOrder + 1> r{};
      r[0] = 1.0;
      for (int k = 1; k <= kOrders[v]; ++k) r[k] = r[k - 1] * s / k;
      const std::size_t stride = Layout::strides[v];
      const std::size_t block = stride * static_cast<std::size_t>(kOrders[v] + 1);
      // Updating index_v = k from the top down reads only lower, untouched runs.
      for (std::size_t base = 0; base < kSize; base += block) {
        for (int k = kOrders[v]; k >= 1; --k) {
          double* run = x.c_.data() + base + static_cast<std::size_t>(k) * stride;
          for (int m = 1; m <= k; ++m) {
            const double* src = run - static_cast<std::size_t>(m) * stride;
            for (std::size_t q = 0; q < stride; ++q) run[q] += r[m] * src[q];
          }
        }
      }
    }
    return x *= std::exp(e.c0);
  }

  /// p(a) for an affine form a.
  static Jet compose(const Polynomial& p, const Affine& a) { return series(p.taylor_at(a.c0), a); }

  /// f(a) for affine a, given t[k] = f^(k)(a0)/k! for k = 0..kTotalOrder.
  /// Coefficient of x^alpha is t[|alpha|] * multinomial(alpha) * prod_v slope_v^alpha_v.
  static Jet series(std::span<const double> taylor, const Affine& a) {
    std::array<std::array<double, kMaxJetOrder + 1>, kVars> powers{};
    for (int v = 0; v < kVars; ++v) {
      powers[v][0] = 1.0;
      for (int e = 1; e <= kOrders[v]; ++e) powers[v][e] = powers[v][e - 1] * a.slope[v];
    }
    Jet out;
    for (std::size_t f = 0; f < kSize; ++f) {
      const auto d = static_cast<std::size_t>(Layout::degree[f]);
      if (d >= taylor.size()) continue;
      double term = taylor[d] * Layout::multinomial[f];
      for (int v = 0; v < kVars; ++v) term *= powers[v][Layout::index[f][v]];
      out.c_[f] = term;
    }
    return out;
  }

  Affine affine_part() const {
    Affine a{c_[0], {}};
    for (int v = 0; v < kVars; ++v) a.slope[v] = c_[Layout::strides[v]];
    return a;
  }

  /// Mixed partial derivative at 0: coefficient times prod_v alpha_v!.
  friend double extract(const Jet& a, const MultiIndex& alpha) {
    const std::size_t f = flat_index(alpha, "extract");
    return a.c_[f] * Layout::factorial_product[f];
  }

  /// extract(a * b, alpha) computing only the requested coefficient.
  friend double extract_product(const Jet& a, const Jet& b, const MultiIndex& alpha) {
    const std::size_t top = flat_index(alpha, "extract_product");
    double sum = 0.0;
    for (std::size_t f = 0; f < kSize; ++f) {
      std::size_t g = 0;
      bool inside = true;
      for (int v = 0; v < kVars; ++v) {
        const int rest = alpha[v] - Layout::index[f][v];
        inside = inside && rest >= 0;
        g += static_cast<std::size_t>(rest) * Layout::strides[v];
      }
      if (inside) sum += a.c_[f] * b.c_[g];
    }
    return sum * Layout::factorial_product[top];
  }

 private:
  static std::size_t flat_index(const MultiIndex& alpha, const char* who) {
    std::size_t f = 0;
    for (int v = 0; v < kVars; ++v) {
      if (alpha[v] < 0 || alpha[v] > kOrders[v]) {
        throw std::out_of_range(std::string(who) + ": order " + std::to_string(alpha[v]) + " of variable " +
                                std::to_string(v) + " exceeds jet order " + std::to_string(kOrders[v]));
      }
      f += static_cast<std::size_t>(alpha[v]) * Layout::strides[v];
    }
    return f;
  }

  std::array<double, kSize> c_{};
};

/// exp(a0) * sum_{k <= K} (a - a0)^k / k!, exact because (a - a0)^(K+1)
/// vanishes under truncation. Reference path for exp().
template <int... O>
Jet<O...> exp_series(const Jet<O...>& a) {
  using J = Jet<O...>;
  J nil = a;
  nil[0] = 0.0;
  J r = J::constant(1.0);
  for (int k = J::kTotalOrder; k >= 1; --k) {
    r = nil * r;
    r *= 1.0 / k;
    r[0] += 1.0;
  }
  return r * std::exp(a.value());
}

/// exp(a) = exp(affine part) * exp(rest). The rest has no terms of degree
/// below 2, so its powers vanish after at most K/2 factors (K = sum of orders).
template <int... O>
Jet<O...> exp(const Jet<O...>& a) {
  using J = Jet<O...>;
  const auto lin = a.affine_part();
  if (a.is_affine()) return J::exp(lin);
  const J rest = a - J::from_affine(lin);
  J sum = J::constant(1.0);
  J term = sum;
  for (int k = 1; k <= J::kTotalOrder; ++k) {
    term = rest * term;
    term *= 1.0 / k;
    if (term.nonzeros() == 0) break;
    sum += term;
  }
  return J::exp_times(lin, sum);
}

/// p(a) by Horner's rule over jet arithmetic (closed form when a is affine).
template <int... O>
Jet<O...> compose_poly(const Polynomial& p, const Jet<O...>& a) {
  using J = Jet<O...>;
  if (a.is_affine()) {
    return J::compose(p, a.affine_part());
  }
  J r = J::constant(p.coeff(p.degree()));
  for (int k = p.degree() - 1; k >= 0; --k) r = r * a + p.coeff(k);
  return r;
}

/// Horner evaluation without the affine shortcut; kept for cross-checking.
template <int... O>
Jet<O...> compose_poly_horner(const Polynomial& p, const Jet<O...>& a) {
  using J = Jet<O...>;
  J r = J::constant(p.coeff(p.degree()));
  for (int k = p.degree() - 1; k >= 0; --k) r = r * a + p.coeff(k);
  return r;
}

}  // namespace critline
