#pragma once

// Dense real polynomials of bounded degree.
//
// Storage is a fixed array so polynomials can be passed by value into
// per-node integrand code without allocating.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace critline {

class Polynomial {
 public:
  static constexpr int kMaxDegree = 10;
  using Coefficients = std::array<double, kMaxDegree + 1>;

  constexpr Polynomial() = default;

  /// Coefficients in increasing monomial order: c0 + c1 x + c2 x^2 + ...
  Polynomial(std::initializer_list<double> coeffs)
      : Polynomial(std::span<const double>(coeffs.begin(), coeffs.size())) {}

  explicit Polynomial(std::span<const double> coeffs) {
    if (coeffs.size() > c_.size()) {
      throw std::length_error("Polynomial: degree " + std::to_string(coeffs.size() - 1) +
                              " exceeds maximum " + std::to_string(kMaxDegree));
    }
    std::copy(coeffs.begin(), coeffs.end(), c_.begin());
  }

  static Polynomial monomial(int k, double scale = 1.0) {
    check_degree(k);
    Polynomial p;
    p.c_[k] = scale;
    return p;
  }

  /// (c0 + c1 x)^n expanded binomially.
  static Polynomial affine_power(double c0, double c1, int n) {
    check_degree(n);
    Polynomial p;
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      p.c_[k] = binom * std::pow(c0, n - k) * std::pow(c1, k);
      binom = binom * (n - k) / (k + 1);
    }
    return p;
  }

  double coeff(int k) const { return (k < 0 || k > kMaxDegree) ? 0.0 : c_[k]; }
  const Coefficients& coeffs() const { return c_; }

  /// Highest index with a nonzero coefficient; 0 for the zero polynomial.
  int degree() const {
    for (int k = kMaxDegree; k > 0; --k) {
      if (c_[k] != 0.0) return k;
    }
    return 0;
  }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
  }

  double operator()(double x) const {
    double r = 0.0;
    for (int k = degree(); k >= 0; --k) r = r * x + c_[k];
    return r;
  }

  Polynomial derivative(int times = 1) const {
    Polynomial d = *this;
    for (int t = 0; t < times; ++t) {
      for (int k = 0; k < kMaxDegree; ++k) d.c_[k] = (k + 1) * d.c_[k + 1];
      d.c_[kMaxDegree] = 0.0;
    }
    return d;
  }

  /// Coefficients r_k of p(x0 + s) = sum_k r_k s^k, i.e. r_k = p^(k)(x0) / k!.
  Coefficients taylor_at(double x0) const {
    Coefficients r = c_;
    const int n = degree();
    // Repeated synthetic division by (x - x0).
    for (int j = 0; j < n; ++j) {
      for (int k = n - 1; k >= j; --k) r[k] += x0 * r[k + 1];
    }
    return r;
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Polynomial& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    const int da = a.degree();
    const int db = b.degree();
    if (!a.is_zero() && !b.is_zero()) check_degree(da + db);
    Polynomial r;
    for (int i = 0; i <= da; ++i) {
      for (int j = 0; j <= db && i + j <= kMaxDegree; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return r;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  static void check_degree(int k) {
    if (k < 0 || k > kMaxDegree) {
      throw std::length_error("Polynomial: degree " + std::to_string(k) + " out of range [0, " +
                              std::to_string(kMaxDegree) + "]");
    }
  }

  Coefficients c_{};
};

}  // namespace critline
