#pragma once

/// @file jet.hpp
/// @brief Truncated Taylor series ("jets") for forward-mode differentiation
/// of radial profiles up to fixed order.
///
/// A Jet<N> at a point x0 stores c[k] = f^{(k)}(x0) / k! for k = 0..N.
/// Arithmetic is the truncated Cauchy algebra, so composing jets of
/// elementary functions yields exact derivatives up to rounding.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace qcl {

/// Coefficients are carried in extended precision; values still enter and
/// leave as double. Fourth derivatives of concentrated factors cancel down
/// to roughly eps·t⁴ of their size, which double alone cannot absorb.
using jet_real = long double;

template <int N>
struct Jet {
  static_assert(N >= 0);
  std::array<jet_real, N + 1> c{};

  constexpr Jet() = default;
  constexpr explicit Jet(jet_real value) { c[0] = value; }

  /// The identity function x ↦ x seeded at x0.
  static constexpr Jet variable(jet_real x0) {
    Jet j(x0);
    if constexpr (N >= 1) j.c[1] = 1.0;
    return j;
  }
  static constexpr Jet constant(jet_real v) { return Jet(v); }

  constexpr double value() const { return static_cast<double>(c[0]); }

  /// k-th derivative at the expansion point.
  constexpr double derivative(int k) const {
    jet_real f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return static_cast<double>(c[static_cast<std::size_t>(k)] * f);
  }

  /// Jet of f' (one order lower).
  constexpr Jet<(N > 0 ? N - 1 : 0)> differentiated() const {
    Jet<(N > 0 ? N - 1 : 0)> d;
    if constexpr (N > 0) {
      for (int k = 0; k < N; ++k) d.c[k] = (k + 1) * c[k + 1];
    }
    return d;
  }

  /// Keep the leading M+1 coefficients.
  template <int M>
  constexpr Jet<M> truncated() const {
    static_assert(M <= N);
    Jet<M> t;
    for (int k = 0; k <= M; ++k) t.c[k] = c[k];
    return t;
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(jet_real s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  Jet& operator+=(jet_real s) {
    c[0] += s;
    return *this;
  }
};

template <int N>
Jet<N> operator-(Jet<N> a) {
  for (auto& v : a.c) v = -v;
  return a;
}
template <int N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N>
Jet<N> operator+(Jet<N> a, jet_real s) { return a += s; }
template <int N>
Jet<N> operator+(jet_real s, Jet<N> a) { return a += s; }
template <int N>
Jet<N> operator-(Jet<N> a, jet_real s) { return a += -s; }
template <int N>
Jet<N> operator-(jet_real s, const Jet<N>& a) { return (-a) + s; }
template <int N>
Jet<N> operator*(Jet<N> a, jet_real s) { return a *= s; }
template <int N>
Jet<N> operator*(jet_real s, Jet<N> a) { return a *= s; }
template <int N>
Jet<N> operator/(Jet<N> a, jet_real s) { return a *= (1.0L / s); }

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (int i = 0; i <= N; ++i) {
    jet_real s = 0.0;
    for (int j = 0; j <= i; ++j) s += a.c[j] * b.c[i - j];
    r.c[i] = s;
  }
  return r;
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  if (b.c[0] == 0.0) throw std::domain_error("Jet division by a jet with zero value");
  Jet<N> r;
  for (int i = 0; i <= N; ++i) {
    jet_real s = a.c[i];
    for (int j = 1; j <= i; ++j) s -= b.c[j] * r.c[i - j];
    r.c[i] = s / b.c[0];
  }
  return r;
}

template <int N>
Jet<N> operator/(jet_real s, const Jet<N>& b) { return Jet<N>(s) / b; }

/// f^a for real a, requires f(x0) > 0 unless a is a nonnegative integer.
template <int N>
Jet<N> pow(const Jet<N>& f, jet_real a) {
  Jet<N> g;
  const jet_real f0 = f.c[0];
  if (f0 == 0.0) {
    if (a == 0.0) return Jet<N>(1.0);
    throw std::domain_error("Jet pow at a zero of the base");
  }
  g.c[0] = std::pow(f0, a);
  // g' f = a f' g, coefficientwise.
  for (int k = 1; k <= N; ++k) {
    jet_real s = 0.0;
    for (int j = 1; j <= k; ++j) s += (a * j - (k - j)) * f.c[j] * g.c[k - j];
    g.c[k] = s / (k * f0);
  }
  return g;
}

template <int N>
Jet<N> exp(const Jet<N>& f) {
  Jet<N> g;
  g.c[0] = std::exp(f.c[0]);
  for (int k = 1; k <= N; ++k) {
    jet_real s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * f.c[j] * g.c[k - j];
    g.c[k] = s / k;
  }
  return g;
}

template <int N>
Jet<N> log(const Jet<N>& f) {
  if (f.c[0] <= 0.0) throw std::domain_error("Jet log of a nonpositive value");
  Jet<N> g;
  g.c[0] = std::log(f.c[0]);
  for (int k = 1; k <= N; ++k) {
    jet_real s = k * f.c[k];
    for (int j = 1; j < k; ++j) s -= j * g.c[j] * f.c[k - j];
    g.c[k] = s / (k * f.c[0]);
  }
  return g;
}

template <int N>
Jet<N> sqrt(const Jet<N>& f) { return pow(f, 0.5); }

/// Power with small nonnegative integer exponent (no positivity requirement).
template <int N>
Jet<N> ipow(const Jet<N>& f, int k) {
  Jet<N> r(1.0);
  for (int i = 0; i < k; ++i) r = r * f;
  return r;
}

/// tanh s, written through exp(−2|s|) so that it stays accurate for large |s|.
template <int N>
Jet<N> tanh(const Jet<N>& s) {
  const jet_real sg = s.c[0] >= 0.0 ? 1.0 : -1.0;
  const Jet<N> e = exp(s * (-2.0 * sg));
  return sg * ((1.0 - e) / (1.0 + e));
}

/// log sech s without overflow.
template <int N>
Jet<N> log_sech(const Jet<N>& s) {
  const jet_real sg = s.c[0] >= 0.0 ? 1.0 : -1.0;
  return (std::log(2.0L) - sg * s) - log(1.0 + exp(s * (-2.0 * sg)));
}

using Jet1 = Jet<1>;
using Jet4 = Jet<4>;

}  // namespace qcl
