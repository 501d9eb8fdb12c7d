#pragma once

/// @file paneitz.hpp
/// @brief The Paneitz operator of the round sphere, P = Δ² + a_n Δ + b_n
/// = (Δ + c1)(Δ + c2), in spectral and pointwise (jet) form, together with
/// its Green's function and coercivity constant.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qcl/core_geometry.hpp"

namespace qcl {

struct PaneitzConstants {
  int n;
  double c1, c2;
  double a_n, b_n, c_n;

  /// Q-curvature of the round metric, n(n²−4)/8.
  double q_round() const { return n * (n * n - 4.0) / 8.0; }
  /// (λ_k + c1)(λ_k + c2), the eigenvalue of P on degree-k harmonics.
  double multiplier(int k) const {
    const double lam = static_cast<double>(k) * (k + n - 1);
    return (lam + c1) * (lam + c2);
  }
};

inline PaneitzConstants paneitz_constants(Dimension dim) {
  const int n = dim.value();
  PaneitzConstants p{};
  p.n = n;
  p.c1 = n * (n - 2) / 4.0;
  p.c2 = (n + 2) * (n - 4) / 4.0;
  p.a_n = p.c1 + p.c2;
  p.b_n = p.c1 * p.c2;
  p.c_n = (n + p.c1) * (n + p.c2);
  return p;
}

/// Multiply each coefficient by a function of its degree.
template <typename F>
ZonalCoeffs apply_multiplier(const ZonalCoeffs& f, F&& m) {
  ZonalCoeffs out = f;
  for (std::size_t k = 0; k < out.coeffs.size(); ++k) out.coeffs[k] *= m(static_cast<int>(k));
  return out;
}

/// Positive Laplace–Beltrami operator.
inline ZonalCoeffs laplacian(const ZonalCoeffs& f) {
  return apply_multiplier(f, [&](int k) { return f.grid->laplace_eigenvalue(k); });
}

/// Δ + c.
inline ZonalCoeffs shifted_laplacian(const ZonalCoeffs& f, double c) {
  return apply_multiplier(f, [&](int k) { return f.grid->laplace_eigenvalue(k) + c; });
}

inline ZonalCoeffs paneitz_apply(const ZonalCoeffs& f, const PaneitzConstants& pc) {
  return apply_multiplier(f, [&](int k) { return pc.multiplier(k); });
}

inline ZonalCoeffs paneitz_apply(const ZonalCoeffs& f) {
  return paneitz_apply(f, paneitz_constants(Dimension(f.grid->dimension())));
}

namespace detail {

/// Radial Laplacian −[(1 − x²) f'' − n x f'] as a jet of order N−2 about x0.
template <int N>
Jet<N - 2> radial_laplacian(const Jet<N>& f, double x0, int n) {
  const Jet<N - 1> d1 = f.differentiated();
  const Jet<N - 2> d2 = d1.differentiated();
  const Jet<N - 2> x = Jet<N - 2>::variable(x0);
  return -((1.0 - x * x) * d2 - (static_cast<double>(n) * x) * d1.template truncated<N - 2>());
}

}  // namespace detail

/// A computed value together with the sum of absolute values of the terms
/// that produced it; eps · scale bounds the rounding error.
struct PointValue {
  jet_real value;
  jet_real scale;
  double condition() const {
    return value != 0.0 ? static_cast<double>(scale / std::abs(value)) : std::numeric_limits<double>::infinity();
  }
};

namespace detail {

template <int N>
Jet<N> abs_jet(const Jet<N>& j) {
  Jet<N> r;
  for (int k = 0; k <= N; ++k) r.c[k] = std::abs(j.c[k]);
  return r;
}

/// Same as radial_laplacian with every term taken in absolute value.
template <int N>
Jet<N - 2> radial_laplacian_abs(const Jet<N>& f, double x0, int n) {
  const Jet<N - 1> d1 = f.differentiated();
  const Jet<N - 2> d2 = d1.differentiated();
  Jet<N - 2> w(std::abs(1.0 - x0 * x0));
  Jet<N - 2> xa(std::abs(x0));
  if constexpr (N - 2 >= 1) {
    w.c[1] = 2.0 * std::abs(x0);
    xa.c[1] = 1.0;
  }
  if constexpr (N - 2 >= 2) w.c[2] = 1.0;
  return w * d2 + (static_cast<double>(n) * xa) * d1.template truncated<N - 2>();
}

}  // namespace detail

/// P f (x0) evaluated from derivatives of the profile in x = cos θ, with no
/// truncation in degree.
inline PointValue paneitz_pointwise_detail(const Profile& f, double x0, const PaneitzConstants& pc) {
  const Jet4 j = f(Jet4::variable(x0));
  const Jet<2> lap = detail::radial_laplacian<4>(j, x0, pc.n);
  const Jet<0> bilap = detail::radial_laplacian<2>(lap, x0, pc.n);
  const Jet4 ja = detail::abs_jet(j);
  const Jet<2> lap_a = detail::radial_laplacian_abs<4>(ja, x0, pc.n);
  const Jet<0> bilap_a = detail::radial_laplacian_abs<2>(lap_a, x0, pc.n);
  return {bilap.c[0] + pc.a_n * lap.c[0] + pc.b_n * j.c[0],
          bilap_a.c[0] + std::abs(pc.a_n) * lap_a.c[0] + std::abs(pc.b_n) * ja.c[0]};
}

inline double paneitz_pointwise(const Profile& f, double x0, const PaneitzConstants& pc) {
  return static_cast<double>(paneitz_pointwise_detail(f, x0, pc).value);
}

/// Δf (x0) pointwise.
inline double laplacian_pointwise(const Profile& f, double x0, int n) {
  const Jet4 j = f(Jet4::variable(x0));
  return static_cast<double>(detail::radial_laplacian<4>(j, x0, n).c[0]);
}

/// Paneitz operator of the cylinder R × S^{n−1} on functions of s alone:
///   P_cyl v = v'''' − ((n² − 4n + 8)/2) v'' + (n²(n−4)²/16) v.
/// Since ḡ = sech²(s) (ds² + dω²), covariance gives
///   P u = sech^{−(n+4)/2}(s) · P_cyl(sech^{(n−4)/2}(s) u),
/// and Möbius dilations become translations in s, so bubbles keep
/// derivatives comparable to their values near the concentration point.
inline PointValue paneitz_cylinder_detail(const Jet4& v, int n) {
  const double nn = static_cast<double>(n);
  const double c2 = nn * nn - 4.0 * nn + 8.0;
  const double c0 = nn * nn * (nn - 4.0) * (nn - 4.0) / 16.0;
  return {24.0 * v.c[4] - c2 * v.c[2] + c0 * v.c[0],
          24.0 * std::abs(v.c[4]) + c2 * std::abs(v.c[2]) + c0 * std::abs(v.c[0])};
}

inline double paneitz_cylinder(const Jet4& v, int n) { return static_cast<double>(paneitz_cylinder_detail(v, n).value); }

/// Smallest eigenvalue of P on the round sphere, scanned over degrees 0..K.
/// Equals the sharp constant C in ∫ u P u ≥ C ∫ u².
inline double coercivity_constant(Dimension n, int K = 64) {
  const PaneitzConstants pc = paneitz_constants(n);
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= K; ++k) m = std::min(m, pc.multiplier(k));
  return m;
}

struct GreenValue {
  double value;      ///< full zonal series, resummed
  double truncated;  ///< partial sum over degrees ≤ K
  double tail;       ///< value − truncated
};

/// Green's function of P as a function of the angle θ between the two points.
///
/// The zonal series Σ_k Z_k(cos θ)/m_k converges only like K^{(n−7)/2}, so the
/// value is obtained from the resummed form
///   G(θ) = 1/(6σ_n) ∫₀¹ ρ^{(n−6)/2} (1−ρ)³ (1−ρ²) (1 − 2ρ cos θ + ρ²)^{−(n+1)/2} dρ,
/// which follows from the generating function of the Gegenbauer polynomials
/// and the partial fraction 1/m_k = ∫₀¹ ρ^{k+(n−6)/2} (1−ρ)³ dρ / 6.
/// The partial sum up to degree K and the remaining tail are also returned.
inline GreenValue green_paneitz(Dimension dim, double theta, int K) {
  if (!(theta > 0.0) || theta > std::numbers::pi + 1e-15) {
    throw std::domain_error("green_paneitz: diagonal evaluation unsupported (theta must lie in (0, pi])");
  }
  if (K < 0) throw std::invalid_argument("green_paneitz: K must be nonnegative");
  const int n = dim.value();
  const double x = std::cos(theta);
  const double sigma_n = sphere_volume(n);
  const double e = 0.5 * (n - 6);
  const double p = 0.5 * (n + 1);
  const double half_angle = std::sin(0.5 * theta);
  auto integrand = [&](double r) {
    const double omr = 1.0 - r;
    // 1 − 2ρx + ρ² written as (1−ρ)² + 4ρ sin²(θ/2) to keep precision near ρ = 1.
    const double d = omr * omr + 4.0 * r * half_angle * half_angle;
    return std::pow(r, e) * omr * omr * omr * (omr * (1.0 + r)) / std::pow(d, p);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  const double split = std::max(0.5, 1.0 - 4.0 * theta);
  const double v = (ts.integrate(integrand, 0.0, split) + ts.integrate(integrand, split, 1.0)) / (6.0 * sigma_n);

  const ZonalRecurrence rec(n, std::max(K, 1));
  const PaneitzConstants pc = paneitz_constants(dim);
  std::vector<double> p1, px;
  rec.evaluate_all(1.0, p1, K);
  rec.evaluate_all(x, px, K);
  const double s_nm1 = sphere_volume(n - 1);
  double trunc = 0.0;
  for (int k = 0; k <= K; ++k) trunc += p1[k] * px[k] / (s_nm1 * pc.multiplier(k));
  return {v, trunc, v - trunc};
}

}  // namespace qcl
