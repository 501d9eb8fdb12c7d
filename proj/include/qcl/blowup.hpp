#pragma once

/// @file blowup.hpp
/// @brief Rescaling of concentrating conformal factors at a pole.
///
/// With μ = (max u)^{−2/(n−4)} and the pole as origin, the exponential chart
/// ψ̄(σ, ω) = exp_{pole}(μσω) pulls g_u back to v^{4/(n−4)} h, where
///   v(σ) = μ^{(n−4)/2} u(θ = μσ),   h = dσ² + a(σ) σ² dω²,   a = (sin μσ / μσ)².
/// Everything is in closed form on the round sphere. Radii passed to this
/// header are in rescaled units; μ·R ≤ π keeps the ball inside the chart.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcl/conformal.hpp"
#include "qcl/quadrature.hpp"

namespace qcl {

struct RescaledProfile {
  int n;
  double mu;
  /// +1 when the maximum sits at θ = 0, −1 at θ = π.
  int pole;
  double max_u;
  double radius;
  /// Samples of v and a on a uniform grid of [0, radius].
  std::vector<double> sigma, v, metric_coeff;
  /// log v(σ) for σ ∈ [0, π/μ].
  std::function<double(double)> log_v;

  double v_at(double s) const { return std::exp(log_v(s)); }
  /// cos θ of the sphere point at rescaled radius s.
  double x_at(double s) const { return pole * std::cos(mu * s); }
  static double metric_coeff_at(double mu, double s) {
    const double z = mu * s;
    if (std::abs(z) < 1e-4) return 1.0 - z * z / 3.0 + 2.0 * z * z * z * z / 45.0;
    const double r = std::sin(z) / z;
    return r * r;
  }
  /// dV_h / (dσ dω) = (sin μσ / μ)^{n−1}.
  double volume_density(double s) const { return std::pow(std::sin(mu * s) / mu, n - 1); }
};

namespace detail {

/// Maximum of u and the pole where it is attained; throws if the maximum is interior.
inline std::pair<double, int> pole_maximum(const ConformalFactor& u) {
  const double north = u(1.0), south = u(-1.0);
  double interior = 0.0;
  for (double v : u.samples().values) interior = std::max(interior, v);
  const int m = 2048;
  for (int i = 1; i < m; ++i) interior = std::max(interior, u(std::cos(std::numbers::pi * i / m)));
  const double top = std::max(north, south);
  if (interior > top * (1.0 + 1e-12)) {
    throw std::domain_error("rescale: maximum of u is not attained at a pole");
  }
  return {top, north >= south ? +1 : -1};
}

}  // namespace detail

inline RescaledProfile rescale(const ConformalFactor& u, double R) {
  detail::require_fourth_order(u, "rescale");
  if (!(R > 0.0)) throw std::invalid_argument("rescale: radius must be positive");
  const int n = u.n();
  const auto [M, pole] = detail::pole_maximum(u);
  const double mu = std::pow(M, -2.0 / (n - 4));
  if (mu * R > std::numbers::pi * (1.0 + 1e-12)) {
    throw std::invalid_argument("rescale: mu * R exceeds pi (ball leaves the normal chart)");
  }
  RescaledProfile p;
  p.n = n;
  p.mu = mu;
  p.pole = pole;
  p.max_u = M;
  p.radius = R;
  const double log_scale = 0.5 * (n - 4) * std::log(mu);
  const double log_pole = std::log(u(static_cast<double>(pole)));
  // log u through the cylinder coordinate stays accurate as θ → 0.
  p.log_v = [u, mu, pole, log_scale, log_pole](double s) {
    const double th = mu * s;
    if (th <= 0.0) return log_scale + log_pole;
    if (th >= std::numbers::pi) return log_scale + std::log(u(-static_cast<double>(pole)));
    const double c = std::log(std::tan(0.5 * th));
    return log_scale + u.log_u_s(pole > 0 ? c : -c);
  };
  const int m = 256;
  for (int i = 0; i <= m; ++i) {
    const double s = R * i / m;
    p.sigma.push_back(s);
    p.v.push_back(p.v_at(s));
    p.metric_coeff.push_back(RescaledProfile::metric_coeff_at(mu, s));
  }
  return p;
}

/// ∫_{B(0,R)} F(σ) dV_h in the rescaled chart, F given as a function of σ.
inline double integrate_rescaled(const RescaledProfile& p, double R, const std::function<double(double)>& F,
                                 std::vector<double> breaks = {}) {
  const QuadratureRule q = composite_gauss(0.0, R, std::min(0.25, R / 4.0), 16, std::move(breaks));
  return sphere_volume(p.n - 1) * q.integrate([&](double s) { return F(s) * p.volume_density(s); });
}

struct TransferRecord {
  double lhs;
  double rhs;
  double residual;
};

/// Both sides of the change of variables between the rescaled ball B(0, R)
/// with density v^{2n/(n−4)} dV_h and the cap B(pole, μR) with dV_{g_u}.
inline TransferRecord transfer_check(const ConformalFactor& u, const Profile& f, double R) {
  const RescaledProfile p = rescale(u, R);
  const int n = p.n;
  const double e = 2.0 * n / (n - 4);
  const double lhs = integrate_rescaled(p, R, [&](double s) {
    return evaluate(f, p.x_at(s)) * std::exp(e * p.log_v(s));
  });
  // Cap in the cylinder coordinate: s ≤ log tan(μR/2) around θ = 0.
  auto log_density = [&](double s) { return n * u.log_W(s); };
  auto [lo, hi] = cylinder::find_window(log_density);
  const double th = p.mu * R;
  if (th < std::numbers::pi) {
    const double sc = std::log(std::tan(0.5 * th));
    if (p.pole > 0) hi = std::min(hi, sc);
    else lo = std::max(lo, -sc);
  }
  double rhs = 0.0;
  if (hi > lo) {
    const QuadratureRule q = composite_gauss(lo, hi, 0.25, 16);
    rhs = sphere_volume(n - 1) * q.integrate([&](double s) {
      return evaluate(f, cylinder::x_of_s(s)) * std::exp(log_density(s));
    });
  }
  return {lhs, rhs, std::abs(lhs - rhs)};
}

inline TransferRecord transfer_check(const ConformalFactor& u, const RadialField& f, double R) {
  return transfer_check(u, to_profile(analyze(f)), R);
}

struct VolumeCaptureTable {
  std::vector<double> R;
  std::vector<double> mu;
  /// entries[k][j]: member k, radius R[j].
  std::vector<std::vector<double>> entries;
  /// Radii with μR ≥ π are clamped to the whole sphere.
  std::vector<std::vector<bool>> clamped;
};

inline VolumeCaptureTable volume_capture(const std::vector<ConformalFactor>& family, const std::vector<double>& R_list) {
  VolumeCaptureTable t;
  t.R = R_list;
  for (const ConformalFactor& u : family) {
    const double M = detail::pole_maximum(u).first;
    const double mu = std::pow(M, -2.0 / (u.n() - 4));
    const double full = std::numbers::pi / mu;
    const RescaledProfile p = rescale(u, full);
    const double e = 2.0 * p.n / (p.n - 4);
    std::vector<double> row;
    std::vector<bool> cl;
    for (double R : R_list) {
      const double r = std::min(R, full);
      row.push_back(integrate_rescaled(p, r, [&](double s) { return std::exp(e * p.log_v(s)); }));
      cl.push_back(R >= full);
    }
    t.mu.push_back(mu);
    t.entries.push_back(std::move(row));
    t.clamped.push_back(std::move(cl));
  }
  return t;
}

/// Radial test function on R^n supported in σ ≤ support.
struct CompactRadialTest {
  double support;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

struct LimitRayleighResult {
  std::vector<double> mu;
  std::vector<double> quotients;
  /// Mean-zero corrections c_k = ∫φ dV / Vol.
  std::vector<double> corrections;
  /// |q_last − q_previous|.
  double last_increment;
};

/// Rayleigh quotients of φ_k = φ∘ψ̄_k^{−1} − c_k along the family, computed
/// in the rescaled chart with the gradient weight v^{2(n−2)/(n−4)} and the
/// volume weight v^{2n/(n−4)}.
inline LimitRayleighResult limit_rayleigh_check(const std::vector<ConformalFactor>& family, const CompactRadialTest& phi) {
  LimitRayleighResult out{};
  for (const ConformalFactor& u : family) {
    const RescaledProfile p = rescale(u, phi.support);
    const int n = p.n;
    const double ev = 2.0 * n / (n - 4), eg = 2.0 * (n - 2) / (n - 4);
    const double S = phi.support;
    const double grad = integrate_rescaled(p, S, [&](double s) {
      const double d = phi.derivative(s);
      return d * d * std::exp(eg * p.log_v(s));
    });
    const double m1 = integrate_rescaled(p, S, [&](double s) { return phi.value(s) * std::exp(ev * p.log_v(s)); });
    const double m2 = integrate_rescaled(p, S, [&](double s) {
      const double f = phi.value(s);
      return f * f * std::exp(ev * p.log_v(s));
    });
    const double vol = volume(u);
    const double c = m1 / vol;
    out.mu.push_back(p.mu);
    out.corrections.push_back(c);
    out.quotients.push_back(grad / (m2 - m1 * c));
  }
  const std::size_t k = out.quotients.size();
  out.last_increment = k >= 2 ? std::abs(out.quotients[k - 1] - out.quotients[k - 2]) : 0.0;
  return out;
}

}  // namespace qcl
