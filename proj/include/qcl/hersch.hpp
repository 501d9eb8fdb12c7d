#pragma once

/// @file hersch.hpp
/// @brief Conformal centering of radial measures on S^n and the Hersch-type
/// upper bound λ₁ ≤ n for normalized Euclidean weights.
///
/// A radial measure ρ dV_ḡ is handled through its cylinder density
/// m(s) = ρ(x(s)) sech^n(s), so that dμ = σ_{n−1} m(s) ds. Pulling back by
/// δ_t (density φ_t^n · ρ∘δ_t) is then the shift m(s) ↦ m(s + log t).

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcl/conformal.hpp"
#include "qcl/moebius.hpp"
#include "qcl/quadrature.hpp"
#include "qcl/spectrum.hpp"

namespace qcl {

/// A nonnegative radial measure on S^n, given by log m(s).
struct RadialMeasure {
  int n;
  std::function<double(double)> log_density;

  static RadialMeasure volume_of(const ConformalFactor& u) {
    return {u.n(), [u](double s) { return u.n() * u.log_W(s); }};
  }
  /// ρ dV_ḡ for sampled ρ, through its zonal interpolant (clamped at 0).
  static RadialMeasure from_field(const RadialField& rho) {
    const Profile f = to_profile(analyze(rho));
    const int n = rho.grid->dimension();
    return {n, [f, n](double s) {
              const double v = evaluate(f, cylinder::x_of_s(s));
              return v > 0.0 ? std::log(v) + n * cylinder::log_sech(s) : -std::numeric_limits<double>::infinity();
            }};
  }
  /// The measure w^{2n/(n−2)} dy on R^n carried to S^n by inverse stereographic projection.
  static RadialMeasure from_euclidean(const EuclideanWeight& w) {
    return {w.n, [w](double s) { return w.n * w.log_W(s); }};
  }
  RadialMeasure reflected() const {
    return {n, [f = log_density](double s) { return f(-s); }};
  }
  /// Pullback under δ_t.
  RadialMeasure pulled_back(const MoebiusMap& m) const {
    return {n, [f = log_density, a = m.shift()](double s) { return f(s + a); }};
  }
};

struct CenterOfMass {
  /// Component along the polar axis, ∫ x dμ; the others vanish by symmetry.
  double axis;
  double mass;
  std::vector<double> components(int n) const {
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c.back() = axis;
    return c;
  }
};

/// ∫ x · weight dV_ḡ by grid quadrature.
inline CenterOfMass center_of_mass(const RadialField& weight) {
  double mass = 0.0, mx = 0.0;
  const auto& g = *weight.grid;
  for (int j = 0; j < g.size(); ++j) {
    if (weight.values[j] < 0.0) throw std::invalid_argument("center_of_mass: negative weight");
    mass += g.weights()[j] * weight.values[j];
    mx += g.weights()[j] * weight.values[j] * g.x()[j];
  }
  if (!(mass > 0.0)) throw std::invalid_argument("center_of_mass: zero measure");
  return {g.sigma_n_minus_1() * mx, g.sigma_n_minus_1() * mass};
}

namespace detail {

/// Samples of m on a cylinder rule covering its window.
struct SampledMeasure {
  std::vector<double> s, w;
};

inline SampledMeasure sample_measure(const RadialMeasure& mu) {
  const auto [lo, hi] = cylinder::find_window(mu.log_density);
  const QuadratureRule q = composite_gauss(lo, hi, 0.25, 16);
  SampledMeasure out;
  const double s_nm1 = sphere_volume(mu.n - 1);
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    out.s.push_back(q.nodes[j]);
    out.w.push_back(s_nm1 * q.weights[j] * std::exp(mu.log_density(q.nodes[j])));
  }
  return out;
}

/// Axis center of mass after shifting by τ, and its τ-derivative.
inline std::pair<double, double> shifted_com(const SampledMeasure& m, double tau) {
  double f = 0.0, df = 0.0;
  for (std::size_t j = 0; j < m.s.size(); ++j) {
    const double th = std::tanh(m.s[j] - tau);
    f -= m.w[j] * th;
    df += m.w[j] * (1.0 - th * th);
  }
  return {f, df};
}

}  // namespace detail

inline CenterOfMass center_of_mass(const RadialMeasure& mu) {
  const detail::SampledMeasure m = detail::sample_measure(mu);
  double mass = 0.0;
  for (double v : m.w) mass += v;
  if (!(mass > 0.0)) throw std::invalid_argument("center_of_mass: zero measure");
  return {detail::shifted_com(m, 0.0).first, mass};
}

class BalanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BalanceResult {
  MoebiusMap map{1.0};
  double t = 1.0;
  /// |CoM| of the pulled-back measure.
  double residual = 0.0;
  int iterations = 0;
};

/// t* with CoM(δ_{t*}^* μ) = 0, by Newton on log t safeguarded by
/// bisection on [−18, 18].
inline BalanceResult balance(const RadialMeasure& mu, double tol = 1e-10) {
  const detail::SampledMeasure m = detail::sample_measure(mu);
  // CoM of the pullback under δ_{e^τ} is increasing in τ.
  auto com = [&](double tau) { return detail::shifted_com(m, tau); };
  double lo = -18.0, hi = 18.0;
  if (!(com(lo).first < 0.0 && com(hi).first > 0.0)) {
    throw BalanceError("balance: no balancing dilation with |log t| <= 18 (measure too concentrated)");
  }
  BalanceResult r;
  double tau = 0.0;
  for (int it = 1; it <= 200; ++it) {
    const auto [f, df] = com(tau);
    r.iterations = it;
    if (std::abs(f) <= tol) {
      r.residual = std::abs(f);
      r.t = std::exp(tau);
      r.map = MoebiusMap(r.t);
      return r;
    }
    (f < 0.0 ? lo : hi) = tau;
    double next = df > 0.0 ? tau - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == tau) break;
    tau = next;
  }
  throw BalanceError("balance: tolerance not reached (|CoM| = " + std::to_string(std::abs(com(tau).first)) + ")");
}

inline BalanceResult balance(const RadialField& weight, double tol = 1e-10) {
  return balance(RadialMeasure::from_field(weight), tol);
}

struct HerschRecord {
  double t_star;
  double com_residual;
  /// Infimum of the Rayleigh quotient from the sector solver.
  double lambda1;
  /// Quotient of the proof's coordinate test functions f_{i,R}, summed over i.
  double hersch_quotient;
  /// log(R/r) of the cutoff and the Hölder bound on its contribution.
  double log_ratio;
  double cutoff_bound;
  bool bound_satisfied;
  bool quotient_satisfied;
};

inline constexpr double kHerschTolerance = 1e-3;

/// The metric g_u = W²(ds² + dω²) written on R^n as w^{4/(n−2)} |dy|².
inline EuclideanWeight euclidean_weight_of(const ConformalFactor& u) {
  const int n = u.n();
  return EuclideanWeight::from_log(Dimension(n), [u, n](double s) { return 0.5 * (n - 2) * (u.log_W(s) - s); });
}

/// Balances w^{2n/(n−2)} dy, evaluates the coordinate test functions of the
/// Hersch argument with a logarithmic cutoff, and compares both that quotient
/// and the solver's λ₁ with n.
inline HerschRecord hersch_bound_check(const EuclideanWeight& w, int l_max = 4) {
  const int n = w.n;
  const double sn = sphere_volume(n);
  const EuclideanVolume vol = euclidean_volume(w, std::exp(60.0));
  if (std::abs(vol.inside + vol.tail - sn) > 1e-8 * sn) {
    throw std::invalid_argument("hersch_bound_check: weight is not normalized to total mass sigma_n");
  }
  const BalanceResult bal = balance(RadialMeasure::from_euclidean(w));
  const double tau = bal.map.shift();

  // Cutoff: η = 1 up to the end of the mass window, then linear in s over
  // log(R/r) chosen so that the Hölder bound on its gradient term is < 1e-4.
  const auto [lo, hi] = cylinder::find_window([&](double s) { return (n - 2) * w.log_W(s); });
  const double target = 1e-4;
  const double pre = 4.0 * std::pow(sn, (n - 2.0) / n) * std::pow(sphere_volume(n - 1), 2.0 / n);
  const double L = std::pow(pre / target, n / (2.0 * (n - 1)));
  const double s_r = hi;
  auto eta = [&](double s) { return s <= s_r ? 1.0 : std::max(0.0, 1.0 - (s - s_r) / L); };
  auto deta = [&](double s) { return s <= s_r || s >= s_r + L ? 0.0 : -1.0 / L; };

  const QuadratureRule q = composite_gauss(lo, std::max(hi, s_r) + 8.0, 0.25, 16, {s_r});
  double m_eta = 0.0, m_etaX = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    const double s = q.nodes[j];
    const double b = q.weights[j] * std::exp(n * w.log_W(s));
    m_eta += b * eta(s);
    m_etaX += b * eta(s) * -std::tanh(s - tau);
  }
  const double c = m_etaX / m_eta;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    const double s = q.nodes[j];
    const double X = -std::tanh(s - tau);
    const double S = cylinder::sech(s - tau);
    const double dX = -S * S;
    const double dS = X * S;
    const double e = eta(s), de = deta(s);
    const double a = q.weights[j] * std::exp((n - 2) * w.log_W(s));
    const double b = q.weights[j] * std::exp(n * w.log_W(s));
    const double d_axis = de * (X - c) + e * dX;
    const double d_off = de * S + e * dS;
    num += a * (d_axis * d_axis + d_off * d_off + (n - 1) * e * e * S * S);
    den += b * e * e * ((X - c) * (X - c) + S * S);
  }

  // Solver λ₁ with the Dirichlet radius at the end of the stiffness window.
  const SpectralReport rep = lambda1_euclidean(w, l_max, std::exp(hi));

  HerschRecord rec{};
  rec.t_star = bal.t;
  rec.com_residual = bal.residual;
  rec.lambda1 = rep.lambda1;
  rec.hersch_quotient = num / den;
  rec.log_ratio = L;
  rec.cutoff_bound = pre * std::pow(L, 2.0 * (1.0 - n) / n);
  rec.bound_satisfied = rec.lambda1 <= n + kHerschTolerance;
  rec.quotient_satisfied = rec.hersch_quotient <= n + kHerschTolerance;
  return rec;
}

inline HerschRecord hersch_bound_check(const ConformalFactor& u, int l_max = 4) {
  return hersch_bound_check(euclidean_weight_of(u), l_max);
}

}  // namespace qcl
