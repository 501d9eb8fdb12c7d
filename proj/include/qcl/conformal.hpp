#pragma once

/// @file conformal.hpp
/// @brief Conformal factors g_u = u^κ ḡ on S^n and the quantities built from
/// them through the covariance law P_{g_u}(φ) = u^{−(n+4)/(n−4)} P(uφ):
/// Q-curvature, volume, L^p norms of Q, and Paneitz energy.
///
/// Integrals are taken in the cylinder coordinate s (see quadrature.hpp), in
/// which g_u = W² (ds² + dω²) with W = u^{κ/2} sech s. Point values of P u
/// come from jets of the profile, so factors concentrated far beyond the
/// grid resolution are handled exactly.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcl/core_geometry.hpp"
#include "qcl/moebius.hpp"
#include "qcl/paneitz.hpp"
#include "qcl/quadrature.hpp"

namespace qcl {

/// Exponent family of the conformal change: u^{4/(n−4)} or u^{4/(n−2)}.
enum class Convention { fourth_order, second_order };

inline const char* to_string(Convention c) { return c == Convention::fourth_order ? "fourth-order" : "second-order"; }

/// A function of the cylinder coordinate s, evaluated on jets in s.
using SProfile = std::function<Jet4(const Jet4&)>;

/// Smallest admissible value of a conformal factor.
inline constexpr double kPositivityFloor = 1e-12;

class ConformalFactor {
 public:
  /// log_u_of_s optionally supplies log u as a function of the cylinder
  /// coordinate s (evaluated on jets in s), for accuracy near the poles.
  /// Without it, the profile is composed with x = −tanh s.
  ConformalFactor(GridPtr grid, Profile u, Convention convention = Convention::fourth_order,
                  SProfile log_u_of_s = {})
      : grid_(std::move(grid)), u_(std::move(u)), conv_(convention), log_u_s_(std::move(log_u_of_s)) {
    if (!grid_) throw std::invalid_argument("ConformalFactor: null grid");
    samples_ = sample(grid_, u_);
    double m = std::numeric_limits<double>::infinity();
    for (double v : samples_.values) m = std::min(m, v);
    for (double x : {1.0, -1.0}) m = std::min(m, qcl::evaluate(u_, x));
    if (!(m > kPositivityFloor)) {
      throw std::domain_error("conformal factor is not positive (min u = " + std::to_string(m) + ")");
    }
  }

  int n() const { return grid_->dimension(); }
  Dimension dimension() const { return Dimension(n()); }
  Convention convention() const { return conv_; }
  const GridPtr& grid() const { return grid_; }
  const Profile& profile() const { return u_; }
  const RadialField& samples() const { return samples_; }

  double operator()(double x) const { return qcl::evaluate(u_, x); }

  /// Exponent κ of g_u = u^κ ḡ.
  double kappa() const { return conv_ == Convention::fourth_order ? 4.0 / (n() - 4) : 4.0 / (n() - 2); }
  /// dV_{g_u} = u^{volume_exponent} dV_ḡ.
  double volume_exponent() const { return 0.5 * n() * kappa(); }
  /// |∇φ|²_{g_u} dV_{g_u} = u^{gradient_exponent} |∇φ|²_ḡ dV_ḡ.
  double gradient_exponent() const { return 0.5 * (n() - 2) * kappa(); }

  /// log u as a jet in s.
  Jet4 log_u_jet(const Jet4& s) const {
    if (log_u_s_) return log_u_s_(s);
    return log(u_(-tanh(s)));
  }
  double log_u_s(double s) const { return log_u_jet(Jet4::constant(s)).value(); }

  /// log W where g_u = W² (ds² + dω²).
  double log_W(double s) const { return 0.5 * kappa() * log_u_s(s) + cylinder::log_sech(s); }

  /// d/ds log W.
  double dlog_W(double s) const {
    const Jet4 l = log_u_jet(Jet4::variable(s));
    return 0.5 * kappa() * l.c[1] - std::tanh(s);
  }

  /// v = sech^{(n−4)/2}(s) · u as a jet in s; P u = sech^{−(n+4)/2} P_cyl v.
  Jet4 cylinder_jet(double s) const {
    const Jet4 sj = Jet4::variable(s);
    return exp(0.5 * (n() - 4) * log_sech(sj) + log_u_jet(sj));
  }

  /// c·u, with the same convention.
  ConformalFactor scaled(double c) const {
    if (!(c > 0.0)) throw std::invalid_argument("ConformalFactor::scaled: c must be positive");
    Profile p = [u = u_, c](const Jet4& x) { return c * u(x); };
    SProfile l;
    if (log_u_s_) l = [f = log_u_s_, lc = std::log(c)](const Jet4& s) { return f(s) + lc; };
    return ConformalFactor(grid_, p, conv_, l);
  }

  ConformalFactor with_convention(Convention c) const { return ConformalFactor(grid_, u_, c, log_u_s_); }

  const SProfile& log_u_override() const { return log_u_s_; }

 private:
  GridPtr grid_;
  Profile u_;
  Convention conv_;
  SProfile log_u_s_;
  RadialField samples_;
};

inline ConformalFactor round_factor(const GridPtr& grid, Convention c = Convention::fourth_order) {
  return ConformalFactor(grid, profiles::constant(1.0), c, [](const Jet4&) { return Jet4::constant(0.0); });
}

/// u_t = φ_t^{(n−4)/2} (fourth-order) or φ_t^{(n−2)/2} (second-order), so that
/// g_{u_t} = δ_t^* ḡ is isometric to the round metric.
inline ConformalFactor moebius_factor(const GridPtr& grid, const MoebiusMap& m,
                                      Convention c = Convention::fourth_order) {
  const int n = grid->dimension();
  const double e = c == Convention::fourth_order ? 0.5 * (n - 4) : 0.5 * (n - 2);
  Profile p = [m, e](const Jet4& x) { return pow(m.factor(x), e); };
  return ConformalFactor(grid, p, c, [m, e](const Jet4& s) { return e * m.log_factor_s(s); });
}

inline ConformalFactor moebius_factor(const GridPtr& grid, double t, Convention c = Convention::fourth_order) {
  return moebius_factor(grid, MoebiusMap(t), c);
}

/// Cylinder rule adapted to the volume density of g_u.
inline QuadratureRule volume_rule(const ConformalFactor& u) {
  const int n = u.n();
  return cylinder::rule_for([&](double s) { return n * u.log_W(s); });
}

/// ∫_{S^n} f dV_{g_u} for f given as a function of x = cos θ.
inline double integrate_conformal(const ConformalFactor& u, const std::function<double(double)>& f_of_x) {
  const QuadratureRule r = volume_rule(u);
  const int n = u.n();
  const double acc = r.integrate([&](double s) { return f_of_x(cylinder::x_of_s(s)) * std::exp(n * u.log_W(s)); });
  return sphere_volume(n - 1) * acc;
}

/// Vol(S^n, g_u) = ∫ u^{2n/(n−4)} dV_ḡ.
inline double volume(const ConformalFactor& u) {
  return integrate_conformal(u, [](double) { return 1.0; });
}

/// c·u with Vol = σ_n.
inline ConformalFactor normalize_volume(const ConformalFactor& u) {
  const double c = std::pow(sphere_volume(u.n()) / volume(u), 1.0 / u.volume_exponent());
  return u.scaled(c);
}

namespace detail {
inline void require_fourth_order(const ConformalFactor& u, const char* what) {
  if (u.convention() != Convention::fourth_order) {
    throw std::invalid_argument(std::string(what) + " requires the fourth-order convention");
  }
}
}  // namespace detail

/// Q_{g_u} at cylinder coordinate s. Two exact forms of P u are available:
/// the cylinder form P u = sech^{−(n+4)/2} P_cyl v with v = sech^{(n−4)/2} u,
/// giving Q = (2/(n−4)) v^{−(n+4)/(n−4)} P_cyl v, and the x = cos θ form.
/// The first is well conditioned where u is concentrated, the second where
/// u is flat; each point takes whichever has the smaller term-cancellation
/// ratio.
inline double q_at_s(const ConformalFactor& u, double s) {
  detail::require_fourth_order(u, "q_curvature");
  const int n = u.n();
  const Jet4 v = u.cylinder_jet(s);
  const PointValue pcyl = paneitz_cylinder_detail(v, n);
  // Far from the concentration point x rounds to ±1; the x form is still
  // exact there (the profile is smooth at the poles).
  const double x = cylinder::x_of_s(s);
  const PaneitzConstants pc = paneitz_constants(u.dimension());
  const PointValue px = paneitz_pointwise_detail(u.profile(), x, pc);
  if (px.condition() < pcyl.condition()) {
    return static_cast<double>((2.0L / (n - 4)) * std::exp(-(n + 4.0L) / (n - 4) * u.log_u_jet(Jet4::constant(s)).c[0]) * px.value);
  }
  return static_cast<double>((2.0L / (n - 4)) * std::exp(-(n + 4.0L) / (n - 4) * std::log(v.c[0])) * pcyl.value);
}

/// Q_{g_u}(x) = (2/(n−4)) u^{−(n+4)/(n−4)} P u.
inline double q_pointwise(const ConformalFactor& u, double x) {
  detail::require_fourth_order(u, "q_curvature");
  const int n = u.n();
  const double uv = u(x);
  if (!(uv > kPositivityFloor)) throw std::domain_error("q_curvature: u is not positive");
  if (std::abs(x) < 1.0) return q_at_s(u, cylinder::s_of_theta(std::acos(x)));
  const PaneitzConstants pc = paneitz_constants(u.dimension());
  return (2.0 / (n - 4)) * std::pow(uv, -(n + 4.0) / (n - 4)) * paneitz_pointwise(u.profile(), x, pc);
}

enum class QRoute { automatic, spectral, pointwise };

/// Relative error budget for choosing the spectral route automatically.
inline constexpr double kSpectralBudget = 1e-12;

/// Bound on the rounding error that applying P to a sampled expansion can
/// produce at a point, relative to the size of P u. Each retained
/// coefficient carries an error of about eps · max|a_k|, amplified by the
/// multiplier m_k and by sup |p_k| = p_k(1).
inline double spectral_amplification(const ZonalCoeffs& c, const PaneitzConstants& pc) {
  std::vector<double> p1;
  c.grid->recurrence().evaluate_all(1.0, p1, c.grid->truncation());
  double top = 0.0, noise = 0.0, signal = 0.0;
  for (double a : c.coeffs) top = std::max(top, std::abs(a));
  for (std::size_t k = 0; k < c.coeffs.size(); ++k) {
    if (c.coeffs[k] == 0.0) continue;
    const double m = pc.multiplier(static_cast<int>(k));
    noise += m * std::abs(p1[k]);
    signal = std::max(signal, m * std::abs(c.coeffs[k] * p1[k]));
  }
  if (signal == 0.0) return 0.0;
  return std::numeric_limits<double>::epsilon() * top * noise / signal;
}

/// Q-curvature at the grid nodes. The spectral route applies P to the zonal
/// coefficients of u; the pointwise route differentiates the profile. The
/// automatic choice is spectral only when u is band-limited on the grid and
/// the amplified rounding error stays within kSpectralBudget.
inline RadialField q_curvature(const ConformalFactor& u, QRoute route = QRoute::automatic) {
  detail::require_fourth_order(u, "q_curvature");
  const int n = u.n();
  const PaneitzConstants pc = paneitz_constants(u.dimension());
  const ZonalCoeffs c = analyze(u.samples());
  if (route == QRoute::automatic) {
    const bool resolved = spectral_tail(c) == 0.0 && spectral_amplification(c, pc) <= kSpectralBudget;
    route = resolved ? QRoute::spectral : QRoute::pointwise;
  }
  RadialField q{u.grid(), std::vector<double>(u.samples().values.size())};
  if (route == QRoute::spectral) {
    const RadialField pu = synthesize(paneitz_apply(c, pc));
    for (std::size_t j = 0; j < q.values.size(); ++j) {
      const double uv = u.samples().values[j];
      q.values[j] = (2.0 / (n - 4)) * std::pow(uv, -(n + 4.0) / (n - 4)) * pu.values[j];
    }
  } else {
    for (std::size_t j = 0; j < q.values.size(); ++j) q.values[j] = q_at_s(u, cylinder::s_of_theta(u.grid()->theta()[j]));
  }
  return q;
}

/// (∫ |Q_{g_u}|^p dV_{g_u})^{1/p}. Panels are graded geometrically toward
/// sign changes of Q, where |Q|^p has a power singularity.
inline double lp_norm_q(const ConformalFactor& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm_q: p must be at least 1");
  const int n = u.n();
  // The window follows |Q|^p dV, which can sit far outside the volume window.
  const auto [lo, hi] = cylinder::find_window([&](double s) {
    return n * u.log_W(s) + p * std::log(std::max(std::abs(q_at_s(u, s)), 1e-300));
  });
  std::vector<double> roots;
  const double step = 0.0625;
  double a = lo, qa = q_at_s(u, a);
  for (double b = lo + step; b <= hi + 1e-12; b += step) {
    const double qb = q_at_s(u, b);
    if ((qa < 0.0) != (qb < 0.0)) {
      double l = a, r = b, ql = qa;
      for (int it = 0; it < 60 && r - l > 1e-14; ++it) {
        const double m = 0.5 * (l + r);
        const double qm = q_at_s(u, m);
        if ((qm < 0.0) == (ql < 0.0)) {
          l = m;
          ql = qm;
        } else {
          r = m;
        }
      }
      roots.push_back(0.5 * (l + r));
    }
    a = b;
    qa = qb;
  }
  const QuadratureRule r = composite_gauss(lo, hi, 0.25, 16, graded_breaks(roots, 0.25));
  const double I = sphere_volume(n - 1) * r.integrate([&](double s) {
    return std::pow(std::abs(q_at_s(u, s)), p) * std::exp(n * u.log_W(s));
  });
  return std::pow(I, 1.0 / p);
}

/// ∫ u² dV_ḡ.
inline double l2_norm_squared(const ConformalFactor& u) {
  const int n = u.n();
  const QuadratureRule r = cylinder::rule_for([&](double s) { return 2.0 * u.log_u_s(s) + n * cylinder::log_sech(s); });
  return sphere_volume(n - 1) *
         r.integrate([&](double s) { return std::exp(2.0 * u.log_u_s(s) + n * cylinder::log_sech(s)); });
}

/// ∫ u P u dV_ḡ. Resolved factors use Parseval; others integrate v P_cyl v
/// over the cylinder, v = sech^{(n−4)/2} u.
inline double energy(const ConformalFactor& u) {
  const PaneitzConstants pc = paneitz_constants(u.dimension());
  const ZonalCoeffs c = analyze(u.samples());
  if (spectral_tail(c) == 0.0 && spectral_amplification(c, pc) <= kSpectralBudget) {
    double e = 0.0;
    for (std::size_t k = 0; k < c.coeffs.size(); ++k) e += pc.multiplier(static_cast<int>(k)) * c.coeffs[k] * c.coeffs[k];
    return u.grid()->sigma_n_minus_1() * e;
  }
  const int n = u.n();
  const QuadratureRule r =
      cylinder::rule_for([&](double s) { return 2.0 * u.log_u_s(s) + (n - 4) * cylinder::log_sech(s); });
  const double acc = r.integrate([&](double s) {
    const Jet4 v = u.cylinder_jet(s);
    return v.c[0] * paneitz_cylinder(v, n);
  });
  return sphere_volume(n - 1) * acc;
}

struct CovarianceResidual {
  double relative;  ///< max |LHS − RHS| / max |RHS| over the grid nodes
  double absolute;  ///< max |LHS − RHS|
  double scale;     ///< max |RHS|
};

/// Compares P(u_t · (φ∘δ_t)) with u_t^{(n+4)/(n−4)} (Pφ)∘δ_t at the grid
/// nodes. The left side is differentiated pointwise; the right side applies
/// P to the zonal coefficients of φ and evaluates the series at δ_t(x).
inline CovarianceResidual moebius_covariance_detail(const GridPtr& grid, double t, const Profile& phi) {
  const int n = grid->dimension();
  const PaneitzConstants pc = paneitz_constants(Dimension(n));
  const MoebiusMap m(t);
  const double e = 0.5 * (n - 4);
  const ZonalCoeffs pphi = paneitz_apply(analyze(sample(grid, phi)), pc);
  const Profile lhs_profile = [&](const Jet4& x) { return pow(m.factor(x), e) * phi(m.apply(x)); };
  CovarianceResidual r{0.0, 0.0, 0.0};
  for (double x : grid->x()) {
    const double lhs = paneitz_pointwise(lhs_profile, x, pc);
    const double ut = std::pow(m.factor(x), e);
    const double rhs = std::pow(ut, (n + 4.0) / (n - 4)) * evaluate(pphi, m.apply(x));
    r.absolute = std::max(r.absolute, std::abs(lhs - rhs));
    r.scale = std::max(r.scale, std::abs(rhs));
  }
  r.relative = r.scale > 0.0 ? r.absolute / r.scale : r.absolute;
  return r;
}

inline double moebius_covariance_residual(const GridPtr& grid, double t, const Profile& phi) {
  if (!(t > 0.0)) throw std::invalid_argument("moebius_covariance_residual: t must be positive");
  return moebius_covariance_detail(grid, t, phi).relative;
}

}  // namespace qcl
