#pragma once

/// @file counterexample.hpp
/// @brief The family u_ε = 1 − ε cos θ: closed-form Q, the admissible
/// exponent window, and sweeps of ‖Q‖_{L^p} as ε → 1.
///
/// P(u_ε) = c_n u_ε − n(n + a_n), so Q is explicit in u_ε. Integrals are
/// taken in the cylinder coordinate s, where the collapse at θ = 0 happens
/// on an O(1) scale around s ≈ ½ log(1 − ε); uniform panels in s are
/// geometrically graded in θ.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qcl/conformal.hpp"
#include "qcl/paneitz.hpp"
#include "qcl/quadrature.hpp"

namespace qcl {

inline void check_epsilon(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("u_eps: epsilon must lie in [0, 1)");
}

/// 1 − ε cos θ, with log u supplied in s so that values near the collapse
/// point keep full relative precision.
inline ConformalFactor u_eps(const GridPtr& grid, double eps) {
  check_epsilon(eps);
  Profile u = [eps](const Jet4& x) { return 1.0 - eps * x; };
  SProfile log_u = [eps](const Jet4& s) {
    // 1 − x = 1 + tanh s = 2 / (1 + e^{−2s}).
    return log((1.0 - eps) + eps * (2.0 / (1.0 + exp(-2.0 * s))));
  };
  return ConformalFactor(grid, u, Convention::fourth_order, log_u);
}

inline ConformalFactor u_eps(Dimension n, double eps, int K = 64) { return u_eps(make_grid(n, K), eps); }

/// u_ε at angle θ, as (1 − ε) + 2ε sin²(θ/2).
inline double u_eps_value(double eps, double theta) {
  const double h = std::sin(0.5 * theta);
  return (1.0 - eps) + 2.0 * eps * h * h;
}

/// n(n + a_n), the constant in P(u_ε) = c_n u_ε − n(n + a_n).
inline double collapse_constant(Dimension n) {
  const PaneitzConstants pc = paneitz_constants(n);
  return n.value() * (n.value() + pc.a_n);
}

/// Q as a function of the value of u_ε.
inline double q_of_u(Dimension dim, double u) {
  const int n = dim.value();
  const PaneitzConstants pc = paneitz_constants(dim);
  return (2.0 / (n - 4)) * (pc.c_n * std::pow(u, -8.0 / (n - 4)) - collapse_constant(dim) * std::pow(u, -(n + 4.0) / (n - 4)));
}

inline double q_closed_form(Dimension n, double eps, double theta) {
  check_epsilon(eps);
  return q_of_u(n, u_eps_value(eps, theta));
}

/// (n/4, n²/(2(n+4))).
inline std::pair<double, double> admissible_p_window(Dimension dim) {
  const double n = dim.value();
  return {n / 4.0, n * n / (2.0 * (n + 4.0))};
}

/// (1/2)^{2n/(n−4)} · Vol(S^n \ B(pole, π/3)), a lower bound for Vol(g_{u_ε}).
inline double counterexample_volume_bound(Dimension dim) {
  const int n = dim.value();
  const QuadratureRule q = composite_gauss(std::numbers::pi / 3.0, std::numbers::pi, 0.25, 16);
  const double outside = sphere_volume(n - 1) * q.integrate([n](double th) { return std::pow(std::sin(th), n - 1); });
  return std::pow(0.5, 2.0 * n / (n - 4)) * outside;
}

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kRefinementTolerance = 5e-3;

namespace detail {

/// ∫ F(u(s)) sech^n(s) ds over [−L, L] with panels of width h, where
/// u(s) = (1 − ε) + ε(1 + tanh s).
template <typename F>
double cylinder_integral(int n, double eps, double L, double h, F&& F_of_u, std::vector<double> breaks = {}) {
  const QuadratureRule q = composite_gauss(-L, L, h, 16, std::move(breaks));
  return sphere_volume(n - 1) * q.integrate([&](double s) {
    const double u = (1.0 - eps) + eps * cylinder::one_minus_x(s);
    return F_of_u(u) * std::exp(n * cylinder::log_sech(s));
  });
}

/// ∫ |Q|^p dV_{g_u}, written as (2/(n−4))^p |c_n u − d|^p u^{(2n − p(n+4))/(n−4)}
/// to avoid the cancellation inside Q near u = 0. Accepts ε = 1.
inline double lp_integral(int n, double p, double eps, double L, double h) {
  const PaneitzConstants pc = paneitz_constants(Dimension(n));
  const double d = collapse_constant(Dimension(n));
  const double pre = std::pow(2.0 / (n - 4), p);
  const double e = (2.0 * n - p * (n + 4.0)) / (n - 4);
  // Q vanishes where u = d/c_n, i.e. tanh s = (d/c_n − 1)/ε.
  std::vector<double> breaks;
  if (eps > 0.0) {
    const double z = (d / pc.c_n - 1.0) / eps;
    if (std::abs(z) < 1.0) breaks.push_back(std::atanh(z));
  }
  return cylinder_integral(
      n, eps, L, h, [&](double u) { return pre * std::pow(std::abs(pc.c_n * u - d), p) * std::pow(u, e); },
      graded_breaks(breaks, h));
}

/// lp_integral checked against h/2; throws QuadratureError beyond 0.5%.
inline double checked_lp_integral(int n, double p, double eps, double L) {
  const double a = lp_integral(n, p, eps, L, 0.5);
  const double b = lp_integral(n, p, eps, L, 0.25);
  if (!(std::abs(a - b) <= kRefinementTolerance * std::abs(b))) {
    throw QuadratureError("counterexample: L^p quadrature refinement disagrees by more than 0.5% (eps = " +
                          std::to_string(eps) + ")");
  }
  return b;
}

}  // namespace detail

struct SweepRow {
  double eps;
  double volume;
  double min_u;
  double lp_norm_q;
  double sup_q;
};

inline constexpr double kSweepWindow = 30.0;

/// One row per ε (ε_list strictly increasing in [0, 1)).
inline std::vector<SweepRow> sweep(Dimension dim, double p, const std::vector<double>& eps_list) {
  const int n = dim.value();
  if (!(p >= 1.0)) throw std::invalid_argument("sweep: p must be at least 1");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    check_epsilon(eps_list[i]);
    if (i > 0 && !(eps_list[i] > eps_list[i - 1])) throw std::invalid_argument("sweep: eps_list must be strictly increasing");
  }
  std::vector<SweepRow> rows;
  for (double eps : eps_list) {
    SweepRow r{};
    r.eps = eps;
    r.volume = detail::cylinder_integral(n, eps, kSweepWindow, 0.25, [n](double u) { return std::pow(u, 2.0 * n / (n - 4)); });
    r.min_u = 1.0 - eps;
    r.lp_norm_q = std::pow(detail::checked_lp_integral(n, p, eps, kSweepWindow), 1.0 / p);
    // |Q(u)| is largest at one of the extreme values of u or where Q' = 0, i.e.
    // u = d(n+4)/(8 c_n).
    const PaneitzConstants pc = paneitz_constants(dim);
    const double u_crit = collapse_constant(dim) * (n + 4.0) / (8.0 * pc.c_n);
    r.sup_q = std::max(std::abs(q_of_u(dim, 1.0 - eps)), std::abs(q_of_u(dim, 1.0 + eps)));
    if (u_crit > 1.0 - eps && u_crit < 1.0 + eps) r.sup_q = std::max(r.sup_q, std::abs(q_of_u(dim, u_crit)));
    rows.push_back(r);
  }
  return rows;
}

/// ‖Q‖_{L^p} at ε = 1 (u = 1 − cos θ). The s-window is doubled as a
/// convergence check; throws QuadratureError if the integral does not settle,
/// which is what happens for p above the admissible window.
inline double lp_norm_limit(Dimension dim, double p) {
  const int n = dim.value();
  const double a = detail::checked_lp_integral(n, p, 1.0, kSweepWindow);
  const double b = detail::checked_lp_integral(n, p, 1.0, 2.0 * kSweepWindow);
  if (!(std::abs(a - b) <= kRefinementTolerance * std::abs(b))) {
    throw QuadratureError("counterexample: eps = 1 integral does not converge as the window grows (p outside the window?)");
  }
  return std::pow(b, 1.0 / p);
}

}  // namespace qcl
