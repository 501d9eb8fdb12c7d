#pragma once

/// @file quadrature.hpp
/// @brief Composite Gauss–Legendre rules and the cylinder coordinate
/// s = log tan(θ/2) on S^n minus the poles.
///
/// In cylinder coordinates the round metric is sech²(s)(ds² + dω²), so the
/// volume element is σ_{n-1} sech^n(s) ds after integrating out S^{n-1}.
/// Axis-aligned Möbius dilations act as translations in s, and algebraic
/// behavior at the poles becomes exponential decay; uniform panels in s are
/// geometrically graded in θ.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qcl {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <typename F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// q-point Gauss–Legendre rule on [-1, 1] (Newton on the Legendre recurrence).
inline QuadratureRule gauss_legendre(int q) {
  if (q < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  QuadratureRule r;
  r.nodes.resize(q);
  r.weights.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (q == 1) p0 = 1.0, p1 = x;
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = -x;
    r.nodes[q - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weights[i] = w;
    r.weights[q - 1 - i] = w;
  }
  return r;
}

/// Rule on [a, b] mapped from a reference rule.
inline QuadratureRule mapped(const QuadratureRule& ref, double a, double b) {
  QuadratureRule r;
  r.nodes.resize(ref.size());
  r.weights.resize(ref.size());
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    r.nodes[i] = m + h * ref.nodes[i];
    r.weights[i] = h * ref.weights[i];
  }
  return r;
}

/// Composite rule: [a, b] split into panels no wider than h, each carrying a
/// q-point Gauss–Legendre rule. Extra breakpoints are honored exactly.
inline QuadratureRule composite_gauss(double a, double b, double h, int q, std::vector<double> breaks = {}) {
  if (!(b > a)) throw std::invalid_argument("composite_gauss: empty interval");
  const QuadratureRule ref = gauss_legendre(q);
  std::vector<double> cuts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double c : breaks)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  QuadratureRule out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    const int panels = std::max(1, static_cast<int>(std::ceil(len / h - 1e-12)));
    for (int p = 0; p < panels; ++p) {
      const double lo = cuts[k] + len * p / panels;
      const double hi = cuts[k] + len * (p + 1) / panels;
      const QuadratureRule m = mapped(ref, lo, hi);
      out.nodes.insert(out.nodes.end(), m.nodes.begin(), m.nodes.end());
      out.weights.insert(out.weights.end(), m.weights.begin(), m.weights.end());
    }
  }
  return out;
}

/// Breakpoints c ± h·2^{−k}, k = 1..levels, for integrands with a power-type
/// singularity at c such as |s − c|^p.
inline std::vector<double> graded_breaks(const std::vector<double>& centers, double h, int levels = 40) {
  std::vector<double> out;
  for (double c : centers) {
    out.push_back(c);
    for (int k = 1; k <= levels; ++k) {
      out.push_back(c - std::ldexp(h, -k));
      out.push_back(c + std::ldexp(h, -k));
    }
  }
  return out;
}

namespace cylinder {

/// cos θ at s.
inline double x_of_s(double s) { return -std::tanh(s); }
/// 1 - cos θ, accurate near the north pole (s → -∞).
inline double one_minus_x(double s) { return 2.0 / (1.0 + std::exp(-2.0 * s)); }
/// 1 + cos θ, accurate near the south pole (s → +∞).
inline double one_plus_x(double s) { return 2.0 / (1.0 + std::exp(2.0 * s)); }
inline double theta_of_s(double s) { return 2.0 * std::atan(std::exp(s)); }
inline double s_of_theta(double theta) { return std::log(std::tan(0.5 * theta)); }
/// log sech s without overflow.
inline double log_sech(double s) {
  const double a = std::abs(s);
  return std::log(2.0) - a - std::log1p(std::exp(-2.0 * a));
}
inline double sech(double s) { return std::exp(log_sech(s)); }
/// d x / d s.
inline double dx_ds(double s) {
  const double sh = sech(s);
  return -sh * sh;
}

/// Smallest interval [lo, hi] ⊂ [-limit, limit] outside which log_density
/// stays below its maximum minus `decades` (natural-log units), padded.
inline std::pair<double, double> find_window(const std::function<double(double)>& log_density, double decades = 40.0,
                                             double limit = 60.0, double step = 0.125, double pad = 1.0) {
  double best = -INFINITY;
  std::vector<double> s_vals, l_vals;
  for (double s = -limit; s <= limit + 1e-12; s += step) {
    const double l = log_density(s);
    s_vals.push_back(s);
    l_vals.push_back(l);
    if (l > best) best = l;
  }
  if (!std::isfinite(best)) throw std::domain_error("find_window: density vanishes everywhere");
  double lo = limit, hi = -limit;
  for (std::size_t i = 0; i < s_vals.size(); ++i) {
    if (l_vals[i] >= best - decades) {
      lo = std::min(lo, s_vals[i]);
      hi = std::max(hi, s_vals[i]);
    }
  }
  return {std::max(-limit, lo - pad), std::min(limit, hi + pad)};
}

/// Composite rule over the window where exp(log_density) is not negligible.
inline QuadratureRule rule_for(const std::function<double(double)>& log_density, double decades = 40.0,
                               double h = 0.25, int q = 16, double limit = 60.0) {
  const auto [lo, hi] = find_window(log_density, decades, limit);
  return composite_gauss(lo, hi, h, q);
}

}  // namespace cylinder

}  // namespace qcl
