#pragma once

/// @file moebius.hpp
/// @brief Axis-aligned Möbius dilations of S^n.
///
/// δ_t is y ↦ t·y in stereographic coordinates from the south pole, so it
/// fixes both poles and pushes mass toward the north pole when t > 1. In the
/// cylinder coordinate s it is the translation s ↦ s + log t, and the
/// pullback metric is δ_t^* ḡ = φ_t² ḡ with
///   φ_t = t(1+|y|²)/(1+t²|y|²) = 2t / ((t²+1) − (t²−1) cos θ).

#include <cmath>
#include <stdexcept>

#include "qcl/jet.hpp"
#include "qcl/quadrature.hpp"

namespace qcl {

class MoebiusMap {
 public:
  /// direction = +1 dilates toward the north pole, −1 toward the south pole.
  explicit MoebiusMap(double t, int direction = +1) : t_(t), dir_(direction) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("MoebiusMap: t must be positive");
    if (direction != 1 && direction != -1) throw std::invalid_argument("MoebiusMap: direction must be +1 or -1");
  }

  double t() const { return t_; }
  int direction() const { return dir_; }
  /// Dilation factor toward the north pole.
  double effective_t() const { return dir_ > 0 ? t_ : 1.0 / t_; }
  /// Translation in s.
  double shift() const { return dir_ * std::log(t_); }

  MoebiusMap inverse() const { return MoebiusMap(1.0 / t_, dir_); }
  /// Same-axis composition: (δ_a ∘ δ_b) = δ_{ab}.
  MoebiusMap compose(const MoebiusMap& o) const { return MoebiusMap(effective_t() * o.effective_t()); }

  /// Image of x = cos θ.
  template <typename T>
  T apply(const T& x) const {
    const double t2 = effective_t() * effective_t();
    return ((1.0 + x) - t2 * (1.0 - x)) / ((1.0 + x) + t2 * (1.0 - x));
  }

  /// φ_t at x = cos θ.
  template <typename T>
  T factor(const T& x) const {
    const double t = effective_t();
    return (2.0 * t) / ((1.0 + x) + t * t * (1.0 - x));
  }

  /// log φ_t at cylinder coordinate s (accurate at both ends).
  double log_factor_s(double s) const { return cylinder::log_sech(s + shift()) - cylinder::log_sech(s); }
  Jet4 log_factor_s(const Jet4& s) const { return log_sech(s + shift()) - log_sech(s); }

 private:
  double t_;
  int dir_;
};

}  // namespace qcl
