#pragma once

/// @file membership.hpp
/// @brief The three defining conditions of the class E_{Λ,p}: normalized
/// volume, ‖Q‖_{L^p} ≤ Λ and a spectral gap λ₁ ≥ n + 1/Λ.

#include <cmath>
#include <stdexcept>

#include "qcl/conformal.hpp"
#include "qcl/spectrum.hpp"

namespace qcl {

inline constexpr double kVolumeTolerance = 1e-8;
inline constexpr double kEigenTolerance = 1e-8;

struct ClassReport {
  double volume;
  double q_lp_norm;
  double lambda1;
  double p;
  double Lambda;
  bool volume_ok;
  bool q_ok;
  bool gap_ok;
  bool is_member;
};

inline ClassReport class_membership(const ConformalFactor& u, double p, double Lambda, int l_max = 8) {
  const int n = u.n();
  if (!(p > n / 4.0)) throw std::invalid_argument("class_membership: p must exceed n/4");
  if (!(Lambda > 0.0)) throw std::invalid_argument("class_membership: Lambda must be positive");
  ClassReport r{};
  r.p = p;
  r.Lambda = Lambda;
  r.volume = volume(u);
  r.q_lp_norm = lp_norm_q(u, p);
  r.lambda1 = lambda1_sphere(u, l_max).lambda1;
  const double sn = sphere_volume(n);
  r.volume_ok = std::abs(r.volume - sn) <= kVolumeTolerance * sn;
  r.q_ok = r.q_lp_norm <= Lambda;
  r.gap_ok = r.lambda1 >= n + 1.0 / Lambda - kEigenTolerance;
  r.is_member = r.volume_ok && r.q_ok && r.gap_ok;
  return r;
}

}  // namespace qcl
