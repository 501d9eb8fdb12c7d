#pragma once

/// @file core_geometry.hpp
/// @brief Quadrature grids and zonal spectral transforms for rotationally
/// symmetric functions on the round sphere S^n.
///
/// A radial function on S^n depends only on the colatitude θ measured from
/// the north pole. Throughout, such functions are parametrized by
/// x = cos θ ∈ [-1, 1], in which the round volume element becomes
/// σ_{n-1} (1 - x²)^{(n-2)/2} dx. Zonal spherical harmonics of degree k
/// are the Gegenbauer polynomials of index λ = (n-1)/2 in x; we store them
/// orthonormalized against that weight.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcl/jet.hpp"

namespace qcl {

/// Sphere dimension; the conformal machinery is only defined for n ≥ 5.
class Dimension {
 public:
  explicit Dimension(int n) : n_(n) {
    if (n < 5) throw std::invalid_argument("dimension must be at least 5, got " + std::to_string(n));
  }
  int value() const { return n_; }
  operator int() const { return n_; }

 private:
  int n_;
};

/// Volume of the unit round sphere S^n, 2π^{(n+1)/2} / Γ((n+1)/2).
inline double sphere_volume(int n) {
  if (n < 0) throw std::invalid_argument("sphere_volume: n must be nonnegative");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

/// A radial function on S^n as a function of x = cos θ, evaluated on jets
/// so that derivatives in x are available to fourth order.
using Profile = std::function<Jet4(const Jet4&)>;

inline double evaluate(const Profile& f, double x) { return f(Jet4::constant(x)).value(); }

/// Value and first x-derivative.
inline std::pair<double, double> evaluate_d1(const Profile& f, double x) {
  const Jet4 j = f(Jet4::variable(x));
  return {j.c[0], j.c[1]};
}

namespace profiles {

inline Profile constant(double v) {
  return [v](const Jet4&) { return Jet4::constant(v); };
}
/// cos θ itself.
inline Profile cos_theta() {
  return [](const Jet4& x) { return x; };
}

}  // namespace profiles

/// Three-term recurrence for the orthonormal zonal basis p_0, p_1, ... with
/// respect to the weight (1 - x²)^{(n-2)/2} on [-1, 1].
class ZonalRecurrence {
 public:
  ZonalRecurrence(int n, int max_degree) : n_(n), mu0_(sphere_volume(n) / sphere_volume(n - 1)) {
    if (n < 2) throw std::invalid_argument("ZonalRecurrence: n must be at least 2");
    const double lam = 0.5 * (n - 1);
    sqrt_beta_.assign(static_cast<std::size_t>(max_degree) + 2, 0.0);
    for (int k = 1; k <= max_degree + 1; ++k) {
      const double beta = k * (k + 2.0 * lam - 1.0) / (4.0 * (k + lam) * (k + lam - 1.0));
      sqrt_beta_[static_cast<std::size_t>(k)] = std::sqrt(beta);
    }
  }

  int dimension() const { return n_; }
  int max_degree() const { return static_cast<int>(sqrt_beta_.size()) - 2; }
  /// Total mass of the weight, σ_n / σ_{n-1}.
  double mu0() const { return mu0_; }
  /// sqrt of the monic recurrence coefficient β_k (k ≥ 1).
  double sqrt_beta(int k) const { return sqrt_beta_[static_cast<std::size_t>(k)]; }

  /// Values p_0(x) .. p_K(x) written into out (size K+1).
  template <typename T>
  void evaluate_all(const T& x, std::vector<T>& out, int K) const {
    out.resize(static_cast<std::size_t>(K) + 1);
    T prev(0.0);
    T cur(1.0 / std::sqrt(mu0_));
    out[0] = cur;
    for (int k = 0; k < K; ++k) {
      T next = (x * cur - sqrt_beta(k) * prev) * (1.0 / sqrt_beta(k + 1));
      prev = cur;
      cur = next;
      out[static_cast<std::size_t>(k) + 1] = cur;
    }
  }

  /// Σ_k a_k p_k(x) by forward recurrence.
  template <typename T>
  T sum(const std::vector<double>& a, const T& x) const {
    T prev(0.0);
    T cur(1.0 / std::sqrt(mu0_));
    T acc = cur * a[0];
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
      const int ki = static_cast<int>(k);
      T next = (x * cur - sqrt_beta(ki) * prev) * (1.0 / sqrt_beta(ki + 1));
      prev = cur;
      cur = next;
      acc += cur * a[k + 1];
    }
    return acc;
  }

 private:
  int n_;
  double mu0_;
  std::vector<double> sqrt_beta_;
};

/// Gauss–Gegenbauer nodes and zonal transform tables for S^n truncated at
/// degree K. Uses K+1 nodes, so quadrature is exact through degree 2K+1.
class RadialGrid {
 public:
  static constexpr int kMinTruncation = 8;

  RadialGrid(Dimension n, int K) : n_(n.value()), K_(K), rec_(n.value(), K + 1) {
    if (K < kMinTruncation) {
      throw std::invalid_argument("spectral truncation K=" + std::to_string(K) + " is below the minimum " +
                                  std::to_string(kMinTruncation));
    }
    build();
  }

  int dimension() const { return n_; }
  int truncation() const { return K_; }
  int size() const { return K_ + 1; }
  const ZonalRecurrence& recurrence() const { return rec_; }

  /// Nodes in x = cos θ, ordered by increasing θ.
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& theta() const { return theta_; }
  /// Quadrature weights for (1 - x²)^{(n-2)/2} dx; multiply by σ_{n-1} for S^n.
  const std::vector<double>& weights() const { return w_; }
  /// p_k(x_j) stored row-major by degree.
  double basis(int k, int j) const { return table_(k, j); }
  const Eigen::MatrixXd& basis_table() const { return table_; }

  double sigma_n() const { return sphere_volume(n_); }
  double sigma_n_minus_1() const { return sphere_volume(n_ - 1); }

  /// Laplace–Beltrami eigenvalue of degree k (positive convention).
  double laplace_eigenvalue(int k) const { return static_cast<double>(k) * (k + n_ - 1); }

 private:
  void build() {
    const int N = size();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd sub(N - 1);
    for (int k = 1; k < N; ++k) sub(k - 1) = rec_.sqrt_beta(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    std::vector<double> nodes(es.eigenvalues().data(), es.eigenvalues().data() + N);

    // Newton polish on p_N, then Christoffel weights from the same recurrence.
    std::vector<Jet1> vals;
    for (double& xn : nodes) {
      for (int it = 0; it < 3; ++it) {
        rec_.evaluate_all(Jet1::variable(xn), vals, N);
        const Jet1& pN = vals.back();
        if (pN.c[1] == 0.0) break;
        xn -= pN.c[0] / pN.c[1];
      }
    }
    std::sort(nodes.begin(), nodes.end(), std::greater<>());

    x_ = nodes;
    theta_.resize(N);
    w_.resize(N);
    table_.resize(N, N);
    std::vector<double> p;
    for (int j = 0; j < N; ++j) {
      theta_[j] = std::acos(x_[j]);
      rec_.evaluate_all(x_[j], p, K_);
      double s = 0.0;
      for (int k = 0; k <= K_; ++k) {
        table_(k, j) = p[k];
        s += p[k] * p[k];
      }
      w_[j] = 1.0 / s;
    }
  }

  int n_;
  int K_;
  ZonalRecurrence rec_;
  std::vector<double> x_, theta_, w_;
  Eigen::MatrixXd table_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(Dimension n, int K) { return std::make_shared<const RadialGrid>(n, K); }

/// Point values of a radial function at the grid nodes.
struct RadialField {
  GridPtr grid;
  std::vector<double> values;
};

/// Coefficients in the orthonormal zonal basis, degrees 0..K.
struct ZonalCoeffs {
  GridPtr grid;
  std::vector<double> coeffs;

  double eigenvalue(int k) const { return grid->laplace_eigenvalue(k); }
};

inline RadialField sample(const GridPtr& grid, const Profile& f) {
  RadialField out{grid, std::vector<double>(grid->x().size())};
  for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] = evaluate(f, grid->x()[j]);
  return out;
}

inline RadialField sample(const GridPtr& grid, const std::function<double(double)>& f_of_x) {
  RadialField out{grid, std::vector<double>(grid->x().size())};
  for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] = f_of_x(grid->x()[j]);
  return out;
}

/// ∫_{S^n} f dV for a radial field.
inline double integrate_sphere(const RadialField& f) {
  const auto& w = f.grid->weights();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * f.values[j];
  return f.grid->sigma_n_minus_1() * s;
}

/// Relative level at which analyze() treats coefficients as rounding noise.
inline constexpr double kChopTolerance = 32.0 * std::numeric_limits<double>::epsilon();

/// Zonal coefficients of a sampled field. Coefficients smaller than
/// chop · max|a_k| are set to zero, so that exactly band-limited inputs stay
/// band-limited under high-order multipliers such as P (whose eigenvalues
/// grow like k⁴). Pass chop = 0 to keep the raw projections.
inline ZonalCoeffs analyze(const RadialField& f, double chop = kChopTolerance) {
  const auto& g = *f.grid;
  ZonalCoeffs out{f.grid, std::vector<double>(static_cast<std::size_t>(g.truncation()) + 1, 0.0)};
  const auto& w = g.weights();
  double top = 0.0;
  for (int k = 0; k <= g.truncation(); ++k) {
    double s = 0.0;
    for (int j = 0; j < g.size(); ++j) s += w[j] * f.values[j] * g.basis(k, j);
    out.coeffs[k] = s;
    top = std::max(top, std::abs(s));
  }
  if (chop > 0.0) {
    for (double& a : out.coeffs)
      if (std::abs(a) <= chop * top) a = 0.0;
  }
  return out;
}

inline RadialField synthesize(const ZonalCoeffs& c) {
  const auto& g = *c.grid;
  RadialField out{c.grid, std::vector<double>(static_cast<std::size_t>(g.size()), 0.0)};
  for (int j = 0; j < g.size(); ++j) {
    double s = 0.0;
    for (int k = 0; k <= g.truncation(); ++k) s += c.coeffs[k] * g.basis(k, j);
    out.values[j] = s;
  }
  return out;
}

/// Evaluate a zonal expansion off-grid (value only).
inline double evaluate(const ZonalCoeffs& c, double x) { return c.grid->recurrence().sum(c.coeffs, x); }

/// A zonal expansion as a profile, differentiable through the recurrence.
inline Profile to_profile(const ZonalCoeffs& c) {
  return [c](const Jet4& x) { return c.grid->recurrence().sum(c.coeffs, x); };
}

/// Degree-k orthonormal zonal harmonic as a profile.
inline Profile zonal_harmonic(const GridPtr& grid, int k) {
  ZonalCoeffs c{grid, std::vector<double>(static_cast<std::size_t>(grid->truncation()) + 1, 0.0)};
  c.coeffs.at(static_cast<std::size_t>(k)) = 1.0;
  return to_profile(c);
}

/// Largest coefficient magnitude in the top eighth of the spectrum relative
/// to the largest overall; small values mean the field is resolved.
inline double spectral_tail(const ZonalCoeffs& c) {
  double top = 0.0, tail = 0.0;
  const std::size_t K = c.coeffs.size() - 1;
  const std::size_t start = K - K / 8;
  for (std::size_t k = 0; k <= K; ++k) {
    top = std::max(top, std::abs(c.coeffs[k]));
    if (k >= start) tail = std::max(tail, std::abs(c.coeffs[k]));
  }
  return top > 0.0 ? tail / top : 0.0;
}

}  // namespace qcl
