#pragma once

/// @file spectrum.hpp
/// @brief First positive eigenvalue of radial conformal metrics on S^n and
/// on R^n, by sector decomposition of the weighted Rayleigh quotient, plus
/// the logarithmic cutoffs and the volume-concentration probe.
///
/// Everything is written in the cylinder coordinate s, where g_u = W²(ds² + dω²).
/// A test function f(s)·Y_ℓ(ω) with Y_ℓ a degree-ℓ harmonic on S^{n−1} has
///   ∫|∇(fY)|² dV_{g_u} = ∫ W^{n−2} (f'² + ℓ(ℓ+n−2) f²) ds,
///   ∫ (fY)² dV_{g_u}   = ∫ W^n f² ds,
/// so each sector is a one-dimensional generalized eigenproblem.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcl/conformal.hpp"
#include "qcl/quadrature.hpp"

namespace qcl {

/// Dimension of the space of degree-ℓ spherical harmonics on S^{n−1}.
inline int harmonic_multiplicity(int n, int l) {
  auto binom = [](int a, int b) {
    if (b < 0 || a < b) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  return static_cast<int>(std::lround(binom(l + n - 1, n - 1) - binom(l + n - 3, n - 1)));
}

/// Thrown when an eigenproblem cannot be solved or does not converge.
class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpectralReport {
  double lambda1 = 0.0;
  int sector = 0;
  /// Abscissae of the eigenfunction samples: colatitude θ on S^n, radius on R^n.
  std::vector<double> profile_abscissa;
  /// Minimizing eigenfunction, scaled to max |f| = 1.
  std::vector<double> profile;
  int l_max = 0;
  /// |λ₁(N) − λ₁(3N/4)| between basis sizes.
  double refinement_delta = 0.0;
  std::vector<double> sector_minima;
  /// Sectors whose minimum ties λ₁, and their summed multiplicity.
  std::vector<int> tied_sectors;
  int multiplicity = 0;
  int basis_size = 0;
  /// Largest condition number among the reduced mass matrices.
  double mass_condition = 0.0;
  std::vector<std::string> warnings;
  /// Euclidean problem only: R_max and the values at R_max and 2 R_max.
  double r_max = 0.0;
  double lambda1_at_r_max = 0.0;
  double lambda1_at_2r_max = 0.0;
};

/// Ties within this relative distance of the minimum count toward the multiplicity.
inline constexpr double kSectorTieTolerance = 1e-7;

namespace detail {

/// Quadrature for ∫ F(s) ds in the cylinder coordinate with log W cached.
struct LineRule {
  double center = 0.0;
  std::vector<double> s, log_w, log_W;
};

/// Gegenbauer nodes in X = −tanh(s − c): exact for integrands that are
/// polynomials in X times sech^n(s − c).
inline LineRule gegenbauer_line_rule(int n, int m, double center, const std::function<double(double)>& log_W) {
  const RadialGrid g(Dimension(n), m - 1);
  LineRule r;
  r.center = center;
  for (int j = 0; j < g.size(); ++j) {
    const double sig = cylinder::s_of_theta(g.theta()[j]);
    r.s.push_back(center + sig);
    r.log_w.push_back(std::log(g.weights()[j]) - n * cylinder::log_sech(sig));
    r.log_W.push_back(log_W(center + sig));
  }
  return r;
}

inline LineRule composite_line_rule(double lo, double hi, double h, double center,
                                    const std::function<double(double)>& log_W) {
  const QuadratureRule q = composite_gauss(lo, hi, h, 16);
  LineRule r;
  r.center = center;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    r.s.push_back(q.nodes[j]);
    r.log_w.push_back(std::log(q.weights[j]));
    r.log_W.push_back(log_W(q.nodes[j]));
  }
  return r;
}

/// s at which half of ∫ exp(log_density) ds has accumulated.
inline double mass_median(const std::function<double(double)>& log_density, double upper = 60.0) {
  auto [lo, hi] = cylinder::find_window(log_density);
  hi = std::min(hi, upper);
  if (!(hi > lo)) return hi;
  const QuadratureRule q = composite_gauss(lo, hi, 0.125, 8);
  std::vector<double> vals(q.nodes.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    vals[j] = log_density(q.nodes[j]);
    peak = std::max(peak, vals[j]);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < vals.size(); ++j) total += q.weights[j] * std::exp(vals[j] - peak);
  double acc = 0.0;
  for (std::size_t j = 0; j < vals.size(); ++j) {
    const double piece = q.weights[j] * std::exp(vals[j] - peak);
    if (acc + piece >= 0.5 * total) {
      const double a = j == 0 ? lo : 0.5 * (q.nodes[j - 1] + q.nodes[j]);
      const double b = j + 1 == vals.size() ? hi : 0.5 * (q.nodes[j] + q.nodes[j + 1]);
      return a + (b - a) * (0.5 * total - acc) / piece;
    }
    acc += piece;
  }
  return hi;
}

struct SectorSetup {
  int n = 0;
  int basis = 0;
  LineRule rule;
  /// Dirichlet end, or +∞ on the sphere.
  std::optional<double> s_max;
  /// Rates a of the boundary-layer functions exp(−a (s_max − s)).
  std::vector<double> layer_rates;
};

struct SectorResult {
  double lambda = 0.0;
  Eigen::VectorXd coeffs;
  double mass_condition = 0.0;
};

/// Basis values q_i and s-derivatives q_i' at s; the basis functions are
/// sech^ℓ(s − c) q_i(s).
inline void sector_basis(const SectorSetup& st, int l, double s, const ZonalRecurrence& rec, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> q,
                         Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> dq) {
  const double sig = s - st.rule.center;
  const double X = -std::tanh(sig);
  const double sech2 = std::exp(2.0 * cylinder::log_sech(sig));
  std::vector<Jet1> p;
  rec.evaluate_all(Jet1::variable(X), p, st.basis - 1);
  for (int i = 0; i < st.basis; ++i) {
    q(i) = p[i].value();
    dq(i) = -sech2 * p[i].derivative(1);
  }
  for (std::size_t k = 0; k < st.layer_rates.size(); ++k) {
    const double a = st.layer_rates[k];
    const double e = std::exp(-a * (*st.s_max - s));
    q(st.basis + static_cast<int>(k)) = e;
    dq(st.basis + static_cast<int>(k)) = a * e;
  }
  (void)l;
}

inline SectorResult solve_sector(const SectorSetup& st, int l) {
  const int n = st.n;
  const int nb = st.basis + static_cast<int>(st.layer_rates.size());
  const int m = static_cast<int>(st.rule.s.size());
  const ZonalRecurrence rec(n + 2 * l, st.basis);
  const double mu = static_cast<double>(l) * (l + n - 2);

  Eigen::MatrixXd Q(m, nb), H(m, nb);
  Eigen::VectorXd wm(m), wa(m);
  for (int j = 0; j < m; ++j) {
    const double s = st.rule.s[j];
    const double sig = s - st.rule.center;
    const double ls = cylinder::log_sech(sig);
    sector_basis(st, l, s, rec, Q.row(j), H.row(j));
    H.row(j) += (l * -std::tanh(sig)) * Q.row(j);
    wm(j) = std::exp(st.rule.log_w[j] + n * st.rule.log_W[j] + 2.0 * l * ls);
    wa(j) = std::exp(st.rule.log_w[j] + (n - 2) * st.rule.log_W[j] + 2.0 * l * ls);
  }
  Eigen::MatrixXd A = H.transpose() * wa.asDiagonal() * H;
  if (l > 0) A += mu * (Q.transpose() * wa.asDiagonal() * Q);
  Eigen::MatrixXd M = Q.transpose() * wm.asDiagonal() * Q;

  // Linear constraints: mean zero in sector 0, zero value at a Dirichlet end.
  std::vector<Eigen::RowVectorXd> rows;
  if (l == 0) rows.push_back(wm.transpose() * Q);
  if (st.s_max) {
    Eigen::RowVectorXd q(nb), dq(nb);
    sector_basis(st, l, *st.s_max, rec, q, dq);
    rows.push_back(q);
  }
  Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(nb, nb);
  if (!rows.empty()) {
    Eigen::MatrixXd C(nb, static_cast<int>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) C.col(static_cast<int>(r)) = rows[r].transpose() / rows[r].norm();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
    const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(nb, nb);
    Z = full.rightCols(nb - static_cast<int>(rows.size()));
  }
  const Eigen::MatrixXd Az = Z.transpose() * A * Z;
  const Eigen::MatrixXd Mz = Z.transpose() * M * Z;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> me(Mz);
  if (me.info() != Eigen::Success) throw SpectralError("sector " + std::to_string(l) + ": mass matrix eigensolve failed");
  const Eigen::VectorXd& d = me.eigenvalues();
  const double dmax = d.maxCoeff();
  if (!(dmax > 0.0)) throw SpectralError("sector " + std::to_string(l) + ": mass matrix is not positive definite");
  std::vector<int> keep;
  for (int i = 0; i < d.size(); ++i)
    if (d(i) > 1e-13 * dmax) keep.push_back(i);
  Eigen::MatrixXd T(Mz.rows(), static_cast<int>(keep.size()));
  double dmin = dmax;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    T.col(static_cast<int>(k)) = me.eigenvectors().col(keep[k]) / std::sqrt(d(keep[k]));
    dmin = std::min(dmin, d(keep[k]));
  }
  const Eigen::MatrixXd S = T.transpose() * Az * T;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> se(0.5 * (S + S.transpose()));
  if (se.info() != Eigen::Success) {
    throw SpectralError("sector " + std::to_string(l) + ": eigensolve failed (mass condition " +
                        std::to_string(dmax / dmin) + ", kept " + std::to_string(keep.size()) + " of " +
                        std::to_string(Mz.rows()) + ")");
  }
  SectorResult out;
  out.lambda = se.eigenvalues()(0);
  out.coeffs = Z * T * se.eigenvectors().col(0);
  out.mass_condition = dmax / dmin;
  return out;
}

inline double sector_eval(const SectorSetup& st, int l, const Eigen::VectorXd& c, double s) {
  const int nb = st.basis + static_cast<int>(st.layer_rates.size());
  const ZonalRecurrence rec(st.n + 2 * l, st.basis);
  Eigen::RowVectorXd q(nb), dq(nb);
  sector_basis(st, l, s, rec, q, dq);
  return std::exp(l * cylinder::log_sech(s - st.rule.center)) * q.dot(c);
}

struct ScanResult {
  std::vector<double> minima;
  std::vector<SectorResult> sectors;
  double mass_condition = 0.0;
};

inline ScanResult scan_sectors(const SectorSetup& st, int l_max) {
  ScanResult r;
  for (int l = 0; l <= l_max; ++l) {
    r.sectors.push_back(solve_sector(st, l));
    r.minima.push_back(r.sectors.back().lambda);
    r.mass_condition = std::max(r.mass_condition, r.sectors.back().mass_condition);
  }
  return r;
}

/// Fills λ₁, the minimizing sector (ties go to the largest multiplicity),
/// tied sectors and the argmin warning.
inline void summarize(SpectralReport& rep, const ScanResult& scan, int n) {
  const double lam = *std::min_element(scan.minima.begin(), scan.minima.end());
  rep.lambda1 = lam;
  rep.sector_minima = scan.minima;
  rep.tied_sectors.clear();
  rep.multiplicity = 0;
  int best = -1;
  for (int l = 0; l < static_cast<int>(scan.minima.size()); ++l) {
    if (scan.minima[l] - lam <= kSectorTieTolerance * std::max(1.0, std::abs(lam))) {
      rep.tied_sectors.push_back(l);
      rep.multiplicity += harmonic_multiplicity(n, l);
      if (best < 0 || harmonic_multiplicity(n, l) > harmonic_multiplicity(n, best)) best = l;
    }
  }
  rep.sector = best;
  rep.mass_condition = scan.mass_condition;
  const int argmin = static_cast<int>(std::min_element(scan.minima.begin(), scan.minima.end()) - scan.minima.begin());
  if (argmin == rep.l_max) rep.warnings.push_back("minimum attained at l_max; increase l_max");
}

}  // namespace detail

/// λ₁(S^n, g_u): minimum over sectors ℓ = 0..l_max. The basis size follows
/// the truncation of the grid of u (capped at 161).
inline SpectralReport lambda1_sphere(const ConformalFactor& u, int l_max = 8) {
  if (l_max < 2) throw std::invalid_argument("lambda1_sphere: l_max must be at least 2");
  const int n = u.n();
  auto log_W = [&u](double s) { return u.log_W(s); };
  const double center = detail::mass_median([&](double s) { return n * u.log_W(s); });
  const int N = std::min(u.grid()->truncation(), 160) + 1;

  auto setup = [&](int basis) {
    detail::SectorSetup st;
    st.n = n;
    st.basis = basis;
    st.rule = detail::gegenbauer_line_rule(n, 2 * basis + 64, center, log_W);
    return st;
  };
  const detail::SectorSetup st = setup(N);
  const detail::ScanResult scan = detail::scan_sectors(st, l_max);
  SpectralReport rep;
  rep.l_max = l_max;
  rep.basis_size = N;
  detail::summarize(rep, scan, n);

  const detail::SectorSetup coarse = setup(std::max(8, 3 * N / 4));
  double lam_coarse = std::numeric_limits<double>::infinity();
  for (int l = 0; l <= l_max; ++l) lam_coarse = std::min(lam_coarse, detail::solve_sector(coarse, l).lambda);
  rep.refinement_delta = std::abs(rep.lambda1 - lam_coarse);

  const auto& c = scan.sectors[static_cast<std::size_t>(rep.sector)].coeffs;
  double peak = 0.0;
  for (double th : u.grid()->theta()) {
    rep.profile_abscissa.push_back(th);
    rep.profile.push_back(detail::sector_eval(st, rep.sector, c, cylinder::s_of_theta(th)));
    if (std::abs(rep.profile.back()) > std::abs(peak)) peak = rep.profile.back();
  }
  if (peak != 0.0)
    for (double& v : rep.profile) v /= peak;
  return rep;
}

/// ∫|∇φ̃|² dV_{g_u} / ∫ φ̃² dV_{g_u} with φ̃ = φ − (mean of φ in dV_{g_u}).
inline double rayleigh_quotient(const ConformalFactor& u, const RadialField& phi) {
  if (phi.grid != u.grid()) throw std::invalid_argument("rayleigh_quotient: phi must live on the grid of u");
  const ZonalCoeffs c = analyze(phi);
  int deg = 0;
  for (int k = 0; k < static_cast<int>(c.coeffs.size()); ++k)
    if (c.coeffs[k] != 0.0) deg = k;
  const Profile f = to_profile(c);
  const int n = u.n();
  const auto [lo, hi] = cylinder::find_window([&](double s) { return (n - 2) * u.log_W(s); });
  const QuadratureRule r = composite_gauss(lo, hi, std::min(0.25, 8.0 / (deg + 1)), 16);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, num = 0.0;
  for (std::size_t j = 0; j < r.nodes.size(); ++j) {
    const double s = r.nodes[j];
    const Jet4 v = f(Jet4::variable(cylinder::x_of_s(s)));
    const double fs = v.derivative(1) * cylinder::dx_ds(s);
    const double lw = u.log_W(s);
    const double b = r.weights[j] * std::exp(n * lw);
    m0 += b;
    m1 += b * v.value();
    m2 += b * v.value() * v.value();
    num += r.weights[j] * std::exp((n - 2) * lw) * fs * fs;
  }
  const double den = m2 - m1 * m1 / m0;
  if (!(den > 1e-14 * m2)) throw std::invalid_argument("rayleigh_quotient: phi is constant");
  return num / den;
}

/// A radial weight w(|y|) on R^n for the metric w^{4/(n−2)} |dy|², given
/// through log w as a function of s = log |y|.
struct EuclideanWeight {
  int n;
  std::function<double(double)> log_w;

  static EuclideanWeight from_log(Dimension n, std::function<double(double)> log_w_of_s) {
    return {n.value(), std::move(log_w_of_s)};
  }
  static EuclideanWeight from_function(Dimension n, std::function<double(double)> w_of_r) {
    return {n.value(), [w = std::move(w_of_r)](double s) {
              const double v = w(std::exp(s));
              if (v < 0.0) throw std::domain_error("EuclideanWeight: w must be nonnegative");
              return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
            }};
  }
  /// Stereographic image of the round metric, (2/(1+r²))^{(n−2)/2}.
  static EuclideanWeight stereographic(Dimension n) {
    const int d = n.value();
    return {d, [d](double s) { return 0.5 * (d - 2) * (cylinder::log_sech(s) - s); }};
  }

  /// log W with g = W² (ds² + dω²).
  double log_W(double s) const { return 2.0 / (n - 2) * log_w(s) + s; }
  EuclideanWeight scaled(double c) const {
    return {n, [f = log_w, lc = std::log(c)](double s) { return f(s) + lc; }};
  }
};

/// ∫ w^{2n/(n−2)} dy over |y| < R and over |y| > R.
struct EuclideanVolume {
  double inside;
  double tail;
};

inline EuclideanVolume euclidean_volume(const EuclideanWeight& w, double R) {
  const int n = w.n;
  auto ld = [&](double s) { return n * w.log_W(s); };
  const auto [lo, hi] = cylinder::find_window(ld);
  const double sR = std::log(R);
  auto piece = [&](double a, double b) {
    if (!(b > a)) return 0.0;
    return composite_gauss(a, b, 0.25, 16).integrate([&](double s) { return std::exp(ld(s)); });
  };
  const double s_nm1 = sphere_volume(n - 1);
  return {s_nm1 * piece(lo, std::min(hi, sR)), s_nm1 * piece(std::max(lo, sR), hi)};
}

namespace detail {

inline SpectralReport euclidean_at(const EuclideanWeight& w, int l_max, double R, int basis) {
  const int n = w.n;
  auto log_W = [&w](double s) { return w.log_W(s); };
  const double s_max = std::log(R);
  const double center = mass_median([&](double s) { return n * w.log_W(s); }, s_max);
  auto [lo, hi] = cylinder::find_window([&](double s) { return (n - 2) * w.log_W(s); });
  lo = std::min(lo, s_max - 1.0);
  SectorSetup st;
  st.n = n;
  st.basis = basis;
  st.s_max = s_max;
  st.layer_rates = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  st.rule = composite_line_rule(lo, s_max, std::min(0.25, 6.0 / basis), center, log_W);
  const ScanResult scan = scan_sectors(st, l_max);
  SpectralReport rep;
  rep.l_max = l_max;
  rep.basis_size = basis;
  summarize(rep, scan, n);
  const auto& c = scan.sectors[static_cast<std::size_t>(rep.sector)].coeffs;
  double peak = 0.0;
  for (int k = 0; k <= 64; ++k) {
    const double s = lo + (s_max - lo) * k / 64.0;
    rep.profile_abscissa.push_back(std::exp(s));
    rep.profile.push_back(sector_eval(st, rep.sector, c, s));
    if (std::abs(rep.profile.back()) > std::abs(peak)) peak = rep.profile.back();
  }
  if (peak != 0.0)
    for (double& v : rep.profile) v /= peak;
  return rep;
}

}  // namespace detail

/// λ₁(R^n, g_w) over test functions supported in |y| ≤ R, evaluated at
/// R_max and 2 R_max. The reported λ₁ is the 2 R_max value. Throws
/// SpectralError when the two differ by more than 1%.
inline SpectralReport lambda1_euclidean(const EuclideanWeight& w, int l_max, double R_max, int basis = 40) {
  if (l_max < 2) throw std::invalid_argument("lambda1_euclidean: l_max must be at least 2");
  if (!(R_max > 0.0)) throw std::invalid_argument("lambda1_euclidean: R_max must be positive");
  const SpectralReport a = detail::euclidean_at(w, l_max, R_max, basis);
  SpectralReport rep = detail::euclidean_at(w, l_max, 2.0 * R_max, basis);
  const SpectralReport coarse = detail::euclidean_at(w, l_max, 2.0 * R_max, std::max(8, 3 * basis / 4));
  rep.refinement_delta = std::abs(rep.lambda1 - coarse.lambda1);
  rep.r_max = R_max;
  rep.lambda1_at_r_max = a.lambda1;
  rep.lambda1_at_2r_max = rep.lambda1;
  if (std::abs(a.lambda1 - rep.lambda1) > 0.01 * std::abs(rep.lambda1)) {
    throw SpectralError("lambda1_euclidean: no convergence in R_max (" + std::to_string(a.lambda1) + " at R=" +
                        std::to_string(R_max) + ", " + std::to_string(rep.lambda1) + " at 2R)");
  }
  return rep;
}

// Logarithmic cutoffs.

/// 1 for ρ < r, log(ρ/R)/log(r/R) for r ≤ ρ ≤ R, 0 beyond.
inline double log_cutoff(double rho, double r, double R) {
  if (rho <= r) return 1.0;
  if (rho >= R) return 0.0;
  return std::log(rho / R) / std::log(r / R);
}

inline std::function<double(double)> cutoff_eta_R(double r, double R) {
  if (!(r > 0.0 && R > r)) throw std::invalid_argument("cutoff: need 0 < r < R");
  return [r, R](double rho) { return log_cutoff(rho, r, R); };
}

/// σ_{n−1} (log(R/r))^{1−n}.
inline double cutoff_gradient_closed_form(Dimension n, double r, double R) {
  return sphere_volume(n - 1) * std::pow(std::log(R / r), 1.0 - n);
}

/// ∫_{R^n} |∇η_R|^n dy by Gauss quadrature in ρ on geometric panels.
inline double gradient_n_integral(Dimension n, double r, double R) {
  if (!(r > 0.0 && R > r)) throw std::invalid_argument("gradient_n_integral: need 0 < r < R");
  const double L = std::log(R / r);
  const int panels = std::max(1, static_cast<int>(std::ceil(L / std::log(1.5))));
  std::vector<double> breaks;
  for (int k = 1; k < panels; ++k) breaks.push_back(r * std::exp(L * k / panels));
  const QuadratureRule q = composite_gauss(r, R, R - r, 20, breaks);
  const double acc = q.integrate([&](double rho) { return std::pow(1.0 / (rho * L), n) * std::pow(rho, n - 1); });
  return sphere_volume(n - 1) * acc;
}

/// η_{r,R} on S^n centered at the north pole, as a function of θ.
inline double eta_rR(double theta, double r, double R) { return log_cutoff(theta, r, R); }

inline RadialField cutoff_eta_rR_sphere(const GridPtr& grid, double r, double R) {
  if (!(r > 0.0 && R > r && R < std::numbers::pi)) throw std::invalid_argument("cutoff_eta_rR_sphere: need 0 < r < R < pi");
  RadialField f{grid, {}};
  for (double th : grid->theta()) f.values.push_back(eta_rR(th, r, R));
  return f;
}

/// ∫_{S^n} |∇η_{r,R}|^n dV_ḡ.
inline double sphere_cutoff_gradient_integral(Dimension n, double r, double R) {
  if (!(r > 0.0 && R > r && R < std::numbers::pi)) throw std::invalid_argument("cutoff: need 0 < r < R < pi");
  const double L = std::log(R / r);
  const int panels = std::max(1, static_cast<int>(std::ceil(L / std::log(1.5))));
  std::vector<double> breaks;
  for (int k = 1; k < panels; ++k) breaks.push_back(r * std::exp(L * k / panels));
  const QuadratureRule q = composite_gauss(r, R, R - r, 20, breaks);
  const double acc =
      q.integrate([&](double th) { return std::pow(1.0 / (th * L), n) * std::pow(std::sin(th), n - 1); });
  return sphere_volume(n - 1) * acc;
}

namespace detail {

/// σ_{n−1} ∫ F(s) W^n ds over s ∈ [a, b] ∩ (window of the volume density).
inline double volume_integral(const ConformalFactor& u, const std::function<double(double)>& F, double a, double b,
                              std::vector<double> breaks = {}) {
  const int n = u.n();
  const auto [lo, hi] = cylinder::find_window([&](double s) { return n * u.log_W(s); });
  const double A = std::max(a, lo), B = std::min(b, hi);
  if (!(B > A)) return 0.0;
  const QuadratureRule q = composite_gauss(A, B, 0.25, 16, std::move(breaks));
  return sphere_volume(n - 1) * q.integrate([&](double s) { return F(s) * std::exp(n * u.log_W(s)); });
}

}  // namespace detail

/// V_{g_u}(B(north pole, r)) for the background geodesic ball.
inline double ball_volume(const ConformalFactor& u, double r) {
  if (!(r > 0.0)) return 0.0;
  if (r >= std::numbers::pi) return volume(u);
  return detail::volume_integral(u, [](double) { return 1.0; }, -1e300, cylinder::s_of_theta(r));
}

/// α_{r,R} = ∫ η_{r,R} dV_{g_u}.
inline double alpha_rR(const ConformalFactor& u, double r, double R) {
  if (!(r > 0.0 && R > r && R < std::numbers::pi)) throw std::invalid_argument("alpha_rR: need 0 < r < R < pi");
  const double sr = cylinder::s_of_theta(r), sR = cylinder::s_of_theta(R);
  return detail::volume_integral(
      u, [&](double s) { return eta_rR(cylinder::theta_of_s(s), r, R); }, -1e300, sR, {sr});
}

struct VolumeInequalityRecord {
  double r, R;
  double v_r, v_R;
  double lhs;
  double normalized_ratio;
  /// σ_n^{3−2/n} σ_{n−1}^{2/n} / λ, with λ the verified λ₁ or else n + 1/Λ.
  double bound;
  bool within_bound;
  bool volume_normalized;
  /// Set when λ₁ was supplied; then records whether λ₁ ≥ n + 1/Λ.
  std::optional<bool> gap_holds;
};

/// V(B_r)² (σ_n − V(B_R)) and its product with (log(R/r))^{2(n−1)/n}.
inline VolumeInequalityRecord volume_inequality_probe(const ConformalFactor& u, double r, double R, double Lambda,
                                                      std::optional<double> lambda1 = {}) {
  if (!(r > 0.0 && R > r && R < std::numbers::pi)) throw std::invalid_argument("volume_inequality_probe: need 0 < r < R < pi");
  if (!(Lambda > 0.0)) throw std::invalid_argument("volume_inequality_probe: Lambda must be positive");
  const int n = u.n();
  const double sn = sphere_volume(n);
  VolumeInequalityRecord rec{};
  rec.r = r;
  rec.R = R;
  rec.v_r = ball_volume(u, r);
  rec.v_R = ball_volume(u, R);
  rec.lhs = rec.v_r * rec.v_r * (sn - rec.v_R);
  rec.normalized_ratio = rec.lhs * std::pow(std::log(R / r), 2.0 * (n - 1) / n);
  const double lam = lambda1 ? *lambda1 : n + 1.0 / Lambda;
  rec.bound = std::pow(sn, 3.0 - 2.0 / n) * std::pow(sphere_volume(n - 1), 2.0 / n) / lam;
  rec.within_bound = rec.normalized_ratio <= rec.bound;
  rec.volume_normalized = std::abs(volume(u) - sn) <= 1e-8 * sn;
  if (lambda1) rec.gap_holds = *lambda1 >= n + 1.0 / Lambda;
  return rec;
}

}  // namespace qcl
