#pragma once

/// @file commands.hpp
/// @brief Subcommands of qcl_cli as library functions returning envelopes.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qcl/blowup.hpp"
#include "qcl/cli/config.hpp"
#include "qcl/cli/output.hpp"
#include "qcl/conformal.hpp"
#include "qcl/counterexample.hpp"
#include "qcl/hersch.hpp"
#include "qcl/paneitz.hpp"
#include "qcl/spectrum.hpp"

namespace qcl::cli {

/// Process exit codes.
enum ExitCode : int { kPass = 0, kInvariantFailure = 1, kConfigError = 2 };

/// Hidden test hooks.
struct Hooks {
  /// Adds 1e-3 to b_n inside `verify`.
  bool perturb_b_n = false;
};

namespace detail {

inline double real_arg(const std::string& spec, const std::string& v) {
  try {
    return parse_real(spec, v);
  } catch (const ConfigError&) {
    throw ConfigError("u-spec '" + spec + "': bad numeric parameter");
  }
}

/// Least-squares zonal fit to "x value" samples read from a file.
inline ConformalFactor factor_from_file(const GridPtr& g, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("u-spec file: cannot open '" + path + "'");
  std::vector<double> xs, vs;
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    double x, v;
    if (!(in >> x)) continue;
    if (!(in >> v) || std::abs(x) > 1.0) throw ConfigError("u-spec file: expected lines 'cos_theta value' with |cos_theta| <= 1");
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.size() < 2) throw ConfigError("u-spec file: need at least two samples");
  const int deg = std::min<int>(g->truncation(), static_cast<int>(xs.size()) - 1);
  Eigen::MatrixXd A(xs.size(), deg + 1);
  Eigen::VectorXd b(xs.size());
  std::vector<double> basis;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    g->recurrence().evaluate_all(xs[i], basis, deg);
    for (int k = 0; k <= deg; ++k) A(static_cast<Eigen::Index>(i), k) = basis[k];
    b(static_cast<Eigen::Index>(i)) = vs[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  ZonalCoeffs z{g, std::vector<double>(static_cast<std::size_t>(g->truncation()) + 1, 0.0)};
  for (int k = 0; k <= deg; ++k) z.coeffs[k] = c(k);
  try {
    return ConformalFactor(g, to_profile(z));
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("u-spec file: ") + e.what());
  }
}

}  // namespace detail

/// round | bubble:t | counterexample:eps | dumbbell:a | file:path
inline ConformalFactor parse_u_spec(const GridPtr& g, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "round" && arg.empty()) return round_factor(g);
  if (kind == "bubble") {
    const double t = detail::real_arg(spec, arg);
    if (!(t > 0.0)) throw ConfigError("u-spec '" + spec + "': t must be positive");
    return moebius_factor(g, t);
  }
  if (kind == "counterexample") {
    const double eps = detail::real_arg(spec, arg);
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("u-spec '" + spec + "': epsilon must lie in [0, 1)");
    return u_eps(g, eps);
  }
  if (kind == "dumbbell") {
    const double a = detail::real_arg(spec, arg);
    if (!(a >= 0.0)) throw ConfigError("u-spec '" + spec + "': a must be nonnegative");
    return normalize_volume(ConformalFactor(g, [a](const Jet4& x) { return 1.0 + a * exp(-10.0 * (1.0 - x * x)); }));
  }
  if (kind == "file" && !arg.empty()) return detail::factor_from_file(g, arg);
  throw ConfigError("unknown u-spec '" + spec + "' (round, bubble:t, counterexample:eps, dumbbell:a, file:path)");
}

namespace detail {

inline Envelope start(const std::string& command, const RunConfig& c) {
  validate(c);
  Envelope e;
  e.command = command;
  e.config = c;
  return e;
}

inline void finish(Envelope& e, std::chrono::steady_clock::time_point t0, bool ok) {
  e.status = ok ? "pass" : "fail";
  e.utc = utc_now();
  e.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
  return s;
}

}  // namespace detail

/// Invariant suite: spectral identities, covariance, eigenvalues, cutoff and
/// transfer identities, coercivity.
inline Envelope cmd_verify(const RunConfig& c, Hooks hooks = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Envelope e = detail::start("verify", c);
  const int n = c.n;
  const Dimension dim(n);
  const GridPtr g = make_grid(dim, c.K);
  PaneitzConstants pc = paneitz_constants(dim);
  if (hooks.perturb_b_n) pc.b_n += 1e-3;

  Table t{"checks", {{"residual", ""}, {"tolerance", ""}, {"passed", "bool"}}, {}, {}};
  bool ok = true;
  auto check = [&](const std::string& op, const std::string& label, double residual, double tol) {
    const bool pass = residual <= tol;
    ok = ok && pass;
    t.add(op, label, {residual, tol, pass ? 1.0 : 0.0});
  };

  // P(1) = b_n and P(cos θ) = c_n cos θ; b_n is compared with (n−4)/2 · Q_round.
  const double b_ref = 0.5 * (n - 4) * n * (n * n - 4.0) / 8.0;
  {
    const RadialField p1 = synthesize(paneitz_apply(analyze(sample(g, profiles::constant(1.0))), pc));
    double r = 0.0;
    for (double v : p1.values) r = std::max(r, std::abs(v - b_ref) / b_ref);
    check("paneitz_apply", "P(1) = b_n", r, c.tol_identity);
    const RadialField pcos = synthesize(paneitz_apply(analyze(sample(g, profiles::cos_theta())), pc));
    const double c_ref = n * n + n * pc.a_n + b_ref;
    r = 0.0;
    for (int j = 0; j < g->size(); ++j) r = std::max(r, std::abs(pcos.values[j] - c_ref * g->x()[j]) / c_ref);
    check("paneitz_apply", "P(cos) = c_n cos", r, c.tol_identity);
  }
  {
    const RadialField q = q_curvature(round_factor(g));
    const double qr = n * (n * n - 4.0) / 8.0;
    double r = 0.0;
    for (double v : q.values) r = std::max(r, std::abs(v - qr) / qr);
    check("q_curvature", "Q(round) = n(n^2-4)/8", r, 1e-10);
  }
  {
    const std::vector<std::pair<std::string, Profile>> phis{
        {"1", profiles::constant(1.0)}, {"cos", profiles::cos_theta()}, {"Z3", zonal_harmonic(g, 3)}};
    for (double tt : {2.0, 5.0, 20.0}) {
      for (const auto& [name, phi] : phis) {
        check("moebius_covariance_residual", "t=" + format_real(tt) + " phi=" + name, moebius_covariance_residual(g, tt, phi),
              c.tol_covariance);
      }
    }
  }
  {
    const SpectralReport r = lambda1_sphere(round_factor(g), c.l_max);
    check("lambda1_sphere", "round", std::abs(r.lambda1 - n), c.tol_eigen);
    const SpectralReport rb = lambda1_sphere(moebius_factor(g, 10.0), c.l_max);
    check("lambda1_sphere", "bubble t=10", std::abs(rb.lambda1 - n), 1e-6);
  }
  for (const auto& [r, R] : std::vector<std::pair<double, double>>{{1.0, std::numbers::e}, {1.0, std::exp(2.0)}, {0.5, 50.0}}) {
    const double ref = cutoff_gradient_closed_form(dim, r, R);
    check("gradient_n_integral", "r=" + format_real(r) + " R=" + format_real(R), std::abs(gradient_n_integral(dim, r, R) - ref) / ref,
          c.tol_cutoff);
  }
  for (double tt : {4.0, 16.0}) {
    const ConformalFactor u = moebius_factor(g, tt);
    for (double r : {0.5, 1.0}) {
      check("transfer_check", "t=" + format_real(tt) + " r=" + format_real(r) + " f=1", transfer_check(u, profiles::constant(1.0), r).residual,
            c.tol_transfer);
      check("transfer_check", "t=" + format_real(tt) + " r=" + format_real(r) + " f=cos",
            transfer_check(u, profiles::cos_theta(), r).residual, c.tol_transfer);
    }
  }
  check("coercivity_constant", "min_k m_k = b_n", std::abs(coercivity_constant(dim, c.K) - pc.b_n) / b_ref, c.tol_identity);

  e.tables.push_back(std::move(t));
  detail::finish(e, t0, ok);
  return e;
}

inline Envelope cmd_lambda1(const RunConfig& c, const std::string& u_spec) {
  const auto t0 = std::chrono::steady_clock::now();
  Envelope e = detail::start("lambda1", c);
  const GridPtr g = make_grid(Dimension(c.n), c.K);
  const ConformalFactor u = parse_u_spec(g, u_spec);
  e.parameters.emplace_back("u", u_spec);
  const SpectralReport r = lambda1_sphere(u, c.l_max);
  for (const std::string& w : r.warnings) e.parameters.emplace_back("warning", w);
  Table s{"spectrum",
          {{"lambda1", ""}, {"sector", ""}, {"multiplicity", ""}, {"refinement_delta", ""}, {"basis_size", ""},
           {"mass_condition", ""}, {"l_max", ""}},
          {},
          {}};
  s.add("lambda1_sphere", u_spec,
        {r.lambda1, static_cast<double>(r.sector), static_cast<double>(r.multiplicity), r.refinement_delta,
         static_cast<double>(r.basis_size), r.mass_condition, static_cast<double>(r.l_max)});
  Table m{"sectors", {{"l", ""}, {"sector_minimum", ""}}, {}, {}};
  for (std::size_t l = 0; l < r.sector_minima.size(); ++l) m.add("lambda1_sphere", u_spec, {static_cast<double>(l), r.sector_minima[l]});
  Table p{"profile", {{"theta", "rad"}, {"eigenfunction", ""}}, {}, Chart{0, {1}, false}};
  for (std::size_t i = 0; i < r.profile.size(); ++i) p.add("lambda1_sphere", u_spec, {r.profile_abscissa[i], r.profile[i]});
  e.tables = {std::move(s), std::move(m), std::move(p)};
  detail::finish(e, t0, true);
  return e;
}

inline Envelope cmd_counterexample(const RunConfig& c, double p, const std::vector<double>& eps_list) {
  const auto t0 = std::chrono::steady_clock::now();
  Envelope e = detail::start("counterexample", c);
  const Dimension dim(c.n);
  if (!(p >= 1.0)) throw ConfigError("counterexample: p must be at least 1");
  for (double eps : eps_list)
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("counterexample: epsilon values must lie in [0, 1)");
  e.parameters.emplace_back("p", format_real(p));
  e.parameters.emplace_back("eps", detail::join(eps_list));
  const auto [lo, hi] = admissible_p_window(dim);
  Table w{"window", {{"p_min", ""}, {"p_max", ""}, {"p", ""}, {"inside", "bool"}, {"volume_bound", ""}}, {}, {}};
  w.add("admissible_p_window", "", {lo, hi, p, (p > lo && p < hi) ? 1.0 : 0.0, counterexample_volume_bound(dim)});
  Table t{"sweep",
          {{"eps", ""}, {"volume", ""}, {"min_u", ""}, {"lp_norm_q", ""}, {"sup_q", ""}},
          {},
          Chart{0, {3}, true}};
  for (const SweepRow& r : sweep(dim, p, eps_list)) t.add("sweep", "", {r.eps, r.volume, r.min_u, r.lp_norm_q, r.sup_q});
  double limit = std::numeric_limits<double>::quiet_NaN();
  try {
    limit = lp_norm_limit(dim, p);
  } catch (const QuadratureError& err) {
    e.parameters.emplace_back("limit", err.what());
  }
  const double vol1 = qcl::detail::cylinder_integral(c.n, 1.0, kSweepWindow, 0.25, [n = c.n](double u) { return std::pow(u, 2.0 * n / (n - 4)); });
  t.add("lp_norm_limit", "eps=1", {1.0, vol1, 0.0, limit, std::numeric_limits<double>::infinity()});
  e.tables = {std::move(w), std::move(t)};
  detail::finish(e, t0, true);
  return e;
}

inline Envelope cmd_volume_inequality(const RunConfig& c, const std::vector<std::string>& u_specs, const std::vector<double>& rs,
                                      const std::vector<double>& Rs, double Lambda) {
  const auto t0 = std::chrono::steady_clock::now();
  Envelope e = detail::start("volume-inequality", c);
  if (!(Lambda > 0.0)) throw ConfigError("volume-inequality: Lambda must be positive");
  const GridPtr g = make_grid(Dimension(c.n), c.K);
  e.parameters.emplace_back("Lambda", format_real(Lambda));
  e.parameters.emplace_back("r", detail::join(rs));
  e.parameters.emplace_back("R", detail::join(Rs));
  Table t{"probe",
          {{"r", "rad"}, {"R", "rad"}, {"v_r", ""}, {"v_R", ""}, {"lhs", ""}, {"normalized_ratio", ""}, {"bound", ""}, {"within_bound", "bool"}},
          {},
          {}};
  Table s{"summary", {{"max_normalized_ratio", ""}, {"bound", ""}, {"lambda1", ""}}, {}, {}};
  bool ok = true;
  for (const std::string& spec : u_specs) {
    const ConformalFactor u = normalize_volume(parse_u_spec(g, spec));
    const double lam = lambda1_sphere(u, c.l_max).lambda1;
    double top = 0.0, bound = 0.0;
    for (double r : rs) {
      for (double R : Rs) {
        if (!(R > r)) continue;
        const VolumeInequalityRecord rec = volume_inequality_probe(u, r, R, Lambda, lam);
        t.add("volume_inequality_probe", spec, {r, R, rec.v_r, rec.v_R, rec.lhs, rec.normalized_ratio, rec.bound, rec.within_bound ? 1.0 : 0.0});
        top = std::max(top, rec.normalized_ratio);
        bound = rec.bound;
        ok = ok && rec.within_bound;
      }
    }
    s.add("volume_inequality_probe", spec, {top, bound, lam});
  }
  e.tables = {std::move(t), std::move(s)};
  detail::finish(e, t0, ok);
  return e;
}

/// Normalized radial weights for the Hersch check: round, bubbles, u_ε-derived,
/// dumbbell and smooth perturbations.
inline std::vector<std::pair<std::string, ConformalFactor>> hersch_corpus(const GridPtr& g) {
  std::vector<std::pair<std::string, ConformalFactor>> c;
  c.emplace_back("round", round_factor(g));
  for (double t : {2.0, 10.0, 50.0}) c.emplace_back("bubble:" + format_real(t), moebius_factor(g, t));
  for (double eps : {0.3, 0.6, 0.9}) c.emplace_back("counterexample:" + format_real(eps), normalize_volume(u_eps(g, eps)));
  c.emplace_back("dumbbell:9", parse_u_spec(g, "dumbbell:9"));
  c.emplace_back("1+0.3x+0.2x^2", normalize_volume(ConformalFactor(g, [](const Jet4& x) { return 1.0 + 0.3 * x + 0.2 * x * x; })));
  c.emplace_back("2+0.5x exp(-3x^2)", normalize_volume(ConformalFactor(g, [](const Jet4& x) { return 2.0 + 0.5 * exp(-3.0 * x * x) * x; })));
  return c;
}

inline Envelope cmd_hersch(const RunConfig& c, const std::string& weight) {
  const auto t0 = std::chrono::steady_clock::now();
  Envelope e = detail::start("hersch", c);
  const GridPtr g = make_grid(Dimension(c.n), c.K);
  e.parameters.emplace_back("weight", weight);
  std::vector<std::pair<std::string, ConformalFactor>> ws;
  if (weight == "corpus") ws = hersch_corpus(g);
  else ws.emplace_back(weight, normalize_volume(parse_u_spec(g, weight)));
  Table t{"hersch",
          {{"t_star", ""}, {"com_residual", ""}, {"lambda1", ""}, {"hersch_quotient", ""}, {"log_ratio", ""}, {"cutoff_bound", ""},
           {"bound_satisfied", "bool"}, {"quotient_satisfied", "bool"}},
          {},
          {}};
  bool ok = true;
  for (const auto& [name, u] : ws) {
    const HerschRecord r = hersch_bound_check(u, std::min(c.l_max, 4));
    t.add("hersch_bound_check", name,
          {r.t_star, r.com_residual, r.lambda1, r.hersch_quotient, r.log_ratio, r.cutoff_bound, r.bound_satisfied ? 1.0 : 0.0,
           r.quotient_satisfied ? 1.0 : 0.0});
    ok = ok && r.bound_satisfied && r.com_residual <= 1e-10;
  }
  e.tables.push_back(std::move(t));
  detail::finish(e, t0, ok);
  return e;
}

inline Envelope cmd_blowup(const RunConfig& c, const std::vector<double>& ts, const std::vector<double>& Rs) {
  const auto t0 = std::chrono::steady_clock::now();
  Envelope e = detail::start("blowup", c);
  const GridPtr g = make_grid(Dimension(c.n), c.K);
  e.parameters.emplace_back("family", "bubble");
  e.parameters.emplace_back("t", detail::join(ts));
  e.parameters.emplace_back("R", detail::join(Rs));
  std::vector<ConformalFactor> fam;
  for (double t : ts) {
    if (!(t >= 1.0)) throw ConfigError("blowup: bubble parameters must be at least 1");
    fam.push_back(moebius_factor(g, t));
  }
  const VolumeCaptureTable vc = volume_capture(fam, Rs);
  const double sn = sphere_volume(c.n);
  Table t{"capture", {{"t", ""}, {"mu", ""}, {"R", ""}, {"captured_volume", ""}, {"fraction_of_sigma_n", ""}, {"clamped", "bool"}}, {}, {}};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t j = 0; j < Rs.size(); ++j) {
      t.add("volume_capture", "bubble", {ts[k], vc.mu[k], Rs[j], vc.entries[k][j], vc.entries[k][j] / sn, vc.clamped[k][j] ? 1.0 : 0.0});
    }
  }
  Table tr{"transfer", {{"t", ""}, {"r", ""}, {"lhs", ""}, {"rhs", ""}, {"residual", ""}}, {}, {}};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (double r : {0.5, 1.0}) {
      const TransferRecord rec = transfer_check(fam[k], profiles::cos_theta(), r);
      tr.add("transfer_check", "f=cos", {ts[k], r, rec.lhs, rec.rhs, rec.residual});
    }
  }
  e.tables = {std::move(t), std::move(tr)};
  detail::finish(e, t0, true);
  return e;
}

/// Green's function of P on a θ-grid in [0.1, π], with partial sums at K and 2K.
inline Envelope cmd_greens(const RunConfig& c, int points = 200) {
  const auto t0 = std::chrono::steady_clock::now();
  Envelope e = detail::start("greens", c);
  const Dimension dim(c.n);
  Table t{"green",
          {{"theta", "rad"}, {"value", ""}, {"partial_K", ""}, {"partial_2K", ""}, {"partial_drift", ""}, {"value_drift", ""}},
          {},
          Chart{0, {1, 2}, true}};
  bool ok = true;
  for (int i = 0; i < points; ++i) {
    const double th = 0.1 + (std::numbers::pi - 0.1) * i / (points - 1);
    const GreenValue a = green_paneitz(dim, th, c.K);
    const GreenValue b = green_paneitz(dim, th, 2 * c.K);
    t.add("green_paneitz", "", {th, a.value, a.truncated, b.truncated, std::abs(b.truncated - a.truncated), std::abs(b.value - a.value)});
    ok = ok && a.value > 0.0 && std::abs(b.value - a.value) <= 1e-6 * a.value;
  }
  Table k{"coercivity", {{"coercivity_constant", ""}, {"b_n", ""}}, {}, {}};
  k.add("coercivity_constant", "", {coercivity_constant(dim, c.K), paneitz_constants(dim).b_n});
  e.tables = {std::move(t), std::move(k)};
  detail::finish(e, t0, ok);
  return e;
}

}  // namespace qcl::cli
