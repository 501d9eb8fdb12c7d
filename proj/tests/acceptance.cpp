// Acceptance runner: one PASS/FAIL line per criterion, each with a wall-time budget.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "qcl/cli/commands.hpp"

using namespace qcl;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.ok) {
    o.ok = false;
    o.detail = what;
  }
}

std::string g17(double v) { return cli::format_real(v); }

double max_rel(const RadialField& f, const std::function<double(int)>& ref, double scale) {
  double r = 0.0;
  for (int j = 0; j < static_cast<int>(f.values.size()); ++j) r = std::max(r, std::abs(f.values[j] - ref(j)) / scale);
  return r;
}

Outcome spectral_identities() {
  Outcome o;
  double worst = 0.0;
  for (int n : {5, 6, 8, 12}) {
    auto g = make_grid(Dimension(n), 128);
    const PaneitzConstants pc = paneitz_constants(Dimension(n));
    const double c_n = n * n + n * pc.a_n + pc.b_n;
    const double r1 = max_rel(synthesize(paneitz_apply(analyze(sample(g, profiles::constant(1.0))))), [&](int) { return pc.b_n; }, pc.b_n);
    const double rc = max_rel(synthesize(paneitz_apply(analyze(sample(g, profiles::cos_theta())))), [&](int j) { return c_n * g->x()[j]; }, c_n);
    const double qr = n * (n * n - 4.0) / 8.0;
    const double rq = max_rel(q_curvature(round_factor(g)), [&](int) { return qr; }, 1.0);
    worst = std::max({worst, r1, rc});
    require(o, r1 <= 1e-12, "P(1) residual " + g17(r1) + " at n=" + std::to_string(n));
    require(o, rc <= 1e-12, "P(cos) residual " + g17(rc) + " at n=" + std::to_string(n));
    require(o, rq <= 1e-10, "Q(round) error " + g17(rq) + " at n=" + std::to_string(n));
  }
  require(o, std::abs(paneitz_constants(Dimension(5)).q_round() - 13.125) <= 1e-10, "Q(round S^5) != 13.125");
  if (o.ok) o.detail = "max relative residual " + g17(worst);
  return o;
}

Outcome covariance() {
  Outcome o;
  double worst = 0.0;
  for (int n : {5, 8}) {
    auto g = make_grid(Dimension(n), 128);
    for (double t : {2.0, 5.0, 20.0}) {
      for (const Profile& phi : {profiles::constant(1.0), profiles::cos_theta(), zonal_harmonic(g, 3)}) {
        const double r = moebius_covariance_residual(g, t, phi);
        worst = std::max(worst, r);
        require(o, r <= 1e-8, "residual " + g17(r) + " at n=" + std::to_string(n) + " t=" + g17(t));
      }
    }
  }
  if (o.ok) o.detail = "max residual " + g17(worst);
  return o;
}

Outcome eigenvalues() {
  Outcome o;
  auto g = make_grid(Dimension(5), 128);
  const double round = lambda1_sphere(round_factor(g)).lambda1;
  require(o, std::abs(round - 5.0) <= 1e-8, "round lambda1 = " + g17(round));
  double worst = 0.0;
  for (double t : {2.0, 10.0, 50.0}) {
    const double l = lambda1_sphere(moebius_factor(g, t)).lambda1;
    worst = std::max(worst, std::abs(l - 5.0));
    require(o, std::abs(l - 5.0) <= 1e-6, "bubble t=" + g17(t) + " lambda1 = " + g17(l));
  }
  const double dumb = lambda1_sphere(cli::parse_u_spec(g, "dumbbell:9")).lambda1;
  require(o, dumb < 5.0 - 0.1, "dumbbell lambda1 = " + g17(dumb));
  if (o.ok) o.detail = "round " + g17(round) + ", bubble max |l-5| " + g17(worst) + ", dumbbell " + g17(dumb);
  return o;
}

Outcome hersch() {
  Outcome o;
  auto g = make_grid(Dimension(5), 128);
  const auto corpus = cli::hersch_corpus(g);
  require(o, corpus.size() >= 10, "corpus has fewer than 10 weights");
  double top = 0.0, com = 0.0;
  for (const auto& [name, u] : corpus) {
    const HerschRecord r = hersch_bound_check(u);
    top = std::max(top, r.lambda1);
    com = std::max(com, r.com_residual);
    require(o, r.lambda1 <= 5.0 + 1e-3, name + ": balanced lambda1 = " + g17(r.lambda1));
    require(o, r.com_residual <= 1e-10, name + ": |CoM| = " + g17(r.com_residual));
    if (name == "round") require(o, std::abs(r.t_star - 1.0) <= 1e-10, "round t* = " + g17(r.t_star));
  }
  if (o.ok) o.detail = std::to_string(corpus.size()) + " weights, max lambda1 " + g17(top) + ", max |CoM| " + g17(com);
  return o;
}

Outcome cutoff() {
  Outcome o;
  double worst = 0.0;
  for (int n : {5, 8}) {
    for (const auto& [r, R] : std::vector<std::pair<double, double>>{{1.0, std::numbers::e}, {1.0, std::exp(2.0)}, {0.5, 50.0}}) {
      const double ref = sphere_volume(n - 1) * std::pow(std::log(R / r), 1.0 - n);
      const double rel = std::abs(gradient_n_integral(Dimension(n), r, R) - ref) / ref;
      worst = std::max(worst, rel);
      require(o, rel <= 1e-6, "n=" + std::to_string(n) + " (" + g17(r) + "," + g17(R) + ") rel " + g17(rel));
    }
  }
  if (o.ok) o.detail = "max relative error " + g17(worst);
  return o;
}

Outcome volume_inequality() {
  Outcome o;
  auto g = make_grid(Dimension(5), 128);
  const double Lambda = 10.0;
  double top = 0.0, bound = 0.0;
  for (const ConformalFactor& u : {round_factor(g), moebius_factor(g, 4.0)}) {
    const double lam = lambda1_sphere(u).lambda1;
    for (double r : {0.05, 0.1, 0.2}) {
      for (double R : {0.5, 1.0, 2.0, 3.0}) {
        const VolumeInequalityRecord rec = volume_inequality_probe(u, r, R, Lambda, lam);
        require(o, std::isfinite(rec.normalized_ratio), "non-finite ratio at r=" + g17(r) + " R=" + g17(R));
        require(o, rec.within_bound, "ratio " + g17(rec.normalized_ratio) + " exceeds " + g17(rec.bound));
        top = std::max(top, rec.normalized_ratio);
        bound = rec.bound;
      }
    }
  }
  require(o, top <= bound, "sweep maximum exceeds the common bound");
  if (o.ok) o.detail = "max normalized ratio " + g17(top) + " <= " + g17(bound);
  return o;
}

Outcome transfer_and_capture() {
  Outcome o;
  auto g = make_grid(Dimension(5), 128);
  double worst = 0.0;
  for (double t : {4.0, 16.0}) {
    const ConformalFactor u = moebius_factor(g, t);
    for (const Profile& f : {profiles::constant(1.0), profiles::cos_theta()}) {
      for (double r : {0.5, 1.0}) {
        const double res = transfer_check(u, f, r).residual;
        worst = std::max(worst, res);
        require(o, res <= 1e-8, "transfer residual " + g17(res) + " at t=" + g17(t) + " r=" + g17(r));
      }
    }
  }
  const std::vector<double> ts{4.0, 16.0, 64.0}, Rs{1.0, 10.0, 100.0};
  std::vector<ConformalFactor> fam;
  for (double t : ts) fam.push_back(moebius_factor(g, t));
  const VolumeCaptureTable vc = volume_capture(fam, Rs);
  const double s5 = std::pow(std::numbers::pi, 3);
  const double last = vc.entries[2][2];
  require(o, std::abs(last - s5) <= 0.02 * s5, "capture(t=64, R=100) = " + g17(last));
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t j = 0; j < Rs.size(); ++j) {
      if (j > 0) require(o, vc.entries[k][j] >= vc.entries[k][j - 1], "capture not monotone in R");
      if (k > 0) require(o, vc.entries[k][j] <= vc.entries[k - 1][j], "capture not monotone in t");
    }
  }
  if (o.ok) o.detail = "max transfer residual " + g17(worst) + ", capture(64,100)/sigma_5 = " + g17(last / s5);
  return o;
}

Outcome counterexample() {
  Outcome o;
  const std::vector<double> eps{0.9, 0.99, 0.999, 0.9999};
  std::string summary;
  for (const auto& [n, p_in, p_out] : std::vector<std::tuple<int, double, double>>{{5, 1.3, 1.5}, {8, 2.3, 3.0}}) {
    const Dimension dim(n);
    const auto in = sweep(dim, p_in, eps);
    const double limit = lp_norm_limit(dim, p_in);
    const double gap = std::abs(in.back().lp_norm_q - limit) / limit;
    require(o, std::isfinite(limit), "limit not finite at n=" + std::to_string(n));
    require(o, gap <= 0.01, "n=" + std::to_string(n) + " last/limit gap " + g17(gap));
    const auto out = sweep(dim, p_out, eps);
    const double growth = out.back().lp_norm_q / out.front().lp_norm_q;
    require(o, growth >= 10.0, "n=" + std::to_string(n) + " growth " + g17(growth));
    const double bound = counterexample_volume_bound(dim);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      require(o, in[i].min_u == 1.0 - eps[i], "min u != 1 - eps");
      require(o, in[i].volume >= bound, "volume below bound");
    }
    summary += (summary.empty() ? "" : "; ") + ("n=" + std::to_string(n) + " gap " + g17(gap) + " growth " + g17(growth));
  }
  if (o.ok) o.detail = summary;
  return o;
}

Outcome coercivity_and_green() {
  Outcome o;
  const double b5 = coercivity_constant(Dimension(5), 256);
  require(o, std::abs(b5 - 6.5625) <= 1e-12, "coercivity constant n=5 = " + g17(b5));
  for (int n : {6, 8}) {
    const double bn = paneitz_constants(Dimension(n)).b_n;
    const double c = coercivity_constant(Dimension(n), 256);
    require(o, std::abs(c - bn) <= 1e-12 * bn, "coercivity constant n=" + std::to_string(n) + " = " + g17(c));
  }
  // The value is the resummed series; the bare partial-sum drift is reported alongside.
  double drift = 0.0, partial_drift = 0.0, lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i) {
    const double th = 0.1 + (std::numbers::pi - 0.1) * i / 199.0;
    const GreenValue a = green_paneitz(Dimension(5), th, 256);
    const GreenValue b = green_paneitz(Dimension(5), th, 512);
    lo = std::min(lo, a.value);
    drift = std::max(drift, std::abs(b.value - a.value) / a.value);
    partial_drift = std::max(partial_drift, std::abs(b.truncated - a.truncated) / a.value);
  }
  require(o, lo > 0.0, "Green's function not positive, min " + g17(lo));
  require(o, drift <= 1e-6, "K to 2K drift " + g17(drift));
  if (o.ok) o.detail = "b_5 = " + g17(b5) + ", min G " + g17(lo) + ", drift " + g17(drift) + " (partial sums " + g17(partial_drift) + ")";
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "qcl_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::string runs[2];
  for (std::string& text : runs) {
    const std::string cmd = std::string(QCL_CLI_PATH) + " --format json --out " + dir.string() + " verify >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    require(o, WIFEXITED(status) && WEXITSTATUS(status) == 0, "verify did not exit 0");
    std::ifstream f(dir / "verify.json", std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  if (!o.ok) return o;
  require(o, !runs[0].empty(), "no envelope written");
  require(o, runs[0].find("\"timestamp\"") != std::string::npos, "envelope lacks timestamp");
  require(o, cli::deterministic_json(runs[0]) == cli::deterministic_json(runs[1]), "envelopes differ outside the timestamp");
  if (o.ok) o.detail = "identical modulo timestamp (" + std::to_string(runs[0].size()) + " bytes)";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1 sphere spectral identities", 1.0, spectral_identities},
      {"2 conformal covariance", 5.0, covariance},
      {"3 eigenvalue solver", 10.0, eigenvalues},
      {"4 Hersch bound", 30.0, hersch},
      {"5 cutoff identity", 1.0, cutoff},
      {"6 volume inequality", 5.0, volume_inequality},
      {"7 transfer identity and volume capture", 10.0, transfer_and_capture},
      {"8 counterexample", 30.0, counterexample},
      {"9 coercivity and Green positivity", 10.0, coercivity_and_green},
      {"10 end-to-end determinism", 60.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.ok && dt > c.budget_s) o = {false, "over budget (" + g17(c.budget_s) + " s)"};
    failed += o.ok ? 0 : 1;
    std::printf("%s criterion %s [%.2f s]: %s\n", o.ok ? "PASS" : "FAIL", c.name, dt, o.detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}
