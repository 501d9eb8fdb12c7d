// Command-line front end for the Q-curvature lab.
//
//   qcl_cli [--n N] [--K K] [--lmax L] [--out DIR] [--format csv,json,svg] [--config FILE] <command> [args]
//
// Exit codes: 0 pass, 1 invariant failure, 2 configuration error.

#include <CLI11.hpp>

#include <iostream>

#include "qcl/cli/commands.hpp"

using namespace qcl::cli;

int main(int argc, char** argv) {
  CLI::App app{"Q-curvature and Paneitz operator lab on the round sphere"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> n, K, lmax;
  std::optional<std::string> out, format;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--n", n, "dimension (>= 5)");
  app.add_option("--K", K, "spectral truncation (>= 8)");
  app.add_option("--lmax", lmax, "highest harmonic sector");
  app.add_option("--out", out, "output directory");
  app.add_option("--format", format, "comma-separated subset of csv,json,svg");

  Hooks hooks;
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_flag("--perturb-bn", hooks.perturb_b_n)->group("");

  std::string u_spec = "round";
  auto* lambda1 = app.add_subcommand("lambda1", "first eigenvalue of the Laplacian of g_u");
  lambda1->add_option("u", u_spec, "round | bubble:t | counterexample:eps | dumbbell:a | file:path");

  double p = 1.3;
  std::vector<double> eps{0.9, 0.99, 0.999, 0.9999};
  auto* cex = app.add_subcommand("counterexample", "L^p norm of Q along u_eps = 1 - eps cos(theta)");
  cex->add_option("--p", p, "Lebesgue exponent");
  cex->add_option("--eps", eps, "increasing epsilon values in [0, 1)")->delimiter(',');

  std::vector<std::string> vi_u{"round", "bubble:4"};
  std::vector<double> vi_r{0.05, 0.1, 0.2}, vi_R{0.5, 1.0, 2.0, 3.0};
  double Lambda = 10.0;
  auto* vi = app.add_subcommand("volume-inequality", "volume concentration probe over an (r, R) sweep");
  vi->add_option("--u", vi_u, "u-specs")->delimiter(',');
  vi->add_option("--r", vi_r, "inner radii")->delimiter(',');
  vi->add_option("--R", vi_R, "outer radii (< pi)")->delimiter(',');
  vi->add_option("--Lambda", Lambda, "class parameter");

  std::string weight = "round";
  auto* hersch = app.add_subcommand("hersch", "balanced first-eigenvalue bound");
  hersch->add_option("--weight", weight, "u-spec or 'corpus'");

  std::vector<double> bl_t{4.0, 16.0, 64.0}, bl_R{1.0, 10.0, 100.0};
  std::string family = "bubble";
  auto* blowup = app.add_subcommand("blowup", "rescaling and volume capture along a bubble family");
  blowup->add_option("--family", family, "family (bubble)");
  blowup->add_option("--t", bl_t, "bubble parameters")->delimiter(',');
  blowup->add_option("--R", bl_R, "rescaled radii")->delimiter(',');

  int points = 200;
  auto* greens = app.add_subcommand("greens", "Green's function of P and the coercivity constant");
  greens->add_option("--points", points, "number of theta samples in [0.1, pi]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    RunConfig c;
    if (!config_path.empty()) apply_config_file(c, config_path);
    if (n) c.n = *n;
    if (K) c.K = *K;
    if (lmax) c.l_max = *lmax;
    if (out) c.out_dir = *out;
    if (format) c.formats = split(*format, ',');
    validate(c);

    Envelope env;
    if (*verify) env = cmd_verify(c, hooks);
    else if (*lambda1) env = cmd_lambda1(c, u_spec);
    else if (*cex) env = cmd_counterexample(c, p, eps);
    else if (*vi) env = cmd_volume_inequality(c, vi_u, vi_r, vi_R, Lambda);
    else if (*hersch) env = cmd_hersch(c, weight);
    else if (*blowup) {
      if (family != "bubble") throw ConfigError("blowup: unknown family '" + family + "'");
      env = cmd_blowup(c, bl_t, bl_R);
    } else if (*greens) {
      if (points < 2) throw ConfigError("greens: need at least two points");
      env = cmd_greens(c, points);
    }
    for (const std::string& f : write_outputs(env)) std::cerr << "wrote " << f << "\n";
    std::cout << env.command << ": " << env.status << "\n";
    return env.status == "pass" ? kPass : kInvariantFailure;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariantFailure;
  }
}
