#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "qcl/cli/commands.hpp"

using namespace qcl;
using namespace qcl::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qcl_cli_format_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QCL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Doubles from every regime: ordinary, subnormal, huge, signed zero, non-finite.
double random_real(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  switch (kind(rng)) {
    case 0: return std::numeric_limits<double>::quiet_NaN();
    case 1: return unit(rng) < 0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    case 2: return unit(rng) * std::numeric_limits<double>::denorm_min() * 1e5;
    case 3: return -0.0;
    case 4: return std::nextafter(1.0, 2.0);
    default: return std::ldexp(unit(rng), expo(rng));
  }
}

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> atoms{"a", "Z", "0", ",", "\"", " ", "\n", "θ", "σ_n", "=", "\\", "{"};
  std::uniform_int_distribution<std::size_t> len(0, 8), pick(0, atoms.size() - 1);
  std::string s;
  for (std::size_t i = len(rng); i > 0; --i) s += atoms[pick(rng)];
  return s;
}

Envelope random_envelope(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(0, 4);
  Envelope e;
  e.command = random_text(rng);
  e.config.n = 5 + small(rng);
  e.config.K = 8 << small(rng);
  e.config.tol_covariance = std::ldexp(1.0, -small(rng) - 20);
  e.config.out_dir = random_text(rng);
  e.config.formats = {"json", "csv"};
  for (int i = small(rng); i > 0; --i) e.parameters.emplace_back(random_text(rng), random_text(rng));
  e.status = small(rng) % 2 ? "pass" : "fail";
  for (int i = small(rng); i > 0; --i) {
    Table t;
    t.name = random_text(rng);
    const int ncol = 1 + small(rng);
    for (int c = 0; c < ncol; ++c) t.columns.push_back({random_text(rng), random_text(rng)});
    for (int r = small(rng) * 3; r > 0; --r) {
      std::vector<double> v;
      for (int c = 0; c < ncol; ++c) v.push_back(random_real(rng));
      t.add(random_text(rng), random_text(rng), v);
    }
    if (small(rng) % 2) t.chart = Chart{0, {ncol - 1}, small(rng) % 2 == 0};
    e.tables.push_back(std::move(t));
  }
  e.utc = random_text(rng);
  e.wall_time_s = std::ldexp(std::abs(std::uniform_real_distribution<double>(0.0, 1.0)(rng)), small(rng) * 4);
  return e;
}

}  // namespace

TEST(Csv, HeaderNamesOperationCaseAndUnits) {
  Table t{"x", {{"theta", "rad"}, {"value", ""}}, {}, {}};
  t.add("green_paneitz", "a,b", {0.5, 1.0 / 3.0});
  t.add("green_paneitz", "say \"hi\"", {std::numeric_limits<double>::quiet_NaN(), -std::numeric_limits<double>::infinity()});
  EXPECT_EQ(to_csv(t),
            "operation,case,theta [rad],value\n"
            "green_paneitz,\"a,b\",0.5,0.33333333333333331\n"
            "green_paneitz,\"say \"\"hi\"\"\",nan,-inf\n");
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double v = random_real(rng);
    const std::string s = format_real(v);
    EXPECT_EQ(s.find(','), std::string::npos);
    if (std::isnan(v)) {
      EXPECT_EQ(s, "nan");
      continue;
    }
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
    EXPECT_EQ(std::signbit(std::strtod(s.c_str(), nullptr)), std::signbit(v)) << s;
  }
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(13.125), "13.125");
}

TEST(Csv, EveryCommandTableHasOperationColumn) {
  RunConfig c;
  c.K = 32;
  for (const Envelope& e : {cmd_lambda1(c, "round"), cmd_counterexample(c, 1.3, {0.9, 0.99}), cmd_greens(c, 5)}) {
    for (const Table& t : e.tables) {
      const std::string csv = to_csv(t);
      EXPECT_EQ(csv.rfind("operation,case,", 0), 0u) << e.command << " " << t.name;
      EXPECT_EQ(csv.find('\r'), std::string::npos);
      EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(t.rows.size()) + 1);
    }
  }
}

TEST(Json, EnvelopeRoundTripProperty) {
  std::mt19937_64 rng(20);
  for (int i = 0; i < 300; ++i) {
    const Envelope e = random_envelope(rng);
    const std::string text = emit_json(e);
    const Envelope back = parse_json(text);
    ASSERT_EQ(back, e) << text;
    EXPECT_EQ(emit_json(back), text);
  }
}

TEST(Json, CommandEnvelopesRoundTrip) {
  RunConfig c;
  c.K = 32;
  const Envelope e = cmd_counterexample(c, 1.5, {0.9, 0.99});
  // Above the window the ε = 1 limit is reported as NaN and sup Q as +inf.
  EXPECT_TRUE(std::isnan(e.tables[1].rows.back().values[3]));
  EXPECT_EQ(parse_json(emit_json(e)), e);
}

TEST(Json, DeterministicViewDropsOnlyTimestamp) {
  RunConfig c;
  Envelope a = cmd_verify(c);
  Envelope b = cmd_verify(c);
  b.utc = "1970-01-01T00:00:00Z";
  b.wall_time_s = 1234.5;
  EXPECT_NE(emit_json(a), emit_json(b));
  EXPECT_EQ(deterministic_json(emit_json(a)), deterministic_json(emit_json(b)));
  b.tables[0].rows[0].values[0] = std::nextafter(b.tables[0].rows[0].values[0], 1.0);
  EXPECT_NE(deterministic_json(emit_json(a)), deterministic_json(emit_json(b)));
}

TEST(Config, ParsesKeyValueWithComments) {
  const auto kv = parse_config_text("# header\n n = 8  # trailing\n\nK=64\nformat = csv, json\n");
  EXPECT_EQ(kv.size(), 3u);
  RunConfig c;
  for (const auto& [k, v] : kv) apply_setting(c, k, v);
  EXPECT_EQ(c.n, 8);
  EXPECT_EQ(c.K, 64);
  EXPECT_EQ(c.formats, (std::vector<std::string>{"csv", "json"}));
  EXPECT_THROW(parse_config_text("n 5\n"), ConfigError);
  EXPECT_THROW(apply_setting(c, "bogus", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "K", "12x"), ConfigError);
}

TEST(Config, RejectsInvalidCombinations) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  for (auto mutate : std::vector<void (*)(RunConfig&)>{
           [](RunConfig& r) { r.K = 4; }, [](RunConfig& r) { r.n = 4; }, [](RunConfig& r) { r.l_max = 1; },
           [](RunConfig& r) { r.tol_eigen = 0.0; }, [](RunConfig& r) { r.formats = {"png"}; }, [](RunConfig& r) { r.formats = {}; }}) {
    RunConfig bad;
    mutate(bad);
    EXPECT_THROW(validate(bad), ConfigError);
    EXPECT_THROW(cmd_verify(bad), ConfigError);
  }
}

TEST(Config, PrecedenceDefaultsFileFlags) {
  const fs::path dir = scratch("precedence");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# file layer\nn = 6\nK = 16\nformat = json\nout = " << (dir / "from_file").string() << "\n";
  // File overrides defaults: n = 6 lands in the envelope.
  ASSERT_EQ(run_cli("--config " + cfg.string() + " greens --points 3"), 0);
  const Envelope f = parse_json(slurp(dir / "from_file" / "greens.json"));
  EXPECT_EQ(f.config.n, 6);
  EXPECT_EQ(f.config.K, 16);
  EXPECT_EQ(f.config.l_max, RunConfig{}.l_max);
  // Flags override the file.
  ASSERT_EQ(run_cli("--config " + cfg.string() + " --n 7 --out " + (dir / "from_flag").string() + " greens --points 3"), 0);
  const Envelope g = parse_json(slurp(dir / "from_flag" / "greens.json"));
  EXPECT_EQ(g.config.n, 7);
  EXPECT_EQ(g.config.K, 16);
  EXPECT_FALSE(fs::exists(dir / "from_flag" / "greens_green.csv"));
}

TEST(USpec, ParsesKnownFormsAndRejectsOthers) {
  auto g = make_grid(Dimension(5), 32);
  EXPECT_NEAR(volume(parse_u_spec(g, "dumbbell:9")), sphere_volume(5), 1e-10 * sphere_volume(5));
  EXPECT_DOUBLE_EQ(parse_u_spec(g, "counterexample:0.5")(1.0), 0.5);
  EXPECT_NEAR(parse_u_spec(g, "bubble:1")(0.3), 1.0, 1e-14);
  for (const char* bad : {"sphere", "bubble", "bubble:x", "bubble:-1", "counterexample:1", "round:2", "file:", "file:/nonexistent/u.txt"}) {
    EXPECT_THROW(parse_u_spec(g, bad), ConfigError) << bad;
  }
}

TEST(USpec, FileSamplesAreFittedExactly) {
  // Samples of 1 + 0.25 x^2 lie in the span of degrees ≤ 2, so the fit is exact.
  const fs::path p = scratch("uspec") / "u.txt";
  {
    std::ofstream f(p);
    f << "# cos_theta value\n";
    for (int i = 0; i <= 20; ++i) {
      const double x = -1.0 + 0.1 * i;
      f << format_real(x) << " " << format_real(1.0 + 0.25 * x * x) << "\n";
    }
  }
  auto g = make_grid(Dimension(5), 32);
  const ConformalFactor u = parse_u_spec(g, "file:" + p.string());
  for (double x : {-1.0, -0.37, 0.0, 0.8, 1.0}) EXPECT_NEAR(u(x), 1.0 + 0.25 * x * x, 1e-12) << x;
}

TEST(Svg, WellFormedLineChart) {
  RunConfig c;
  c.K = 32;
  const Envelope e = cmd_greens(c, 20);
  const std::string svg = to_svg(e.tables[0]);
  EXPECT_EQ(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '<'), std::count(svg.begin(), svg.end(), '>'));
  // One polyline per charted column.
  std::size_t lines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
  EXPECT_EQ(lines, e.tables[0].chart->y.size());
  Table no_chart{"t", {{"a", ""}}, {}, {}};
  EXPECT_THROW(to_svg(no_chart), std::logic_error);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  const std::string out = "--out " + dir.string() + " ";
  EXPECT_EQ(run_cli(out + "verify"), 0);
  EXPECT_EQ(run_cli(out + "--K 4 verify"), 2);
  EXPECT_EQ(run_cli(out + "verify --perturb-bn"), 1);
  EXPECT_EQ(run_cli(out + "lambda1 torus:3"), 2);
  EXPECT_EQ(run_cli(out + "--format png verify"), 2);
  EXPECT_EQ(run_cli(out + "--n five verify"), 2);
  EXPECT_EQ(run_cli(out), 2);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
  // The output directory is part of the config snapshot, so both runs share it.
  const fs::path d = scratch("det");
  const std::vector<std::string> files{"lambda1_spectrum.csv", "lambda1_profile.csv", "lambda1_profile.svg", "lambda1.json"};
  std::vector<std::string> first;
  ASSERT_EQ(run_cli("--K 32 --format csv,json,svg --out " + d.string() + " lambda1 bubble:3"), 0);
  for (const std::string& f : files) first.push_back(slurp(d / f));
  ASSERT_EQ(run_cli("--K 32 --format csv,json,svg --out " + d.string() + " lambda1 bubble:3"), 0);
  for (std::size_t i = 0; i + 1 < files.size(); ++i) EXPECT_EQ(first[i], slurp(d / files[i])) << files[i];
  EXPECT_EQ(deterministic_json(first.back()), deterministic_json(slurp(d / files.back())));
}
