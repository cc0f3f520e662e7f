#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "rwgd/cli/commands.hpp"
#include "rwgd/cli/config.hpp"
#include "rwgd/cli/csv.hpp"
#include "rwgd/cli/generators.hpp"
#include "rwgd/cli/svg.hpp"
#include "rwgd/errors.hpp"

using namespace rwgd;
using namespace rwgd::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path config_path(const std::string& name) { return fs::path(RWGD_SOURCE_DIR) / "configs" / (name + ".json"); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / ("rwgd_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliRun {
  int code = -1;
  std::string err;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CliRun run_cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt", out = dir / "stdout.txt";
  const std::string cmd = std::string(RWGD_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err), slurp(out)};
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

json load_json(const std::string& name) {
  std::ifstream in(config_path(name));
  return json::parse(in);
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Config, ShippedConfigsRoundTrip) {
  for (const char* name :
       {"simulate_identity", "simulate_categorical", "moments", "bounds", "figure1", "figure1_no_rescale", "figure2",
        "oracle_battery", "oracle_identity", "oracle_budget_violation"}) {
    const ExperimentConfig c = parse_config(load_json(name));
    const json once = to_json(c);
    const ExperimentConfig back = parse_config(once);
    EXPECT_EQ(back, c) << name;
    EXPECT_EQ(to_json(back), once) << name;
  }
}

TEST(Config, RoundTripKeepsEveryVariant) {
  ExperimentConfig c;
  c.dataset = InlineData{{{1.0, 0.1}, {0.3, -2.5e-17}}, {0.1, 1.0 / 3.0}};
  c.scheme = SchemeSpec{"continuous", {}, 1.0, "laplace", 0.7, 0.05, std::nullopt};
  c.schemes = {{"a", SchemeSpec{"bernoulli", {0.25, 0.5}, 1.0, "", 0.0, 1.0, std::nullopt}},
               {"b", SchemeSpec{"continuous", {}, 1.0, "uniform", 0.5, 1.5, 1.5}},
               {"c", SchemeSpec{"row_norm", {}, -1.0, "", 0.0, 1.0, std::nullopt}}};
  c.schedule = ScheduleSpec{"explicit", std::nullopt, std::nullopt, {0.1, 0.05}};
  c.K = 7;
  c.n_traj = 3;
  c.seed = 18446744073709551615ULL;
  c.enforce_assumptions = false;
  c.w1 = {0.5, -0.25};
  c.outputs = {"somewhere", false};
  c.panels = {{"p", NoiseMap{{0.1, 0.2}, std::nullopt, std::nullopt}}, {"q", NoiseMap{{}, 0.3, 0.4}}};
  OracleSpec o;
  o.instances.push_back({HeteroscedasticSpec{5, 2, 0.4, 2.0, 0.5, NoiseMap{{}, 1.0, 0.0}, {1.0, 2.0}, 9},
                         SchemeSpec{"fixed", {1, 2, 3, 4, 5}, 1.0, "", 0.0, 1.0, std::nullopt},
                         ScheduleSpec{"harmonic", std::nullopt, 0.3, {}},
                         3,
                         {}});
  o.instances.push_back(
      {DataFile{"data.csv"}, SchemeSpec{}, ScheduleSpec{"constant", 0.1, std::nullopt, {}}, 2, {0.0}});
  o.generated = OracleGenerated{4, 6, 2};
  o.tolerance = 1e-12;
  c.oracle = o;
  EXPECT_EQ(parse_config(json::parse(to_json(c).dump())), c);
}

TEST(Config, UnknownKeysAreRejected) {
  json j = load_json("simulate_identity");
  j["colour"] = "blue";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = load_json("simulate_identity");
  j["scheme"]["p"] = {0.5, 0.5};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = load_json("simulate_categorical");
  j["dataset"]["generator"]["noise_map"] = {1.0};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = load_json("oracle_battery");
  j["oracle"]["generated"]["max_n"] = 3;
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, MalformedValuesAreRejected) {
  json j = load_json("simulate_identity");
  j["K"] = "many";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = load_json("simulate_identity");
  j["schedule"] = {{"type", "constant"}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j["schedule"] = {{"type", "constant"}, {"alpha", 0.1}, {"alpha_fraction", 0.1}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = load_json("simulate_identity");
  j["n_traj"] = 0;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = load_json("simulate_identity");
  j["dataset"] = {{"file", "a.csv"}, {"inline", {{"x", {{1.0}}}, {"y", {1.0}}}}};
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, MissingFileNamesThePath) {
  try {
    load_config("/nonexistent/dir/config.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/config.json"), std::string::npos);
  }
}

TEST(Csv, NumbersRoundTripAndLinesEndWithLf) {
  const fs::path dir = scratch("csv");
  const std::vector<double> values{0.1, 1.0 / 3.0, -2.5e-300, 12.0, NAN};
  {
    CsvWriter w(dir / "t.csv", {"a", "b", "c", "d", "e"});
    w.row(values);
    EXPECT_THROW(w.row({1.0}), DimensionError);
  }
  EXPECT_EQ(slurp(dir / "t.csv"), "a,b,c,d,e\n0.1,0.3333333333333333,-2.5e-300,12,nan\n");
  const CsvTable t = read_csv(dir / "t.csv");
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(t.rows[0][i], values[i]);
  EXPECT_TRUE(std::isnan(t.rows[0][4]));
  EXPECT_EQ(t.column("c"), 2u);
}

TEST(Svg, SkipsPointsOffTheLogAxis) {
  Plot p{"t", "k", "y", false, true, {{"s", {1, 2, 3, 4}, {1.0, 0.0, 0.1, NAN}, false}}};
  const std::string svg = render_svg(p);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
  p.series[0].y = {1.0, 0.5, 0.25, 0.125};
  EXPECT_NE(render_svg(p).find("<polyline"), std::string::npos);
}

TEST(Generators, GaussianRescaledMarksTheRescaledRows) {
  GaussianRescaledSpec s{50, 4, 0.2, 5.0, 1.0, 0.0, 3};
  const GeneratedData g = generate_dataset(s);
  EXPECT_EQ(std::count(g.rescaled.begin(), g.rescaled.end(), true), 10);
  s.rescale_factor = 1.0;
  const GeneratedData plain = generate_dataset(s);
  for (Index i = 0; i < 50; ++i) {
    const double factor = g.rescaled[static_cast<std::size_t>(i)] ? 5.0 : 1.0;
    EXPECT_EQ(g.data.x.row(i), factor * plain.data.x.row(i));
  }
  EXPECT_LE((g.data.y - g.data.x * *g.data.w_star).norm(), 1e-12);
  EXPECT_THROW(generate_dataset(GaussianRescaledSpec{0, 4, 0.2, 5.0, 1.0, 0.0, 3}), ConfigError);
  EXPECT_THROW(generate_dataset(GaussianRescaledSpec{5, 4, 1.2, 5.0, 1.0, 0.0, 3}), ConfigError);
}

TEST(Generators, HeteroscedasticNoiseMaps) {
  HeteroscedasticSpec h{6, 2, 0.5, 2.0, 1.0, NoiseMap{{}, 0.1, 2.0}, {1.0, -1.0}, 4};
  const GeneratedData g = generate_dataset(h);
  for (Index i = 0; i < 6; ++i) {
    const double s = g.rescaled[static_cast<std::size_t>(i)] ? 0.1 : 2.0;
    EXPECT_EQ((*g.data.sigma_eps)(i, i), s * s);
  }
  EXPECT_EQ(*g.data.w_star, vec({1.0, -1.0}));
  EXPECT_THROW(generate_dataset(h, NoiseMap{{1.0, 2.0}, std::nullopt, std::nullopt}), ConfigError);
  EXPECT_THROW(generate_dataset(h, NoiseMap{{1, 1, 1, 1, 1, -1}, std::nullopt, std::nullopt}), ConfigError);
  const GeneratedData quiet = generate_dataset(h, NoiseMap{{}, 0.0, 0.0});
  EXPECT_LE((quiet.data.y - quiet.data.x * vec({1.0, -1.0})).norm(), 1e-14);
  EXPECT_EQ(quiet.data.x, g.data.x);
}

TEST(Generators, DataFile) {
  const fs::path dir = scratch("datafile");
  std::ofstream(dir / "d.csv") << "x0,x1,y\n1,2,3\n4,5,6\n";
  const Dataset d = read_dataset_csv(dir / "d.csv");
  EXPECT_EQ(d.x.rows(), 2);
  EXPECT_EQ(d.x(1, 1), 5.0);
  EXPECT_EQ(d.y, vec({3, 6}));
  std::ofstream(dir / "bad.csv") << "x0,y\n1,2\n3\n";
  EXPECT_THROW(read_dataset_csv(dir / "bad.csv"), ConfigError);
  std::ofstream(dir / "word.csv") << "x0,y\n1,two\n";
  EXPECT_THROW(read_dataset_csv(dir / "word.csv"), ConfigError);
}

TEST(Generators, ResolvedSchemes) {
  Matrix x(2, 2);
  x << 3, 4, 0, 1;
  const auto rn = std::get<CategoricalSingle>(resolve_scheme(SchemeSpec{"row_norm", {}, 1.0, "", 0, 1, {}}, x));
  EXPECT_NEAR(rn.p(0), std::exp(5.0) / (std::exp(5.0) + std::exp(1.0)), 1e-15);
  const auto cu = std::get<ContinuousIID>(resolve_scheme(SchemeSpec{"continuous", {}, 1, "uniform", 0, 2, {}}, x));
  EXPECT_NEAR(cu.moments[0], 1.0, 1e-15);
  EXPECT_NEAR(cu.moments[1], 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(cu.moments[2], 2.0, 1e-15);
  EXPECT_NEAR(cu.moments[3], 16.0 / 5.0, 1e-15);
  EXPECT_EQ(*cu.tau, 2.0);
  EXPECT_THROW(resolve_scheme(SchemeSpec{"categorical", {1.0}, 1, "", 0, 1, {}}, x), ConfigError);
  EXPECT_THROW(resolve_scheme(SchemeSpec{"continuous", {}, 1, "normal", 1, 1, 3.0}, x), ConfigError);
  EXPECT_THROW(resolve_scheme(SchemeSpec{"categorical", {0.7, 0.7}, 1, "", 0, 1, {}}, x), ConfigError);
}

TEST(Generators, OracleInstancesStayInBudget) {
  const auto list = generate_oracle_instances({40, 8, 3}, 1 << 16);
  ASSERT_EQ(list.size(), 40u);
  bool saw_bernoulli = false, saw_harmonic = false;
  for (const auto& inst : list) {
    const auto& data = std::get<InlineData>(inst.dataset);
    EXPECT_LE(data.x.size(), 3u);
    EXPECT_LE(data.x.front().size(), 3u);
    EXPECT_GE(inst.K, 1);
    EXPECT_LE(inst.K, 8);
    const double support = inst.scheme.type == "bernoulli" ? std::pow(2.0, static_cast<double>(data.x.size()))
                                                           : static_cast<double>(data.x.size());
    EXPECT_LE(std::pow(support, static_cast<double>(inst.K)), 65536.0);
    saw_bernoulli |= inst.scheme.type == "bernoulli";
    saw_harmonic |= inst.schedule.type == "harmonic";
  }
  EXPECT_TRUE(saw_bernoulli);
  EXPECT_TRUE(saw_harmonic);
}

TEST(SeparationStart, Examples) {
  const std::vector<std::int64_t> ks{1, 2, 3, 4};
  const std::vector<double> a{1, 1, 1, 1}, se{0.01, 0.01, 0.01, 0.01};
  EXPECT_EQ(separation_start(ks, a, se, {1, 0.5, 1.5, 0.5}, se, 3.0), std::optional<std::int64_t>(4));
  EXPECT_EQ(separation_start(ks, a, se, {0.5, 0.5, 0.5, 0.5}, se, 3.0), std::optional<std::int64_t>(1));
  EXPECT_FALSE(separation_start(ks, a, se, {0.5, 0.5, 0.5, 1.0}, se, 3.0).has_value());
}

TEST(CliBinary, MissingConfigExitsTwoNamingThePath) {
  const fs::path dir = scratch("missing");
  const CliRun r = run_cli("simulate --config /no/such/config.json", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/no/such/config.json"), std::string::npos);
}

TEST(CliBinary, UnknownSubcommandOrBadFlagExitsTwo) {
  const fs::path dir = scratch("badflag");
  EXPECT_EQ(run_cli("simulate --config " + config_path("simulate_identity").string() + " --threads zero", dir).code, 2);
  EXPECT_EQ(run_cli("--config " + config_path("simulate_identity").string(), dir).code, 2);
}

TEST(CliBinary, IdentitySimulateReproducesGradientDescent) {
  const fs::path dir = scratch("identity");
  const CliRun r =
      run_cli("simulate --config " + config_path("simulate_identity").string() + " --out " + (dir / "o").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const ExperimentConfig c = load_config(config_path("simulate_identity"));
  const GeneratedData g = generate_dataset(*c.dataset);
  const WeightedProblem wp = build_unweighted_problem(g.data);
  const double alpha = 0.5 / wp.norm_xx;
  const CsvTable traj = read_csv(dir / "o" / "trajectory.csv");
  ASSERT_EQ(traj.rows.size(), static_cast<std::size_t>(c.K + 1));
  Vector w = Vector::Zero(2);
  for (const auto& row : traj.rows) {
    EXPECT_EQ(row[1], w(0));
    EXPECT_EQ(row[2], w(1));
    w = full_batch_step(w, wp, alpha);
  }
  const CsvTable ens = read_csv(dir / "o" / "ensemble.csv");
  for (const auto& row : ens.rows) EXPECT_EQ(row[ens.column("se")], 0.0);
  EXPECT_TRUE(fs::exists(dir / "o" / "resolved_config.json"));
  EXPECT_TRUE(fs::exists(dir / "o" / "ensemble.svg"));
}

TEST(CliBinary, SameSeedGivesByteIdenticalCsv) {
  const fs::path dir = scratch("determinism");
  const std::string base = "simulate --no-plot --config " + config_path("simulate_categorical").string();
  ASSERT_EQ(run_cli(base + " --out " + (dir / "a").string(), dir).code, 0);
  ASSERT_EQ(run_cli(base + " --threads 3 --out " + (dir / "b").string(), dir).code, 0);
  ASSERT_EQ(run_cli(base + " --seed 8 --out " + (dir / "c").string(), dir).code, 0);
  for (const char* f : {"ensemble.csv", "trajectory.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    EXPECT_NE(slurp(dir / "a" / f), slurp(dir / "c" / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir / "a" / "ensemble.svg"));
}

TEST(CliBinary, AssumptionFailureExitsOne) {
  const fs::path dir = scratch("assumption");
  json j = load_json("simulate_identity");
  j["schedule"]["alpha_fraction"] = 1.5;
  j["scheme"] = {{"type", "uniform"}};
  const fs::path cfg = write_config(dir, j);
  const CliRun r = run_cli("simulate --config " + cfg.string() + " --out " + (dir / "o").string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("step size"), std::string::npos);
  j["enforce_assumptions"] = false;
  write_config(dir, j);
  EXPECT_EQ(run_cli("simulate --config " + cfg.string() + " --out " + (dir / "o").string(), dir).code, 0);
}

TEST(CliBinary, OracleBatteries) {
  const fs::path dir = scratch("oracle");
  const auto run = [&](const char* name) {
    return run_cli("oracle --config " + config_path(name).string() + " --out " + (dir / name).string(), dir);
  };
  const CliRun battery = run("oracle_battery");
  EXPECT_EQ(battery.code, 0) << battery.err;
  EXPECT_EQ(read_csv(dir / "oracle_battery" / "oracle.csv").rows.size(), 24u);
  EXPECT_EQ(run("oracle_identity").code, 0);
  const CliRun budget = run("oracle_budget_violation");
  EXPECT_EQ(budget.code, 2);
  EXPECT_NE(budget.err.find("65536"), std::string::npos);
}

TEST(CliBinary, OracleMismatchExitsThree) {
  const fs::path dir = scratch("mismatch");
  json j = load_json("oracle_identity");
  j["oracle"]["tolerance"] = -1.0;
  const fs::path cfg = write_config(dir, j);
  EXPECT_EQ(run_cli("oracle --config " + cfg.string() + " --out " + (dir / "o").string(), dir).code, 3);
}

TEST(CliBinary, BoundsReportListsEveryAssumption) {
  const fs::path dir = scratch("bounds");
  const CliRun r = run_cli("bounds --config " + config_path("bounds").string() + " --out " + (dir / "o").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(r.out);
  EXPECT_EQ(report, json::parse(slurp(dir / "o" / "bounds.json")));
  ASSERT_EQ(report["assumptions"].size(), 7u);
  for (const auto& item : report["assumptions"]) {
    EXPECT_TRUE(item.contains("margin"));
    EXPECT_EQ(item["status"], "pass") << item["name"];
  }
}

TEST(Commands, BoundsMirrorTheLibrary) {
  const fs::path dir = scratch("bounds_lib");
  ExperimentConfig c = load_config(config_path("bounds"));
  c.outputs.csv_dir = dir.string();
  const json report = cmd_bounds(c);

  const GeneratedData g = generate_dataset(*c.dataset);
  const WeightingScheme s = resolve_scheme(*c.scheme, g.data.x);
  const WeightedProblem wp = build_weighted_problem(g.data, moments(s).m2_diag);
  const double alpha = *c.schedule->alpha_fraction / wp.norm_xx_hat;

  // Step-size margin is 1 - alpha ||X^T M2 X||.
  EXPECT_NEAR(report["assumptions"][0]["margin"].get<double>(), 1.0 - *c.schedule->alpha_fraction, 1e-15);
  // r_2^2 <= 1 - alpha (2 - alpha ||X^T X||) sigma with tau = 1.
  const double sigma = std::pow(sigma_min_plus(wp.x_hat), 2);
  const double xx = spectral_norm(wp.x().transpose() * wp.x());
  EXPECT_NEAR(report["gmc"]["bound_qq"].get<double>(), 1.0 - alpha * (2.0 - alpha * xx) * sigma, 1e-12);
  // The constant-step envelope bounds the propagated second moment.
  const MomentContext ctx = make_moment_context(wp, moments(s), ConstantStep{alpha});
  const auto states = propagate(ctx, -wp.w_hat, 300);
  const Matrix stat = stationary_second_moment(ctx);
  const double c2 = report["variance_constants"]["c2"].get<double>();
  for (const auto& st : states) {
    EXPECT_LE(spectral_norm(st.a - stat), constant_step_envelope(c2, alpha, ctx.sigma(), st.k) + 1e-12);
  }
}

TEST(Commands, MomentsExamples) {
  const fs::path dir = scratch("moments");
  // Identity weighting: no variance.
  ExperimentConfig c = load_config(config_path("simulate_identity"));
  c.outputs.csv_dir = (dir / "identity").string();
  c.K = 20;
  cmd_moments(c);
  const CsvTable id = read_csv(dir / "identity" / "moments.csv");
  for (const auto& row : id.rows) {
    EXPECT_LE(std::abs(row[id.column("var0")]), 1e-14);
    EXPECT_LE(std::abs(row[id.column("var1")]), 1e-14);
  }
  // Independent rows: realizable, stationary moment is zero.
  c = load_config(config_path("moments"));
  c.dataset = InlineData{{{1.0, 0.5}, {0.0, 2.0}}, {1.0, -1.0}};
  c.scheme = SchemeSpec{"categorical", {0.3, 0.7}, 1.0, "", 0, 1, {}};
  c.outputs.csv_dir = (dir / "realizable").string();
  const MomentsResult r = cmd_moments(c);
  ASSERT_TRUE(r.stationary.has_value());
  EXPECT_EQ(*r.stationary, Matrix::Zero(2, 2));
  const CsvTable st = read_csv(dir / "realizable" / "stationary.csv");
  for (const auto& row : st.rows) {
    for (double v : row) EXPECT_EQ(v, 0.0);
  }
}

TEST(Commands, ShippedMomentsMatchOracle) {
  const fs::path dir = scratch("moments_oracle");
  ExperimentConfig c = load_config(config_path("moments"));
  c.outputs.csv_dir = dir.string();
  cmd_moments(c);
  const CsvTable t = read_csv(dir / "moments.csv");
  const GeneratedData g = generate_dataset(*c.dataset);
  const WeightingScheme s = resolve_scheme(*c.scheme, g.data.x);
  const WeightedProblem wp = build_weighted_problem(g.data, moments(s).m2_diag);
  const StepSchedule sched = resolve_schedule(*c.schedule, wp.norm_xx_hat);
  const auto exact = enumeration_oracle(wp, s, sched, Vector::Zero(2), c.K);
  ASSERT_EQ(t.rows.size(), exact.size());
  for (std::size_t k = 0; k < exact.size(); ++k) {
    EXPECT_NEAR(t.rows[k][t.column("m0")], exact[k].m(0), 1e-10);
    EXPECT_NEAR(t.rows[k][t.column("m1")], exact[k].m(1), 1e-10);
    EXPECT_NEAR(t.rows[k][t.column("A0_0")], exact[k].a(0, 0), 1e-10);
    EXPECT_NEAR(t.rows[k][t.column("A0_1")], exact[k].a(0, 1), 1e-10);
    EXPECT_NEAR(t.rows[k][t.column("A1_1")], exact[k].a(1, 1), 1e-10);
    EXPECT_GE(t.rows[k][t.column("envelope")], t.rows[k][t.column("trace")]);
  }
  EXPECT_TRUE(fs::exists(dir / "stationary.csv"));
}

TEST(Commands, Figure1WithoutRescalingCurvesCoincide) {
  const fs::path dir = scratch("figure1_plain");
  ExperimentConfig c = load_config(config_path("figure1_no_rescale"));
  c.outputs.csv_dir = dir.string();
  c.outputs.plot = false;
  const Figure1Result r = cmd_figure1(c);
  const auto& a = r.curves[0];
  const auto& b = r.curves[1];
  for (std::size_t j = 0; j < a.ks.size(); ++j) {
    const double se = std::hypot(a.standard_errors[j], b.standard_errors[j]);
    EXPECT_LE(std::abs(a.sq_distance[j] - b.sq_distance[j]), 3 * se + 1e-12) << "k=" << a.ks[j];
  }
}

TEST(Commands, Figure1SingleTrajectoryWarns) {
  const fs::path dir = scratch("figure1_single");
  ExperimentConfig c = load_config(config_path("figure1"));
  c.outputs.csv_dir = dir.string();
  c.n_traj = 1;
  c.K = 20;
  std::ostringstream log;
  const Figure1Result r = cmd_figure1(c, {1, &log, nullptr});
  EXPECT_NE(log.str().find("standard errors are undefined"), std::string::npos);
  EXPECT_TRUE(std::isnan(r.curves[0].standard_errors.back()));
  EXPECT_TRUE(fs::exists(dir / "figure1.svg"));
}

TEST(Commands, EnvelopeDominatesSimulatedCurve) {
  const fs::path dir = scratch("envelope");
  ExperimentConfig c = load_config(config_path("simulate_categorical"));
  c.outputs.csv_dir = dir.string();
  c.outputs.plot = false;
  c.K = 200;
  c.n_traj = 500;
  const GeneratedData g = generate_dataset(*c.dataset);
  const WeightingScheme s = resolve_scheme(*c.scheme, g.data.x);
  const WeightedProblem wp = build_weighted_problem(g.data, moments(s).m2_diag);
  const MomentContext ctx = make_moment_context(wp, moments(s), ConstantStep{1.0}, false);
  c.schedule = ScheduleSpec{"constant", 0.5 * variance_step_limit(ctx), std::nullopt, {}};
  const SimulateResult r = cmd_simulate(c);
  for (std::size_t j = 0; j < r.envelope.size(); ++j) {
    ASSERT_TRUE(std::isfinite(r.envelope[j]));
    EXPECT_LE(r.summary.sq_distance[j], r.envelope[j] + 3 * r.summary.standard_errors[j]);
  }
}

TEST(Commands, Figure2NoiselessCurvesReachTheBias) {
  const fs::path dir = scratch("figure2_quiet");
  ExperimentConfig c = load_config(config_path("figure2"));
  c.outputs.csv_dir = dir.string();
  c.outputs.plot = false;
  c.dataset = HeteroscedasticSpec{3, 5, 0.34, 2.0, 0.5, NoiseMap{{}, 0.0, 0.0}, {1, -1, 0.5, 2, 0}, 4};
  c.panels = {{"quiet", NoiseMap{{}, 0.0, 0.0}}};
  c.schedule = ScheduleSpec{"constant", std::nullopt, 0.3, {}};
  c.K = 3000;
  c.n_rep = 20;
  const Figure2Result r = cmd_figure2(c);
  const GeneratedData g = generate_dataset(*c.dataset);
  const Vector w_star = *g.data.w_star;
  const double bias = (kernel_projector(g.data.x) * w_star).squaredNorm();
  ASSERT_GT(bias, 0.1);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_NEAR(r.panels[0].curves[s].mean.back(), bias, 1e-9 * bias);
    EXPECT_NEAR(r.panels[0].bounds[s].lower, bias, 1e-9 * bias);
    EXPECT_NEAR(r.panels[0].bounds[s].upper, bias, 1e-9 * bias);
  }
}
