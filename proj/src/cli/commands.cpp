#include "rwgd/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "rwgd/cli/csv.hpp"
#include "rwgd/cli/generators.hpp"
#include "rwgd/cli/svg.hpp"
#include "rwgd/errors.hpp"
#include "rwgd/rng.hpp"

namespace rwgd::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct OracleMismatch : Error {
  using Error::Error;
};

template <typename T>
const T& need(const std::optional<T>& v, const char* what) {
  if (!v) throw ConfigError(std::string("config needs a ") + what + " section");
  return *v;
}

std::ostream* warn_sink(const RunContext& run) { return run.log; }

void warn(const RunContext& run, const std::string& msg) {
  if (auto* s = warn_sink(run)) *s << "warning: " << msg << '\n';
}

void note(const RunContext& run, const std::string& msg) {
  if (auto* s = warn_sink(run)) *s << msg << '\n';
}

fs::path out_dir(const ExperimentConfig& c) {
  const fs::path dir(c.outputs.csv_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void echo_config(const ExperimentConfig& c, const fs::path& dir) {
  write_json(dir / "resolved_config.json", to_json(c));
}

Vector start_point(const ExperimentConfig& c, Index d) {
  if (c.w1.empty()) return Vector::Zero(d);
  if (static_cast<Index>(c.w1.size()) != d) {
    throw ConfigError("w1 has " + std::to_string(c.w1.size()) + " entries, dataset has d = " + std::to_string(d));
  }
  return Eigen::Map<const Vector>(c.w1.data(), d);
}

struct Prepared {
  GeneratedData gen;
  WeightingScheme scheme;
  WeightingMoments mom;
  WeightedProblem wp;
  StepSchedule schedule;
  Vector w1;
};

Prepared prepare(const ExperimentConfig& c) {
  Prepared p;
  p.gen = generate_dataset(need(c.dataset, "dataset"));
  p.scheme = resolve_scheme(need(c.scheme, "scheme"), p.gen.data.x);
  p.mom = moments(p.scheme);
  p.wp = build_weighted_problem(p.gen.data, p.mom.m2_diag);
  p.schedule = resolve_schedule(need(c.schedule, "schedule"), p.wp.norm_xx_hat);
  p.w1 = start_point(c, p.wp.d());
  return p;
}

std::vector<double> as_doubles(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

void warn_single(const RunContext& run, std::int64_t n) {
  if (n == 1) warn(run, "n_traj = 1, standard errors are undefined");
}

}  // namespace

std::vector<double> sq_distance_envelope(const MomentContext& ctx, const Vector& w1, std::int64_t K) {
  std::vector<double> env(static_cast<std::size_t>(K + 1), std::nan(""));
  const double limit = variance_step_limit(ctx);
  if (!(schedule_sup(ctx.schedule) < limit)) return env;
  const Vector e = w1 - ctx.wp.w_hat;
  if ((ctx.wp.ker_projector * e).norm() > 1e-10 * (1.0 + e.norm())) return env;
  const VarianceConstants c = var_constants(ctx, w1);
  const double rank = static_cast<double>(ctx.wp.rank);
  const double sigma = ctx.sigma();
  for (std::int64_t k = 1; k <= K + 1; ++k) {
    double v = std::nan("");
    if (const auto* cs = std::get_if<ConstantStep>(&ctx.schedule); cs && c.c2) {
      v = rank * (*c.stationary_norm + constant_step_envelope(*c.c2, cs->alpha, sigma, k));
    } else if (const auto* h = std::get_if<HarmonicStep>(&ctx.schedule); h && c.c1) {
      v = k == 1 ? e.squaredNorm() : rank * harmonic_step_envelope(*c.c1, h->alpha, sigma, k - 1);
    }
    env[static_cast<std::size_t>(k - 1)] = v;
  }
  return env;
}

std::optional<std::int64_t> separation_start(const std::vector<std::int64_t>& ks, const std::vector<double>& a,
                                             const std::vector<double>& se_a, const std::vector<double>& b,
                                             const std::vector<double>& se_b, double z) {
  std::optional<std::int64_t> start;
  for (std::size_t j = ks.size(); j-- > 0;) {
    const double gap = a[j] - b[j];
    const double se = std::sqrt(se_a[j] * se_a[j] + se_b[j] * se_b[j]);
    if (!(gap > z * se)) break;
    start = ks[j];
  }
  return start;
}

SimulateResult cmd_simulate(const ExperimentConfig& c, const RunContext& run) {
  const Prepared p = prepare(c);
  const fs::path dir = out_dir(c);
  echo_config(c, dir);
  warn_single(run, c.n_traj);

  EnsembleOptions opt;
  opt.enforce_assumptions = c.enforce_assumptions;
  opt.threads = run.threads;
  opt.track_second_moment = false;
  SimulateResult res;
  res.summary = ensemble_moments(p.wp, p.scheme, p.schedule, p.w1, c.K, c.n_traj, c.seed, opt);
  const MomentContext ctx = make_moment_context(p.wp, p.mom, p.schedule, false);
  res.envelope = sq_distance_envelope(ctx, p.w1, c.K);

  CsvWriter ens(dir / "ensemble.csv", {"k", "sq_distance", "se", "mean_error_norm", "envelope"});
  for (std::size_t j = 0; j < res.summary.ks.size(); ++j) {
    ens.row({static_cast<double>(res.summary.ks[j]), res.summary.sq_distance[j], res.summary.standard_errors[j],
             res.summary.mean_error_norm[j], res.envelope[j]});
  }

  TrajectoryOptions topt;
  topt.enforce_assumptions = c.enforce_assumptions;
  const TrajectoryRecord rec = run_trajectory(p.wp, p.scheme, p.schedule, p.w1, c.K, c.seed, topt);
  std::vector<std::string> header{"k"};
  for (Index i = 0; i < p.wp.d(); ++i) header.push_back("w" + std::to_string(i));
  CsvWriter traj(dir / "trajectory.csv", header);
  for (std::size_t j = 0; j < rec.ks.size(); ++j) {
    std::vector<double> row{static_cast<double>(rec.ks[j])};
    for (Index i = 0; i < p.wp.d(); ++i) row.push_back(rec.iterates[j](i));
    traj.row(row);
  }

  if (c.outputs.plot) {
    Plot plot{"Squared distance to the weighted least-squares solution", "k", "E||w_k - w_hat||^2", true, true, {}};
    const auto ks = as_doubles(res.summary.ks);
    plot.series.push_back({"ensemble", ks, res.summary.sq_distance, false});
    plot.series.push_back({"envelope", ks, res.envelope, true});
    write_svg(dir / "ensemble.svg", plot);
  }
  return res;
}

MomentsResult cmd_moments(const ExperimentConfig& c, const RunContext& run) {
  const Prepared p = prepare(c);
  const fs::path dir = out_dir(c);
  echo_config(c, dir);
  const MomentContext ctx = make_moment_context(p.wp, p.mom, p.schedule, c.enforce_assumptions);
  MomentsResult res;
  res.states = propagate(ctx, p.w1 - p.wp.w_hat, c.K, c.enforce_assumptions);
  res.envelope = sq_distance_envelope(ctx, p.w1, c.K);

  const Index d = p.wp.d();
  std::vector<std::string> header{"k"};
  for (Index i = 0; i < d; ++i) header.push_back("m" + std::to_string(i));
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) header.push_back("A" + std::to_string(i) + "_" + std::to_string(j));
  }
  for (Index i = 0; i < d; ++i) header.push_back("var" + std::to_string(i));
  header.push_back("trace");
  header.push_back("envelope");
  CsvWriter out(dir / "moments.csv", header);
  for (std::size_t s = 0; s < res.states.size(); ++s) {
    const MomentState& st = res.states[s];
    std::vector<double> row{static_cast<double>(st.k)};
    for (Index i = 0; i < d; ++i) row.push_back(st.m(i));
    for (Index i = 0; i < d; ++i) {
      for (Index j = i; j < d; ++j) row.push_back(st.a(i, j));
    }
    for (Index i = 0; i < d; ++i) row.push_back(st.a(i, i) - st.m(i) * st.m(i));
    row.push_back(st.a.trace());
    row.push_back(res.envelope[s]);
    out.row(row);
  }

  if (!is_constant(p.schedule)) {
    note(run, "stationary moment skipped: the schedule is not constant");
  } else if (!(schedule_sup(p.schedule) < variance_step_limit(ctx))) {
    warn(run,
         "stationary moment skipped: step exceeds the variance step bound " + format_number(variance_step_limit(ctx)));
  } else {
    res.stationary = stationary_second_moment(ctx);
    std::vector<std::string> cols;
    for (Index i = 0; i < d; ++i) cols.push_back("c" + std::to_string(i));
    CsvWriter st(dir / "stationary.csv", cols);
    for (Index i = 0; i < d; ++i) {
      std::vector<double> row;
      for (Index j = 0; j < d; ++j) row.push_back((*res.stationary)(i, j));
      st.row(row);
    }
  }
  return res;
}

json cmd_bounds(const ExperimentConfig& c, const RunContext& run) {
  const Prepared p = prepare(c);
  const fs::path dir = out_dir(c);
  echo_config(c, dir);
  const WeightedProblem& wp = p.wp;
  const MomentContext ctx = make_moment_context(wp, p.mom, p.schedule, false);

  json report;
  report["scheme"] = scheme_id(p.scheme);
  report["schedule"] = schedule_id(p.schedule);
  report["n"] = wp.n();
  report["d"] = wp.d();
  report["rank"] = wp.rank;
  report["sigma_min_plus"] = ctx.sigma();
  report["norm_x"] = wp.norm_x;
  report["norm_xx_hat"] = wp.norm_xx_hat;
  report["norm_sigma_d"] = ctx.norm_sigma_d();
  report["residual_norm"] = wp.residual.norm();
  report["realizable"] = wp.residual.norm() <= 1e-10 * (1.0 + wp.y().norm());

  const AssumptionReport checks = assumption_check(wp, p.scheme, p.schedule, p.w1);
  json items = json::array();
  for (const auto& it : checks.items) {
    items.push_back({{"name", it.name},
                     {"status", to_string(it.status)},
                     {"margin", it.margin},
                     {"detail", it.detail},
                     {"required_for_dynamics", it.required_for_dynamics}});
  }
  report["assumptions"] = items;

  const double limit = variance_step_limit(ctx);
  report["variance_step_limit"] = limit;
  const std::int64_t horizon = c.K + 1;
  report["horizon"] = horizon;
  report["mean_rate_bound"] = mean_rate_bound(ctx, horizon, p.w1);
  const WeightedProblem plain = build_unweighted_problem(wp.data);
  if (schedule_sup(p.schedule) * plain.norm_xx < 1.0) {
    report["gd_rate_bound"] = gd_rate_bound(plain, p.schedule, horizon, p.w1);
  } else {
    report["gd_rate_bound"] = nullptr;
  }

  if (schedule_sup(p.schedule) < limit && checks.passes(check::orthogonal_start)) {
    const VarianceConstants vc = var_constants(ctx, p.w1);
    json v = {{"c0", vc.c0}};
    v["c1"] = vc.c1 ? json(*vc.c1) : json(nullptr);
    v["c2"] = vc.c2 ? json(*vc.c2) : json(nullptr);
    v["stationary_norm"] = vc.stationary_norm ? json(*vc.stationary_norm) : json(nullptr);
    report["variance_constants"] = v;
    if (is_constant(p.schedule)) {
      const VarianceCeiling vc2 = variance_ceiling(ctx);
      report["variance_ceiling"] = {{"value", vc2.value},
                                    {"step_form", vc2.step_form},
                                    {"spectral_form", vc2.spectral_form},
                                    {"coarse_form", vc2.coarse_form}};
    }
  } else {
    report["variance_constants"] = nullptr;
    warn(run, "variance constants skipped: variance step bound or orthogonal start fails");
  }

  const BoundedSupport support = bounded_support(p.scheme);
  if (const auto* cs = std::get_if<ConstantStep>(&p.schedule); cs && support.tau && checks.passes(check::gmc_step)) {
    const GmcRate g = gmc_rate(wp, cs->alpha, *support.tau, 2.0);
    report["gmc"] = {{"q", g.q}, {"bound_qq", g.bound_qq}, {"r_q", g.r_q}, {"tau", *support.tau}};
  } else {
    report["gmc"] = nullptr;
  }

  if (wp.data.w_star && wp.data.sigma_eps) {
    const RiskBounds rb = asym_risk_bounds(wp, *wp.data.w_star, *wp.data.sigma_eps);
    report["risk_bounds"] = {{"lower", rb.lower},
                             {"upper", rb.upper},
                             {"bias", rb.bias},
                             {"variance_term", rb.variance_term},
                             {"upper_extra", rb.upper_extra},
                             {"scale", rb.scale},
                             {"rescaled", rb.rescaled}};
  } else {
    report["risk_bounds"] = nullptr;
  }

  const WeightedProblem uniform = build_weighted_problem(wp.data, moments(uniform_categorical(wp.n())).m2_diag);
  const SpeedupReport sp = condition_speedup(uniform, wp);
  report["condition_speedup"] = {{"ratio", sp.ratio}, {"bound", sp.bound}};

  write_json(dir / "bounds.json", report);
  return report;
}

Figure1Result cmd_figure1(const ExperimentConfig& c, const RunContext& run) {
  if (c.schemes.size() < 2) throw ConfigError("figure1 needs at least two entries in schemes");
  const GeneratedData gen = generate_dataset(need(c.dataset, "dataset"));
  const fs::path dir = out_dir(c);
  echo_config(c, dir);
  warn_single(run, c.n_traj);

  Figure1Result res;
  std::vector<WeightingScheme> schemes;
  std::vector<WeightedProblem> wps;
  double max_norm = 0.0;
  for (const auto& ns : c.schemes) {
    res.names.push_back(ns.name);
    schemes.push_back(resolve_scheme(ns.scheme, gen.data.x));
    wps.push_back(build_weighted_problem(gen.data, moments(schemes.back()).m2_diag));
    max_norm = std::max(max_norm, wps.back().norm_xx_hat);
  }
  const StepSchedule schedule = resolve_schedule(need(c.schedule, "schedule"), max_norm);
  res.alpha = schedule_sup(schedule);
  const Vector w1 = start_point(c, gen.data.d());

  EnsembleOptions opt;
  opt.enforce_assumptions = c.enforce_assumptions;
  opt.threads = run.threads;
  opt.track_second_moment = false;
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    res.curves.push_back(
        ensemble_moments(wps[s], schemes[s], schedule, w1, c.K, c.n_traj, derive_seed(c.seed, 16 + s), opt));
    const MomentContext ctx = make_moment_context(wps[s], moments(schemes[s]), schedule, false);
    res.envelopes.push_back(sq_distance_envelope(ctx, w1, c.K));
  }
  const auto& a = res.curves[0];
  const auto& b = res.curves[1];
  res.crossover = separation_start(a.ks, a.sq_distance, a.standard_errors, b.sq_distance, b.standard_errors, 3.0);

  std::vector<std::string> header{"k"};
  for (const auto& n : res.names) {
    for (const char* suffix : {"_mean", "_se", "_envelope"}) header.push_back(n + suffix);
  }
  CsvWriter out(dir / "figure1.csv", header);
  for (std::size_t j = 0; j < a.ks.size(); ++j) {
    std::vector<double> row{static_cast<double>(a.ks[j])};
    for (std::size_t s = 0; s < res.curves.size(); ++s) {
      row.push_back(res.curves[s].sq_distance[j]);
      row.push_back(res.curves[s].standard_errors[j]);
      row.push_back(res.envelopes[s][j]);
    }
    out.row(row);
  }
  if (res.crossover) {
    note(run, res.names[1] + " stays 3se below " + res.names[0] + " from k = " + std::to_string(*res.crossover));
  } else {
    note(run, res.names[1] + " is not 3se below " + res.names[0] + " at the final iterate");
  }

  if (c.outputs.plot) {
    Plot plot{"Convergence in squared distance", "k", "E||w_k - w_hat||^2", true, true, {}};
    const auto ks = as_doubles(a.ks);
    for (std::size_t s = 0; s < res.curves.size(); ++s) {
      plot.series.push_back({res.names[s], ks, res.curves[s].sq_distance, false});
    }
    for (std::size_t s = 0; s < res.curves.size(); ++s) {
      plot.series.push_back({res.names[s] + " envelope", ks, res.envelopes[s], true});
    }
    write_svg(dir / "figure1.svg", plot);
  }
  return res;
}

Figure2Result cmd_figure2(const ExperimentConfig& c, const RunContext& run) {
  if (c.schemes.size() < 2) throw ConfigError("figure2 needs at least two entries in schemes");
  if (c.panels.empty()) throw ConfigError("figure2 needs at least one entry in panels");
  const DatasetSpec& spec = need(c.dataset, "dataset");
  if (!std::holds_alternative<HeteroscedasticSpec>(spec))
    throw ConfigError("figure2 needs a heteroscedastic generator");
  const fs::path dir = out_dir(c);
  echo_config(c, dir);
  if (c.n_rep == 1) warn(run, "n_rep = 1, standard errors are undefined");

  Figure2Result res;
  for (const auto& ns : c.schemes) res.names.push_back(ns.name);
  // The design and w* do not depend on the noise map, so alpha is shared.
  const GeneratedData base = generate_dataset(spec, c.panels.front().noise_map);
  std::vector<WeightingScheme> schemes;
  double max_norm = 0.0;
  for (const auto& ns : c.schemes) {
    schemes.push_back(resolve_scheme(ns.scheme, base.data.x));
    max_norm = std::max(max_norm, build_weighted_problem(base.data, moments(schemes.back()).m2_diag).norm_xx_hat);
  }
  const StepSchedule schedule = resolve_schedule(need(c.schedule, "schedule"), max_norm);
  const auto* cs = std::get_if<ConstantStep>(&schedule);
  if (!cs) throw ConfigError("figure2 needs a constant step schedule");
  res.alpha = cs->alpha;
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const WeightedProblem wp = build_weighted_problem(base.data, moments(schemes[s]).m2_diag);
    const double limit = variance_step_limit(make_moment_context(wp, moments(schemes[s]), schedule, false));
    if (!(res.alpha < limit)) {
      warn(run, "alpha exceeds the variance step bound " + format_number(limit) + " for " + res.names[s] +
                    ", its risk lines are not guaranteed");
    }
  }
  const Vector w1 = start_point(c, base.data.d());

  EnsembleOptions opt;
  opt.enforce_assumptions = c.enforce_assumptions;
  opt.threads = run.threads;
  json limits = json::array();
  for (std::size_t pi = 0; pi < c.panels.size(); ++pi) {
    const NoisePanel& panel = c.panels[pi];
    const GeneratedData gen = generate_dataset(spec, panel.noise_map);
    const RiskInstance inst{gen.data.x, *gen.data.w_star, *gen.data.sigma_eps};
    Figure2Panel out{panel.name, {}, {}};
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      out.curves.push_back(
          risk_curve(inst, schemes[s], res.alpha, w1, c.K, c.n_rep, derive_seed(c.seed, 64 + 8 * pi + s), opt));
      const WeightedProblem wp = build_weighted_problem(gen.data, moments(schemes[s]).m2_diag);
      out.bounds.push_back(asym_risk_bounds(wp, inst.w_star, inst.sigma_eps));
      limits.push_back({{"panel", panel.name},
                        {"scheme", res.names[s]},
                        {"limit", out.curves.back().mean.back()},
                        {"se", out.curves.back().se.back()},
                        {"lower", out.bounds.back().lower},
                        {"upper", out.bounds.back().upper}});
    }

    std::vector<std::string> header{"k"};
    for (const auto& n : res.names) {
      for (const char* suffix : {"_mean", "_se", "_lower", "_upper"}) header.push_back(n + suffix);
    }
    CsvWriter csv(dir / ("figure2_" + panel.name + ".csv"), header);
    const auto& ks = out.curves.front().ks;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      std::vector<double> row{static_cast<double>(ks[j])};
      for (std::size_t s = 0; s < schemes.size(); ++s) {
        row.push_back(out.curves[s].mean[j]);
        row.push_back(out.curves[s].se[j]);
        row.push_back(out.bounds[s].lower);
        row.push_back(out.bounds[s].upper);
      }
      csv.row(row);
    }
    if (c.outputs.plot) {
      Plot plot{"Statistical error, " + panel.name, "k", "E||w_k - w*||^2", true, true, {}};
      const auto xk = as_doubles(ks);
      for (std::size_t s = 0; s < schemes.size(); ++s) {
        plot.series.push_back({res.names[s], xk, out.curves[s].mean, false});
      }
      for (std::size_t s = 0; s < schemes.size(); ++s) {
        plot.series.push_back({res.names[s] + " lower", xk, std::vector<double>(xk.size(), out.bounds[s].lower), true});
        plot.series.push_back({res.names[s] + " upper", xk, std::vector<double>(xk.size(), out.bounds[s].upper), true});
      }
      write_svg(dir / ("figure2_" + panel.name + ".svg"), plot);
    }
    res.panels.push_back(std::move(out));
  }
  write_json(dir / "figure2_limits.json", limits);
  return res;
}

OracleResult cmd_oracle(const ExperimentConfig& c, const RunContext& run) {
  const OracleSpec& spec = need(c.oracle, "oracle");
  std::vector<OracleInstance> instances = spec.instances;
  if (spec.generated) {
    const auto more = generate_oracle_instances(*spec.generated, spec.max_outcomes);
    instances.insert(instances.end(), more.begin(), more.end());
  }
  if (instances.empty()) throw ConfigError("oracle battery has no instances");
  const fs::path dir = out_dir(c);
  echo_config(c, dir);

  OracleResult res;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const OracleInstance& inst = instances[i];
    const GeneratedData gen = generate_dataset(inst.dataset);
    const WeightingScheme scheme = resolve_scheme(inst.scheme, gen.data.x);
    const WeightingMoments mom = moments(scheme);
    const WeightedProblem wp = build_weighted_problem(gen.data, mom.m2_diag);
    const StepSchedule schedule = resolve_schedule(inst.schedule, wp.norm_xx_hat);
    ExperimentConfig local;
    local.w1 = inst.w1;
    const Vector w1 = start_point(local, wp.d());

    const auto exact = enumeration_oracle(wp, scheme, schedule, w1, inst.K, spec.max_outcomes);
    const MomentContext ctx = make_moment_context(wp, mom, schedule, c.enforce_assumptions);
    const auto prop = propagate(ctx, w1 - wp.w_hat, inst.K, c.enforce_assumptions);
    OracleRow row{wp.n(), wp.d(), inst.K, 0.0, 0.0, false};
    for (std::size_t k = 0; k < exact.size(); ++k) {
      row.max_dev_m = std::max(row.max_dev_m, (exact[k].m - prop[k].m).cwiseAbs().maxCoeff());
      row.max_dev_a = std::max(row.max_dev_a, (exact[k].a - prop[k].a).cwiseAbs().maxCoeff());
    }
    row.pass = row.max_dev_m <= spec.tolerance && row.max_dev_a <= spec.tolerance;
    res.all_pass = res.all_pass && row.pass;
    res.rows.push_back(row);
  }
  CsvWriter csv(dir / "oracle.csv", {"instance", "n", "d", "K", "max_dev_m", "max_dev_a", "pass"});
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const OracleRow& row = res.rows[i];
    csv.row({static_cast<double>(i), static_cast<double>(row.n), static_cast<double>(row.d), static_cast<double>(row.K),
             row.max_dev_m, row.max_dev_a, row.pass ? 1.0 : 0.0});
  }
  std::size_t passed = 0;
  for (const auto& r : res.rows) passed += r.pass;
  note(run, "oracle battery: " + std::to_string(passed) + "/" + std::to_string(res.rows.size()) + " instances within " +
                format_number(spec.tolerance));
  return res;
}

int run_command(const std::string& name, const ExperimentConfig& config, const RunContext& run) {
  try {
    if (name == "simulate") {
      cmd_simulate(config, run);
    } else if (name == "moments") {
      cmd_moments(config, run);
    } else if (name == "bounds") {
      const json report = cmd_bounds(config, run);
      if (run.out) *run.out << report.dump(2) << '\n';
    } else if (name == "figure1") {
      cmd_figure1(config, run);
    } else if (name == "figure2") {
      cmd_figure2(config, run);
    } else if (name == "oracle") {
      if (!cmd_oracle(config, run).all_pass) throw OracleMismatch("oracle battery found deviations above tolerance");
    } else {
      throw ConfigError("unknown command " + name);
    }
  } catch (const AssumptionError& e) {
    if (run.log) *run.log << "error: " << e.what() << '\n';
    return 1;
  } catch (const OracleMismatch& e) {
    if (run.log) *run.log << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    if (run.log) *run.log << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace rwgd::cli
