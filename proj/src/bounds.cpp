#include "rwgd/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rwgd/errors.hpp"

namespace rwgd {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::not_applicable:
      return "n/a";
  }
  return "?";
}

bool AssumptionReport::all_pass() const {
  return std::none_of(items.begin(), items.end(), [](const auto& i) { return i.status == CheckStatus::fail; });
}

const AssumptionItem& AssumptionReport::item(const std::string& name) const {
  for (const auto& i : items) {
    if (i.name == name) return i;
  }
  throw InvalidArgument("no assumption named '" + name + "' in report");
}

bool AssumptionReport::passes(const std::string& name) const { return item(name).status == CheckStatus::pass; }

AssumptionReport assumption_check(const WeightedProblem& wp, const WeightingScheme& scheme,
                                  const StepSchedule& schedule, const Vector& w1) {
  AssumptionReport rep;
  const double sup_alpha = schedule_sup(schedule);
  const WeightingMoments mom = moments(scheme);
  auto status = [](bool ok) { return ok ? CheckStatus::pass : CheckStatus::fail; };

  {
    const double v = sup_alpha * wp.norm_xx_hat;
    rep.items.push_back({check::step_size, status(v < 1.0), 1.0 - v,
                         "sup alpha_k * ||X^T M2 X|| = " + fmt(v) + " (must be < 1)", true});
  }
  if (std::holds_alternative<ExplicitSteps>(schedule)) {
    rep.items.push_back({check::divergent_sum, CheckStatus::not_applicable, 0.0,
                         "finite explicit sequence; divergence cannot be checked", false});
  } else {
    rep.items.push_back({check::divergent_sum, CheckStatus::pass, std::numeric_limits<double>::infinity(),
                         schedule_id(schedule) + " has a divergent sum", false});
  }
  {
    const double leak = w1.size() == wp.d() ? (wp.ker_projector * w1).norm() : std::numeric_limits<double>::infinity();
    const double tol = 1e-10 * std::max(1.0, w1.norm());
    rep.items.push_back(
        {check::orthogonal_start, status(leak <= tol), tol - leak, "||P_ker(X) w1|| = " + fmt(leak), true});
  }
  {
    const double mn = mom.m2_diag.size() > 0 ? mom.m2_diag.minCoeff() : 0.0;
    rep.items.push_back({check::nonsingular_m2, status(mn > 0.0), mn, "min diag(M2) = " + fmt(mn), true});
  }
  {
    const double s = wp.sigma_min_plus_xx_hat;
    const double limit = s / (s * s + wp.norm_xx * wp.norm_xx * spectral_norm(mom.sigma_d));
    rep.items.push_back({check::variance_step, status(sup_alpha < limit), limit - sup_alpha,
                         "sup alpha = " + fmt(sup_alpha) + ", limit = " + fmt(limit), false});
  }
  const BoundedSupport support = bounded_support(scheme);
  if (support.tau) {
    rep.items.push_back({check::compact_support, CheckStatus::pass, *support.tau, "tau = " + fmt(*support.tau), false});
  } else {
    rep.items.push_back({check::compact_support, CheckStatus::fail, 0.0, "weights are not declared bounded", false});
  }
  if (!is_constant(schedule)) {
    rep.items.push_back({check::gmc_step, CheckStatus::fail, 0.0, "needs a constant step", false});
  } else if (!support.tau) {
    rep.items.push_back({check::gmc_step, CheckStatus::fail, 0.0, "needs bounded weights", false});
  } else {
    const double v = sup_alpha * *support.tau * *support.tau * wp.norm_xx;
    rep.items.push_back(
        {check::gmc_step, status(v < 2.0), 2.0 - v, "alpha * tau^2 * ||X^T X|| = " + fmt(v) + " (must be < 2)", false});
  }
  return rep;
}

double gd_rate_bound(const WeightedProblem& wp_identity, const StepSchedule& schedule, std::int64_t k,
                     const Vector& w1) {
  if (!wp_identity.is_unweighted()) {
    throw InvalidArgument("gd_rate_bound needs the unweighted problem (M2 = I)");
  }
  validate(schedule);
  const double v = schedule_sup(schedule) * wp_identity.norm_xx;
  if (!(v < 1.0)) {
    throw AssumptionError("step size violated: sup alpha_k * ||X^T X|| = " + fmt(v) + " is not < 1");
  }
  return std::exp(-wp_identity.sigma_min_plus_xx_hat * schedule_partial_sum(schedule, k)) *
         (w1 - wp_identity.w_hat).norm();
}

double mean_rate_bound(const MomentContext& ctx, std::int64_t k, const Vector& w1) {
  const double v = schedule_sup(ctx.schedule) * ctx.wp.norm_xx_hat;
  if (!(v < 1.0)) {
    throw AssumptionError("step size violated: sup alpha_k * ||X^T M2 X|| = " + fmt(v) + " is not < 1");
  }
  return std::exp(-ctx.sigma() * schedule_partial_sum(ctx.schedule, k)) * (w1 - ctx.wp.w_hat).norm();
}

double riemann_zeta(double s) {
  if (!(s > 1.0)) throw InvalidArgument("zeta(s) needs s > 1");
  return std::riemann_zeta(s);
}

VarianceConstants var_constants(const MomentContext& ctx, const Vector& w1, double stationary_tol) {
  require_variance_step(ctx);
  const Vector e = w1 - ctx.wp.w_hat;
  const double nsd = ctx.norm_sigma_d();
  const double nx = ctx.wp.norm_x;
  const double nr = ctx.residual.norm();

  VarianceConstants out;
  out.c0 = e.squaredNorm() + 2.0 * nx * nx * nx * nsd * e.norm() * nr;
  if (const auto* h = std::get_if<HarmonicStep>(&ctx.schedule)) {
    const double a = h->alpha;
    const double as = a * ctx.sigma();
    out.c1 = out.c0 * (1.0 + a * std::numbers::pi * std::numbers::pi / 6.0) +
             nx * nx * nsd * nr * nr * std::exp(as * std::numbers::egamma) * a * riemann_zeta(2.0 - as);
  }
  if (is_constant(ctx.schedule)) {
    out.stationary_norm = spectral_norm(stationary_second_moment(ctx, stationary_tol));
    out.c2 = out.c0 + *out.stationary_norm;
  }
  return out;
}

double constant_step_envelope(double c2, double alpha, double sigma, std::int64_t k) {
  const double kk = static_cast<double>(k);
  return c2 * (2.0 + kk * alpha * alpha) * std::exp(-alpha * sigma * (kk - 1.0));
}

double harmonic_step_envelope(double c1, double alpha, double sigma, std::int64_t k) {
  return c1 * std::pow(static_cast<double>(k), -alpha * sigma);
}

GmcRate gmc_rate(const WeightedProblem& wp, double alpha, double tau, double q) {
  if (!(alpha > 0.0)) throw InvalidArgument("gmc_rate needs alpha > 0");
  if (!(q >= 1.0)) throw InvalidArgument("gmc_rate needs q >= 1");
  if (!(tau >= 0.0)) throw InvalidArgument("gmc_rate needs tau >= 0");
  const double t = alpha * tau * tau * wp.norm_xx;
  if (!(t < 2.0)) {
    throw AssumptionError("contraction step below 2/(tau^2 ||X^T X||) violated: alpha * tau^2 * ||X^T X|| = " + fmt(t) +
                          " is not < 2");
  }
  GmcRate out;
  out.q = q;
  out.bound_qq = std::max(0.0, 1.0 - alpha * (2.0 - t) * wp.sigma_min_plus_xx_hat);
  out.r_q = std::pow(out.bound_qq, 1.0 / q);
  return out;
}

PointBudget conv_point_budget(const MomentContext& ctx, double tau, double epsilon, double d, double c3) {
  if (!(epsilon > 0.0)) throw InvalidArgument("conv_point_budget needs epsilon > 0");
  if (!(d > 0.0)) throw InvalidArgument("conv_point_budget needs d > 0");
  if (!(c3 > 0.0)) throw InvalidArgument("conv_point_budget needs C3 > 0");
  if (!is_constant(ctx.schedule)) throw InvalidArgument("conv_point_budget needs a constant step schedule");
  const double nr = ctx.residual.norm();
  if (nr <= 1e-10 * std::max(1.0, ctx.wp.y().norm())) {
    throw AssumptionError(
        "realizable case: residual Y - X w_hat vanishes, so the point-mass budget does not apply; the iterates "
        "collapse onto w_hat instead");
  }
  const double alpha = std::get<ConstantStep>(ctx.schedule).alpha;
  const double t = alpha * tau * tau * ctx.wp.norm_xx;
  if (!(t < 2.0)) {
    throw AssumptionError("contraction step below 2/(tau^2 ||X^T X||) violated: alpha * tau^2 * ||X^T X|| = " + fmt(t) +
                          " is not < 2");
  }
  const double nsd = ctx.norm_sigma_d();
  PointBudget out;
  out.c3 = c3;
  out.alpha_max = nsd == 0.0 ? std::numeric_limits<double>::infinity()
                             : ctx.sigma() * epsilon * epsilon / (d * nsd * ctx.wp.norm_xx * nr);
  out.k_threshold = 2.0 * std::log(2.0 * c3 / epsilon) / (alpha * (2.0 - t) * ctx.sigma());
  out.k_min = out.k_threshold < 1.0 ? 1 : static_cast<std::int64_t>(std::floor(out.k_threshold)) + 1;
  return out;
}

double default_c3(const WeightedProblem& wp, const Vector& w1) {
  return 10.0 * std::max((w1 - wp.w_hat).norm(), std::numeric_limits<double>::min());
}

RiskBounds asym_risk_bounds(const WeightedProblem& wp, const Vector& w_star, const Matrix& sigma_eps) {
  const Index n = wp.n();
  if (w_star.size() != wp.d()) {
    throw DimensionError("w_star has length " + std::to_string(w_star.size()) + ", expected " + std::to_string(wp.d()));
  }
  if (sigma_eps.rows() != n || sigma_eps.cols() != n) {
    throw DimensionError("noise covariance must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  require_finite(sigma_eps, "noise covariance");
  const double scale_s = std::max(1.0, sigma_eps.cwiseAbs().maxCoeff());
  if ((sigma_eps - sigma_eps.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale_s) {
    throw InvalidArgument("noise covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_eps, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale_s) {
    throw InvalidArgument("noise covariance is not positive semi-definite (min eigenvalue " +
                          fmt(eig.eigenvalues().minCoeff()) + ")");
  }

  RiskBounds out;
  out.scale = wp.norm_x;
  out.rescaled = std::abs(out.scale - 1.0) > 1e-12;
  const Matrix x = wp.x() / out.scale;
  const Matrix sig = sigma_eps / (out.scale * out.scale);
  const Vector root = wp.m2.cwiseSqrt();
  const Matrix b = pseudo_inverse(root.asDiagonal() * x) * root.asDiagonal();
  const Matrix resid_map = Matrix::Identity(n, n) - x * b;

  out.bias = (wp.ker_projector * w_star).squaredNorm();
  out.variance_term = (b * sig * b.transpose()).trace();
  out.upper_extra = (resid_map * sig * resid_map.transpose()).trace();
  out.lower = out.bias + out.variance_term;
  out.upper = out.lower + out.upper_extra;
  return out;
}

SpeedupReport condition_speedup(const WeightedProblem& wp_uniform, const WeightedProblem& wp_weighted) {
  const Matrix& xu = wp_uniform.x();
  const Matrix& xw = wp_weighted.x();
  if (xu.rows() != xw.rows() || xu.cols() != xw.cols() ||
      (xu - xw).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, xu.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("condition_speedup needs the same design matrix in both problems");
  }
  auto kappa = [](const Vector& m) { return m.maxCoeff() / m.minCoeff(); };
  SpeedupReport out;
  out.ratio = (wp_weighted.sigma_min_plus_xx_hat / wp_weighted.norm_xx_hat) /
              (wp_uniform.sigma_min_plus_xx_hat / wp_uniform.norm_xx_hat);
  out.bound = kappa(wp_weighted.m2) * kappa(wp_uniform.m2);
  if (out.ratio > out.bound + 1e-9) {
    throw NumericalError("condition speed-up " + fmt(out.ratio) + " exceeds its bound " + fmt(out.bound));
  }
  return out;
}

VarianceCeiling variance_ceiling(const MomentContext& ctx) {
  if (!is_constant(ctx.schedule)) throw InvalidArgument("variance_ceiling needs a constant step schedule");
  require_variance_step(ctx);
  const double alpha = std::get<ConstantStep>(ctx.schedule).alpha;
  const double s = ctx.sigma();
  const double nsd = ctx.norm_sigma_d();
  const double nxx = ctx.wp.norm_xx;
  const double r2 = ctx.residual.squaredNorm();
  VarianceCeiling out;
  out.step_form = alpha * nxx * nsd * r2 / s;
  out.spectral_form = nxx * nsd * r2 / (s * s + nxx * nxx * nsd);
  out.coarse_form = r2 / nxx;
  out.value = std::min({out.step_form, out.spectral_form, out.coarse_form});
  return out;
}

}  // namespace rwgd
