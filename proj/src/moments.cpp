#include "rwgd/moments.hpp"

#include <cmath>
#include <sstream>

#include "rwgd/errors.hpp"

namespace rwgd {

namespace {

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// alpha^2 X^T (Sigma_D . B) X
Matrix noise_term(const MomentContext& ctx, const Matrix& b, double alpha) {
  const Matrix& x = ctx.wp.x();
  return alpha * alpha * (x.transpose() * ctx.sigma_d.cwiseProduct(b) * x);
}

}  // namespace

double MomentContext::norm_sigma_d() const { return spectral_norm(sigma_d); }

MomentContext make_moment_context(const WeightedProblem& wp, const Matrix& sigma_d, const StepSchedule& schedule,
                                  bool enforce) {
  validate(schedule);
  if (sigma_d.rows() != wp.n() || sigma_d.cols() != wp.n()) {
    throw DimensionError("Sigma_D is " + std::to_string(sigma_d.rows()) + "x" + std::to_string(sigma_d.cols()) +
                         ", expected " + std::to_string(wp.n()) + "x" + std::to_string(wp.n()));
  }
  require_finite(sigma_d, "Sigma_D");
  MomentContext ctx{wp, sym(sigma_d), schedule, wp.residual};
  if (enforce) {
    const double sup = schedule_sup(schedule) * wp.norm_xx_hat;
    if (!(sup < 1.0)) {
      std::ostringstream msg;
      msg << "step size violated: sup alpha_k * ||X^T M2 X|| = " << sup << " is not < 1";
      throw AssumptionError(msg.str());
    }
  }
  return ctx;
}

MomentContext make_moment_context(const WeightedProblem& wp, const WeightingMoments& moments,
                                  const StepSchedule& schedule, bool enforce) {
  return make_moment_context(wp, moments.sigma_d, schedule, enforce);
}

double variance_step_limit(const MomentContext& ctx) {
  const double s = ctx.sigma();
  const double nx2 = ctx.wp.norm_xx;
  return s / (s * s + nx2 * nx2 * ctx.norm_sigma_d());
}

void require_variance_step(const MomentContext& ctx) {
  const double limit = variance_step_limit(ctx);
  const double sup = schedule_sup(ctx.schedule);
  if (!(sup < limit)) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "variance step bound violated: alpha = " << sup
        << " is not < sigma/(sigma^2 + ||X||^4 ||Sigma_D||) = " << limit;
    throw AssumptionError(msg.str());
  }
}

Vector first_moment_step(const Vector& m, const MomentContext& ctx, std::int64_t k) {
  return m - ctx.alpha(k) * (ctx.wp.xx_hat * m);
}

Matrix apply_S_lin(const Matrix& a, const MomentContext& ctx, double alpha) {
  const Matrix& x = ctx.wp.x();
  const Matrix b = Matrix::Identity(ctx.wp.d(), ctx.wp.d()) - alpha * ctx.wp.xx_hat;
  return sym(b * a * b + noise_term(ctx, x * a * x.transpose(), alpha));
}

Matrix S_intercept(const MomentContext& ctx, double alpha) {
  return sym(noise_term(ctx, ctx.residual * ctx.residual.transpose(), alpha));
}

Matrix apply_S(const Matrix& a, const MomentContext& ctx, std::int64_t k) {
  const double alpha = ctx.alpha(k);
  const Matrix& x = ctx.wp.x();
  const Matrix b = Matrix::Identity(ctx.wp.d(), ctx.wp.d()) - alpha * ctx.wp.xx_hat;
  const Matrix inner = x * a * x.transpose() + ctx.residual * ctx.residual.transpose();
  return sym(b * a * b + noise_term(ctx, inner, alpha));
}

Matrix remainder_rho(const Vector& m, const MomentContext& ctx, std::int64_t k) {
  const Vector xm = ctx.wp.x() * m;
  const Matrix cross = xm * ctx.residual.transpose();
  return sym(-noise_term(ctx, cross + cross.transpose(), ctx.alpha(k)));
}

std::vector<MomentState> propagate(const MomentContext& ctx, const Vector& m1, std::int64_t K,
                                   bool require_orthogonal_start) {
  if (K < 0) throw InvalidArgument("horizon K must be >= 0");
  if (m1.size() != ctx.wp.d()) {
    throw DimensionError("initial mean has length " + std::to_string(m1.size()) + ", expected " +
                         std::to_string(ctx.wp.d()));
  }
  if (require_orthogonal_start) {
    const double leak = (ctx.wp.ker_projector * m1).norm();
    if (leak > 1e-10 * std::max(1.0, m1.norm())) {
      std::ostringstream msg;
      msg << "orthogonal start violated: initial error has kernel component of norm " << leak;
      throw AssumptionError(msg.str());
    }
  }
  std::vector<MomentState> out;
  out.reserve(static_cast<std::size_t>(K + 1));
  out.push_back({1, m1, m1 * m1.transpose()});
  for (std::int64_t k = 1; k <= K; ++k) {
    const MomentState& cur = out.back();
    MomentState next;
    next.k = k + 1;
    next.a = apply_S(cur.a, ctx, k) + remainder_rho(cur.m, ctx, k);
    next.m = first_moment_step(cur.m, ctx, k);
    out.push_back(std::move(next));
  }
  return out;
}

Matrix stationary_second_moment(const MomentContext& ctx, double tol) {
  if (!is_constant(ctx.schedule)) {
    throw InvalidArgument("stationary second moment needs a constant step schedule");
  }
  require_variance_step(ctx);
  const double alpha = std::get<ConstantStep>(ctx.schedule).alpha;
  const double threshold = tol * alpha * ctx.sigma();

  Matrix term = S_intercept(ctx, alpha);
  Matrix total = Matrix::Zero(ctx.wp.d(), ctx.wp.d());
  if (term.norm() == 0.0) return total;
  // Frobenius norm bounds the spectral norm, so this stopping rule is at least as strict.
  constexpr std::int64_t max_terms = 50'000'000;
  for (std::int64_t l = 0; l < max_terms; ++l) {
    total += term;
    term = apply_S_lin(term, ctx, alpha);
    if (term.norm() <= threshold) return sym(total);
  }
  throw NumericalError("Neumann series for the stationary second moment did not reach tolerance");
}

double s_lin_contraction_factor(const MomentContext& ctx) {
  if (!is_constant(ctx.schedule)) {
    throw InvalidArgument("contraction factor needs a constant step schedule");
  }
  require_variance_step(ctx);
  return 1.0 - std::get<ConstantStep>(ctx.schedule).alpha * ctx.sigma();
}

}  // namespace rwgd
