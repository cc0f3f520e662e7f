#pragma once

#include <cstdint>
#include <vector>

#include "rwgd/dynamics.hpp"
#include "rwgd/linalg.hpp"
#include "rwgd/weighting.hpp"

namespace rwgd {

struct MomentContext {
  WeightedProblem wp;
  Matrix sigma_d;
  StepSchedule schedule;
  Vector residual;

  double alpha(std::int64_t k) const { return schedule_value(schedule, k); }
  double sigma() const { return wp.sigma_min_plus_xx_hat; }
  double norm_sigma_d() const;
};

// Checks that sup alpha * ||X^T M2 X|| < 1 unless `enforce` is false.
MomentContext make_moment_context(const WeightedProblem& wp, const Matrix& sigma_d, const StepSchedule& schedule,
                                  bool enforce = true);
MomentContext make_moment_context(const WeightedProblem& wp, const WeightingMoments& moments,
                                  const StepSchedule& schedule, bool enforce = true);

// Largest admissible constant step in the second-moment results:
// sigma / (sigma^2 + ||X||^4 ||Sigma_D||).
double variance_step_limit(const MomentContext& ctx);
// Throws AssumptionError unless the schedule's supremum is below variance_step_limit.
void require_variance_step(const MomentContext& ctx);

struct MomentState {
  std::int64_t k = 1;
  Vector m;  // E[w_k - w_hat]
  Matrix a;  // E[(w_k - w_hat)(w_k - w_hat)^T]
};

Vector first_moment_step(const Vector& m, const MomentContext& ctx, std::int64_t k);
Matrix apply_S(const Matrix& a, const MomentContext& ctx, std::int64_t k);
Matrix apply_S_lin(const Matrix& a, const MomentContext& ctx, double alpha);
Matrix S_intercept(const MomentContext& ctx, double alpha);
Matrix remainder_rho(const Vector& m, const MomentContext& ctx, std::int64_t k);

// States k = 1..K+1 starting from the deterministic m1 (A_1 = m1 m1^T).
std::vector<MomentState> propagate(const MomentContext& ctx, const Vector& m1, std::int64_t K,
                                   bool require_orthogonal_start = true);

Matrix stationary_second_moment(const MomentContext& ctx, double tol = 1e-12);
double s_lin_contraction_factor(const MomentContext& ctx);

}  // namespace rwgd
