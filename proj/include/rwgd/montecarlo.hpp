#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rwgd/dynamics.hpp"
#include "rwgd/linalg.hpp"
#include "rwgd/moments.hpp"
#include "rwgd/weighting.hpp"

namespace rwgd {

struct EnsembleOptions {
  bool enforce_assumptions = true;
  int threads = 1;
  bool track_second_moment = true;
};

struct EnsembleSummary {
  std::int64_t K = 0;
  std::int64_t n_traj = 0;
  std::uint64_t seed_base = 0;
  std::vector<std::int64_t> ks;    // 1..K+1
  std::vector<Vector> mean_error;  // E[w_k - w_hat]
  std::vector<double> mean_error_norm;
  std::vector<Matrix> second_moment;    // E[(w_k - w_hat)(w_k - w_hat)^T], when tracked
  std::vector<double> sq_distance;      // E||w_k - w_hat||^2
  std::vector<double> standard_errors;  // of sq_distance; NaN when n_traj = 1
};

// Trajectory t draws D_k from CounterRng(seed, t, k). Results do not depend on
// the thread count.
EnsembleSummary ensemble_moments(const WeightedProblem& wp, const WeightingScheme& scheme, const StepSchedule& schedule,
                                 const Vector& w1, std::int64_t K, std::int64_t n_traj, std::uint64_t seed,
                                 const EnsembleOptions& options = {});

double w2_to_point_mass(const std::vector<Vector>& samples, const Vector& center);

// Iterate w_{K+1} of every trajectory in an ensemble.
std::vector<Vector> final_iterates(const WeightedProblem& wp, const WeightingScheme& scheme,
                                   const StepSchedule& schedule, const Vector& w1, std::int64_t K, std::int64_t n_traj,
                                   std::uint64_t seed, const EnsembleOptions& options = {});

struct ContractionEstimate {
  std::vector<std::int64_t> ks;  // iterate index, 1..K+1
  std::vector<double> mean_q;    // E||u_k - v_k||^q
  std::vector<double> se_q;
  std::vector<double> moment_root;  // (E||u_k - v_k||^q)^{1/q}
  std::vector<double> se_root;      // delta-method standard error of moment_root
};

ContractionEstimate gmc_contraction_estimate(const WeightedProblem& wp, const WeightingScheme& scheme, double alpha,
                                             const Vector& u1, const Vector& v1, std::int64_t K, double q,
                                             std::int64_t n_pairs, std::uint64_t seed,
                                             const EnsembleOptions& options = {});

struct OracleBudget {
  std::int64_t support_size = 0;
  std::int64_t K = 0;
  std::int64_t max_outcomes = 1 << 16;
};

// Exact moments by exhaustive enumeration of weight sequences; states k = 1..K+1.
std::vector<MomentState> enumeration_oracle(const WeightedProblem& wp, const WeightingScheme& scheme,
                                            const StepSchedule& schedule, const Vector& w1, std::int64_t K,
                                            std::int64_t max_outcomes = 1 << 16);

// Template for regenerating Y = X w* + eps.
struct RiskInstance {
  Matrix x;
  Vector w_star;
  Matrix sigma_eps;
};

struct RiskCurve {
  std::vector<std::int64_t> ks;  // 1..K+1
  std::vector<double> mean;      // E||w_k - w*||^2 over replicates
  std::vector<double> se;
};

RiskCurve risk_curve(const RiskInstance& inst, const WeightingScheme& scheme, double alpha, const Vector& w1,
                     std::int64_t K, std::int64_t n_rep, std::uint64_t seed, const EnsembleOptions& options = {});

struct RiskEstimate {
  double estimate = 0.0;
  double se = 0.0;
  std::int64_t k_burn_min = 0;
  std::int64_t k_burn_max = 0;
};

// Bound-driven horizon: smallest k with the constant-step envelope, built
// from C0 plus the variance ceiling, below 1e-6.
std::int64_t default_burn_in(const MomentContext& ctx, const Vector& w1);

RiskEstimate risk_limit_estimate(const RiskInstance& inst, const WeightingScheme& scheme, double alpha,
                                 std::optional<std::int64_t> k_burn, std::int64_t n_rep, std::uint64_t seed,
                                 const Vector& w1, const EnsembleOptions& options = {});

// Draw eps ~ N(0, sigma_eps) for replicate `rep`.
Vector draw_noise(const Matrix& sigma_eps, std::uint64_t seed, std::uint64_t rep);

}  // namespace rwgd
