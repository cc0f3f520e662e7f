#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwgd/dynamics.hpp"
#include "rwgd/linalg.hpp"
#include "rwgd/moments.hpp"
#include "rwgd/weighting.hpp"

namespace rwgd {

enum class CheckStatus { pass, fail, not_applicable };

std::string to_string(CheckStatus s);

struct AssumptionItem {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double margin = 0.0;  // positive when satisfied
  std::string detail;
  bool required_for_dynamics = false;
};

struct AssumptionReport {
  std::vector<AssumptionItem> items;

  bool all_pass() const;
  const AssumptionItem& item(const std::string& name) const;
  bool passes(const std::string& name) const;
};

namespace check {
inline constexpr const char* step_size = "step size";
inline constexpr const char* divergent_sum = "divergent step sum";
inline constexpr const char* orthogonal_start = "orthogonal start";
inline constexpr const char* nonsingular_m2 = "nonsingular M2";
inline constexpr const char* variance_step = "variance step bound";
inline constexpr const char* compact_support = "compact support";
inline constexpr const char* gmc_step = "contraction step below 2/(tau^2 ||X^T X||)";
}  // namespace check

AssumptionReport assumption_check(const WeightedProblem& wp, const WeightingScheme& scheme,
                                  const StepSchedule& schedule, const Vector& w1);

double gd_rate_bound(const WeightedProblem& wp_identity, const StepSchedule& schedule, std::int64_t k,
                     const Vector& w1);
double mean_rate_bound(const MomentContext& ctx, std::int64_t k, const Vector& w1);

struct VarianceConstants {
  double c0 = 0.0;
  std::optional<double> c1;  // harmonic schedules
  std::optional<double> c2;  // constant schedules
  std::optional<double> stationary_norm;
};

VarianceConstants var_constants(const MomentContext& ctx, const Vector& w1, double stationary_tol = 1e-12);

// Envelope for ||A_k - stationary|| under a constant step.
double constant_step_envelope(double c2, double alpha, double sigma, std::int64_t k);
// Envelope for ||A_{k+1}|| under harmonic steps alpha / k.
double harmonic_step_envelope(double c1, double alpha, double sigma, std::int64_t k);

double riemann_zeta(double s);

struct GmcRate {
  double bound_qq = 0.0;  // bound on r_q^q
  double r_q = 0.0;
  double q = 2.0;
};

GmcRate gmc_rate(const WeightedProblem& wp, double alpha, double tau, double q);

struct PointBudget {
  double alpha_max = 0.0;
  double k_threshold = 0.0;  // k must exceed this
  std::int64_t k_min = 1;    // smallest admissible integer, at least 1
  double c3 = 0.0;
};

PointBudget conv_point_budget(const MomentContext& ctx, double tau, double epsilon, double d, double c3);
double default_c3(const WeightedProblem& wp, const Vector& w1);

struct RiskBounds {
  double lower = 0.0;
  double upper = 0.0;
  double bias = 0.0;
  double variance_term = 0.0;
  double upper_extra = 0.0;
  double scale = 1.0;  // ||X|| before normalisation
  bool rescaled = false;
};

RiskBounds asym_risk_bounds(const WeightedProblem& wp, const Vector& w_star, const Matrix& sigma_eps);

struct SpeedupReport {
  double ratio = 0.0;
  double bound = 0.0;
};

SpeedupReport condition_speedup(const WeightedProblem& wp_uniform, const WeightedProblem& wp_weighted);

struct VarianceCeiling {
  double value = 0.0;  // the tightest line
  double step_form = 0.0;
  double spectral_form = 0.0;
  double coarse_form = 0.0;
};

VarianceCeiling variance_ceiling(const MomentContext& ctx);

}  // namespace rwgd
