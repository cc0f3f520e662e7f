#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rwgd/linalg.hpp"
#include "rwgd/weighting.hpp"

namespace rwgd {

struct ConstantStep {
  double alpha = 0.0;
};

// alpha_k = alpha / k
struct HarmonicStep {
  double alpha = 0.0;
};

struct ExplicitSteps {
  std::vector<double> values;
};

using StepSchedule = std::variant<ConstantStep, HarmonicStep, ExplicitSteps>;

void validate(const StepSchedule& s);
double schedule_value(const StepSchedule& s, std::int64_t k);
double schedule_sup(const StepSchedule& s);
// Sum of alpha_1..alpha_k (k = 0 gives 0).
double schedule_partial_sum(const StepSchedule& s, std::int64_t k);
bool is_constant(const StepSchedule& s);
std::string schedule_id(const StepSchedule& s);

Vector full_batch_step(const Vector& w, const WeightedProblem& wp, double alpha);
Vector weighted_step(const Vector& w, const Matrix& x, const Vector& y, double alpha, const Vector& d);

struct TrajectoryOptions {
  bool enforce_assumptions = true;
  std::uint64_t trajectory_index = 0;
  bool record_weights = false;
  std::int64_t full_storage_limit = 100000;
};

struct TrajectoryRecord {
  std::vector<std::int64_t> ks;  // iteration index of each stored iterate
  std::vector<Vector> iterates;  // iterates[j] is w_{ks[j]}
  std::vector<Vector> weights;   // D_k diagonals, k = 1..K, when recorded
  std::uint64_t seed = 0;
  StepSchedule schedule;
  std::string scheme_id;

  const Vector& final_iterate() const { return iterates.back(); }
};

// Checkpoints kept for a horizon of K steps (1-based iteration indices).
std::vector<std::int64_t> checkpoint_grid(std::int64_t K, std::int64_t full_storage_limit);

// Throws AssumptionError unless the step-size, orthogonal-start and
// nonsingular-M2 conditions hold.
void require_trajectory_assumptions(const WeightedProblem& wp, const WeightingScheme& scheme,
                                    const StepSchedule& schedule, const Vector& w1);

TrajectoryRecord run_trajectory(const WeightedProblem& wp, const WeightingScheme& scheme, const StepSchedule& schedule,
                                const Vector& w1, std::int64_t K, std::uint64_t seed,
                                const TrajectoryOptions& options = {});

std::pair<TrajectoryRecord, TrajectoryRecord> run_coupled_pair(const WeightedProblem& wp, const WeightingScheme& scheme,
                                                               const StepSchedule& schedule, const Vector& u1,
                                                               const Vector& v1, std::int64_t K, std::uint64_t seed,
                                                               const TrajectoryOptions& options = {});

}  // namespace rwgd
