#include "rwgd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rwgd/bounds.hpp"
#include "rwgd/errors.hpp"

namespace rwgd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// w + alpha * X^T diag(d^2) (Y - X w), skipping rows with d_i = 0.
Vector step_kernel(const Vector& w, const Matrix& x, const Vector& y, double alpha, const Vector* d) {
  Vector grad = Vector::Zero(x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    double sq = 1.0;
    if (d != nullptr) {
      const double di = (*d)(i);
      if (di == 0.0) continue;
      sq = di * di;
    }
    const double resid = y(i) - x.row(i).dot(w);
    grad.noalias() += (sq * resid) * x.row(i).transpose();
  }
  return w + alpha * grad;
}

void check_dims(const Vector& w, const Matrix& x, const Vector& y) {
  if (w.size() != x.cols() || y.size() != x.rows()) {
    throw DimensionError("step: X is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + ", w has " +
                         std::to_string(w.size()) + " entries and Y has " + std::to_string(y.size()));
  }
}

}  // namespace

void validate(const StepSchedule& s) {
  std::visit(overloaded{
                 [](const ConstantStep& c) {
                   if (!(c.alpha > 0.0) || !std::isfinite(c.alpha))
                     throw InvalidArgument("constant step size must be positive and finite");
                 },
                 [](const HarmonicStep& h) {
                   if (!(h.alpha > 0.0) || !std::isfinite(h.alpha))
                     throw InvalidArgument("harmonic step size must be positive and finite");
                 },
                 [](const ExplicitSteps& e) {
                   for (std::size_t i = 0; i < e.values.size(); ++i) {
                     if (!(e.values[i] > 0.0) || !std::isfinite(e.values[i])) {
                       throw InvalidArgument("explicit step " + std::to_string(i + 1) + " must be positive and finite");
                     }
                   }
                 },
             },
             s);
}

double schedule_value(const StepSchedule& s, std::int64_t k) {
  if (k < 1) throw InvalidArgument("step index must be >= 1, got " + std::to_string(k));
  return std::visit(overloaded{
                        [](const ConstantStep& c) { return c.alpha; },
                        [k](const HarmonicStep& h) { return h.alpha / static_cast<double>(k); },
                        [k](const ExplicitSteps& e) {
                          if (static_cast<std::size_t>(k) > e.values.size()) {
                            throw InvalidArgument("explicit step schedule exhausted at k = " + std::to_string(k) +
                                                  " (length " + std::to_string(e.values.size()) + ")");
                          }
                          return e.values[static_cast<std::size_t>(k - 1)];
                        },
                    },
                    s);
}

double schedule_sup(const StepSchedule& s) {
  return std::visit(overloaded{
                        [](const ConstantStep& c) { return c.alpha; },
                        [](const HarmonicStep& h) { return h.alpha; },
                        [](const ExplicitSteps& e) {
                          return e.values.empty() ? 0.0 : *std::max_element(e.values.begin(), e.values.end());
                        },
                    },
                    s);
}

double schedule_partial_sum(const StepSchedule& s, std::int64_t k) {
  if (k <= 0) return 0.0;
  if (const auto* c = std::get_if<ConstantStep>(&s)) return c->alpha * static_cast<double>(k);
  double sum = 0.0;
  for (std::int64_t l = 1; l <= k; ++l) sum += schedule_value(s, l);
  return sum;
}

bool is_constant(const StepSchedule& s) { return std::holds_alternative<ConstantStep>(s); }

std::string schedule_id(const StepSchedule& s) {
  std::ostringstream out;
  out.precision(17);
  std::visit(overloaded{
                 [&](const ConstantStep& c) { out << "constant(" << c.alpha << ")"; },
                 [&](const HarmonicStep& h) { out << "harmonic(" << h.alpha << ")"; },
                 [&](const ExplicitSteps& e) { out << "explicit(" << e.values.size() << " values)"; },
             },
             s);
  return out.str();
}

Vector full_batch_step(const Vector& w, const WeightedProblem& wp, double alpha) {
  check_dims(w, wp.x(), wp.y());
  if (!(alpha * wp.norm_xx < 1.0)) {
    std::ostringstream msg;
    msg << "step size violated: alpha * ||X^T X|| must be < 1: alpha * ||X^T X|| = " << alpha * wp.norm_xx;
    throw AssumptionError(msg.str());
  }
  return step_kernel(w, wp.x(), wp.y(), alpha, nullptr);
}

Vector weighted_step(const Vector& w, const Matrix& x, const Vector& y, double alpha, const Vector& d) {
  check_dims(w, x, y);
  if (d.size() != x.rows()) {
    throw DimensionError("weighted step: weight vector has " + std::to_string(d.size()) + " entries, expected " +
                         std::to_string(x.rows()));
  }
  return step_kernel(w, x, y, alpha, &d);
}

std::vector<std::int64_t> checkpoint_grid(std::int64_t K, std::int64_t full_storage_limit) {
  std::vector<std::int64_t> ks;
  const std::int64_t last = K + 1;
  if (last <= full_storage_limit) {
    for (std::int64_t k = 1; k <= last; ++k) ks.push_back(k);
    return ks;
  }
  for (std::int64_t k = 1; k <= std::min<std::int64_t>(100, last); ++k) ks.push_back(k);
  // 50 points per decade beyond the first hundred.
  for (int j = 100;; ++j) {
    const auto k = static_cast<std::int64_t>(std::llround(std::pow(10.0, j / 50.0)));
    if (k >= last) break;
    if (k > ks.back()) ks.push_back(k);
  }
  ks.push_back(last);
  return ks;
}

void require_trajectory_assumptions(const WeightedProblem& wp, const WeightingScheme& scheme,
                                    const StepSchedule& schedule, const Vector& w1) {
  const AssumptionReport report = assumption_check(wp, scheme, schedule, w1);
  for (const auto& item : report.items) {
    if (item.required_for_dynamics && item.status == CheckStatus::fail) {
      throw AssumptionError(item.name + " violated: " + item.detail);
    }
  }
}

namespace {

void check_run_inputs(const WeightedProblem& wp, const WeightingScheme& scheme, const StepSchedule& schedule,
                      const Vector& w1, std::int64_t K) {
  validate(scheme);
  validate(schedule);
  if (K < 0) throw InvalidArgument("horizon K must be >= 0");
  if (dimension(scheme) != wp.n()) {
    throw DimensionError("weighting scheme has dimension " + std::to_string(dimension(scheme)) + " but the data has " +
                         std::to_string(wp.n()) + " points");
  }
  if (w1.size() != wp.d()) {
    throw DimensionError("initial iterate has length " + std::to_string(w1.size()) + ", expected " +
                         std::to_string(wp.d()));
  }
  if (const auto* e = std::get_if<ExplicitSteps>(&schedule)) {
    if (static_cast<std::int64_t>(e->values.size()) < K) {
      throw InvalidArgument("explicit step schedule has " + std::to_string(e->values.size()) +
                            " values but K = " + std::to_string(K));
    }
  }
}

}  // namespace

TrajectoryRecord run_trajectory(const WeightedProblem& wp, const WeightingScheme& scheme, const StepSchedule& schedule,
                                const Vector& w1, std::int64_t K, std::uint64_t seed,
                                const TrajectoryOptions& options) {
  check_run_inputs(wp, scheme, schedule, w1, K);
  if (options.enforce_assumptions) require_trajectory_assumptions(wp, scheme, schedule, w1);

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.schedule = schedule;
  rec.scheme_id = scheme_id(scheme);
  const std::vector<std::int64_t> grid = checkpoint_grid(K, options.full_storage_limit);
  rec.ks.reserve(grid.size());
  rec.iterates.reserve(grid.size());

  std::size_t next = 0;
  Vector w = w1;
  for (std::int64_t k = 1;; ++k) {
    if (next < grid.size() && grid[next] == k) {
      rec.ks.push_back(k);
      rec.iterates.push_back(w);
      ++next;
    }
    if (k > K) break;
    CounterRng rng(seed, options.trajectory_index, static_cast<std::uint64_t>(k));
    const Vector d = sample_weights(scheme, rng);
    if (options.record_weights) rec.weights.push_back(d);
    w = step_kernel(w, wp.x(), wp.y(), schedule_value(schedule, k), &d);
  }
  return rec;
}

std::pair<TrajectoryRecord, TrajectoryRecord> run_coupled_pair(const WeightedProblem& wp, const WeightingScheme& scheme,
                                                               const StepSchedule& schedule, const Vector& u1,
                                                               const Vector& v1, std::int64_t K, std::uint64_t seed,
                                                               const TrajectoryOptions& options) {
  check_run_inputs(wp, scheme, schedule, u1, K);
  check_run_inputs(wp, scheme, schedule, v1, K);
  if (options.enforce_assumptions) {
    require_trajectory_assumptions(wp, scheme, schedule, u1);
    require_trajectory_assumptions(wp, scheme, schedule, v1);
  }

  std::pair<TrajectoryRecord, TrajectoryRecord> out;
  for (TrajectoryRecord* rec : {&out.first, &out.second}) {
    rec->seed = seed;
    rec->schedule = schedule;
    rec->scheme_id = scheme_id(scheme);
  }
  const std::vector<std::int64_t> grid = checkpoint_grid(K, options.full_storage_limit);
  std::size_t next = 0;
  Vector u = u1;
  Vector v = v1;
  for (std::int64_t k = 1;; ++k) {
    if (next < grid.size() && grid[next] == k) {
      out.first.ks.push_back(k);
      out.first.iterates.push_back(u);
      out.second.ks.push_back(k);
      out.second.iterates.push_back(v);
      ++next;
    }
    if (k > K) break;
    CounterRng rng(seed, options.trajectory_index, static_cast<std::uint64_t>(k));
    const Vector d = sample_weights(scheme, rng);
    if (options.record_weights) {
      out.first.weights.push_back(d);
      out.second.weights.push_back(d);
    }
    const double alpha = schedule_value(schedule, k);
    u = step_kernel(u, wp.x(), wp.y(), alpha, &d);
    v = step_kernel(v, wp.x(), wp.y(), alpha, &d);
  }
  return out;
}

}  // namespace rwgd
