#pragma once

#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "rwgd/bounds.hpp"
#include "rwgd/cli/config.hpp"
#include "rwgd/montecarlo.hpp"

namespace rwgd::cli {

struct RunContext {
  int threads = 1;
  std::ostream* log = nullptr;  // warnings and progress; null is silent
  std::ostream* out = nullptr;  // bounds report
};

// Bound on E||w_k - w_hat||^2 from the second-moment envelopes, NaN where
// their step-size condition fails.
std::vector<double> sq_distance_envelope(const MomentContext& ctx, const Vector& w1, std::int64_t K);

struct SimulateResult {
  EnsembleSummary summary;
  std::vector<double> envelope;
};

struct MomentsResult {
  std::vector<MomentState> states;
  std::optional<Matrix> stationary;
  std::vector<double> envelope;
};

struct Figure1Result {
  std::vector<std::string> names;
  std::vector<EnsembleSummary> curves;
  std::vector<std::vector<double>> envelopes;
  double alpha = 0.0;
  // First k from which the second curve stays 3se below the first.
  std::optional<std::int64_t> crossover;
};

struct Figure2Panel {
  std::string name;
  std::vector<RiskCurve> curves;
  std::vector<RiskBounds> bounds;
};

struct Figure2Result {
  std::vector<std::string> names;
  std::vector<Figure2Panel> panels;
  double alpha = 0.0;
};

struct OracleRow {
  std::int64_t n = 0, d = 0, K = 0;
  double max_dev_m = 0.0;
  double max_dev_a = 0.0;
  bool pass = false;
};

struct OracleResult {
  std::vector<OracleRow> rows;
  bool all_pass = true;
};

SimulateResult cmd_simulate(const ExperimentConfig& config, const RunContext& run = {});
MomentsResult cmd_moments(const ExperimentConfig& config, const RunContext& run = {});
nlohmann::json cmd_bounds(const ExperimentConfig& config, const RunContext& run = {});
Figure1Result cmd_figure1(const ExperimentConfig& config, const RunContext& run = {});
Figure2Result cmd_figure2(const ExperimentConfig& config, const RunContext& run = {});
OracleResult cmd_oracle(const ExperimentConfig& config, const RunContext& run = {});

// First k from which b stays below a by z combined standard errors through
// the last point; empty when the last point already fails.
std::optional<std::int64_t> separation_start(const std::vector<std::int64_t>& ks, const std::vector<double>& a,
                                             const std::vector<double>& se_a, const std::vector<double>& b,
                                             const std::vector<double>& se_b, double z);

// Exit codes: 0 success, 1 assumption failure, 2 config, IO or budget
// error, 3 oracle mismatch.
int run_command(const std::string& name, const ExperimentConfig& config, const RunContext& run);

}  // namespace rwgd::cli
