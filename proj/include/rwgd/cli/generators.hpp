#pragma once

#include <filesystem>
#include <vector>

#include "rwgd/cli/config.hpp"
#include "rwgd/dynamics.hpp"
#include "rwgd/linalg.hpp"
#include "rwgd/weighting.hpp"

namespace rwgd::cli {

struct GeneratedData {
  Dataset data;
  std::vector<bool> rescaled;  // rows multiplied by rescale_factor
};

GeneratedData generate_dataset(const DatasetSpec& spec);
GeneratedData generate_dataset(const DatasetSpec& spec, const NoiseMap& noise_override);
Dataset read_dataset_csv(const std::filesystem::path& path);
// Per-row standard deviations of a noise map over n rows.
Vector noise_std(const NoiseMap& map, const std::vector<bool>& rescaled);

WeightingScheme resolve_scheme(const SchemeSpec& spec, const Matrix& x);
// alpha_fraction is taken relative to norm_xx_hat.
StepSchedule resolve_schedule(const ScheduleSpec& spec, double norm_xx_hat);

std::vector<OracleInstance> generate_oracle_instances(const OracleGenerated& spec, std::int64_t max_outcomes);

}  // namespace rwgd::cli
