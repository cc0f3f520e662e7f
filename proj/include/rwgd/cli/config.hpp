#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rwgd::cli {

// Standard normal design; a random subset of rows is multiplied by
// rescale_factor. Labels are X w* + label noise with a seeded w*.
struct GaussianRescaledSpec {
  std::int64_t n = 40;
  std::int64_t d = 60;
  double rescale_fraction = 0.2;
  double rescale_factor = 5.0;
  double entry_std = 1.0;
  double label_noise_std = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const GaussianRescaledSpec&) const = default;
};

// Per-row noise standard deviations, either listed or split between the
// rescaled rows and the rest.
struct NoiseMap {
  std::vector<double> per_row;
  std::optional<double> rescaled;
  std::optional<double> other;

  bool operator==(const NoiseMap&) const = default;
};

struct HeteroscedasticSpec {
  std::int64_t n = 40;
  std::int64_t d = 5;
  double rescale_fraction = 0.2;
  double rescale_factor = 5.0;
  double entry_std = 1.0;
  NoiseMap noise_map;
  std::vector<double> w_star;  // empty: drawn from the seed
  std::uint64_t seed = 0;

  bool operator==(const HeteroscedasticSpec&) const = default;
};

struct InlineData {
  std::vector<std::vector<double>> x;
  std::vector<double> y;

  bool operator==(const InlineData&) const = default;
};

// CSV with a header row; the last column is y, the others are x.
struct DataFile {
  std::string path;

  bool operator==(const DataFile&) const = default;
};

using DatasetSpec = std::variant<GaussianRescaledSpec, HeteroscedasticSpec, InlineData, DataFile>;

// type: identity | uniform | categorical | row_norm | bernoulli | fixed | continuous
struct SchemeSpec {
  std::string type = "uniform";
  std::vector<double> values;  // p for categorical/bernoulli, c for fixed
  double sign = 1.0;           // row_norm
  std::string family;          // continuous: uniform | normal | laplace
  double a = 0.0;              // lo, mean or location
  double b = 1.0;              // hi, stddev or scale
  std::optional<double> tau;

  bool operator==(const SchemeSpec&) const = default;
};

struct NamedScheme {
  std::string name;
  SchemeSpec scheme;

  bool operator==(const NamedScheme&) const = default;
};

// type: constant | harmonic | explicit. alpha_fraction sets
// alpha = alpha_fraction / ||X^T M2 X|| (maximised over the configured schemes).
struct ScheduleSpec {
  std::string type = "constant";
  std::optional<double> alpha;
  std::optional<double> alpha_fraction;
  std::vector<double> values;

  bool operator==(const ScheduleSpec&) const = default;
};

struct OutputSpec {
  std::string csv_dir = "out";
  bool plot = true;

  bool operator==(const OutputSpec&) const = default;
};

struct NoisePanel {
  std::string name;
  NoiseMap noise_map;

  bool operator==(const NoisePanel&) const = default;
};

struct OracleInstance {
  DatasetSpec dataset;
  SchemeSpec scheme;
  ScheduleSpec schedule;
  std::int64_t K = 1;
  std::vector<double> w1;

  bool operator==(const OracleInstance&) const = default;
};

// Random instances with n, d <= 3, categorical or Bernoulli weights,
// constant or harmonic steps and K <= max_K.
struct OracleGenerated {
  std::int64_t count = 0;
  std::int64_t max_K = 8;
  std::uint64_t seed = 0;

  bool operator==(const OracleGenerated&) const = default;
};

struct OracleSpec {
  std::vector<OracleInstance> instances;
  std::optional<OracleGenerated> generated;
  std::int64_t max_outcomes = 1 << 16;
  double tolerance = 1e-10;

  bool operator==(const OracleSpec&) const = default;
};

struct ExperimentConfig {
  std::optional<DatasetSpec> dataset;
  std::optional<SchemeSpec> scheme;
  std::vector<NamedScheme> schemes;
  std::optional<ScheduleSpec> schedule;
  std::int64_t K = 100;
  std::int64_t n_traj = 1000;
  std::uint64_t seed = 0;
  bool enforce_assumptions = true;
  std::vector<double> w1;  // empty: zero start
  OutputSpec outputs;
  std::vector<NoisePanel> panels;
  std::int64_t n_rep = 1000;
  std::optional<OracleSpec> oracle;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

// Relative data-file paths resolve against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rwgd::cli
