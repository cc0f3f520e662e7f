#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rwgd/linalg.hpp"
#include "rwgd/rng.hpp"

namespace rwgd {

struct Identity {
  Index n = 0;
};

// Exactly one coordinate is 1, chosen with probability p_i.
struct CategoricalSingle {
  Vector p;
};

struct BernoulliIndependent {
  Vector p;
};

struct FixedDiagonal {
  Vector c;
};

// Independent coordinates W drawn by `sampler`, with declared moments
// E[W], E[W^2], E[W^3], E[W^4].
struct ContinuousIID {
  Index n = 0;
  std::string family;
  std::function<double(CounterRng&)> sampler;
  std::array<double, 4> moments{};
  std::optional<double> tau;
};

using WeightingScheme = std::variant<Identity, CategoricalSingle, BernoulliIndependent, FixedDiagonal, ContinuousIID>;

struct WeightingMoments {
  Vector m2_diag;
  Matrix sigma_d;
  std::optional<std::int64_t> estimated_from;  // empty for analytic values

  bool analytic() const { return !estimated_from.has_value(); }
};

// tau bounds ||D|| almost surely; empty means unbounded.
struct BoundedSupport {
  std::optional<double> tau;
};

// One atom of a finitely supported weighting law.
struct WeightOutcome {
  Vector d;
  double prob = 0.0;
};

void validate(const WeightingScheme& scheme);
Index dimension(const WeightingScheme& scheme);
std::string scheme_id(const WeightingScheme& scheme);

Vector sample_weights(const WeightingScheme& scheme, CounterRng& rng);
std::optional<WeightingMoments> analytic_moments(const WeightingScheme& scheme);
// analytic_moments, which exists for every built-in variant.
WeightingMoments moments(const WeightingScheme& scheme);
WeightingMoments estimated_moments(const WeightingScheme& scheme, std::int64_t samples, CounterRng& rng);
Matrix cov_of_squares_apply(const Matrix& sigma_d, const Vector& u);
BoundedSupport bounded_support(const WeightingScheme& scheme);
// Atoms with positive probability, or empty for continuous laws.
std::optional<std::vector<WeightOutcome>> finite_support(const WeightingScheme& scheme);

CategoricalSingle uniform_categorical(Index n);
// p_i proportional to exp(sign * ||X_i||).
CategoricalSingle categorical_from_row_norms(const Matrix& x, double sign);

ContinuousIID continuous_uniform(Index n, double lo, double hi, std::array<double, 4> moments,
                                 std::optional<double> tau = std::nullopt);
ContinuousIID continuous_normal(Index n, double mean, double stddev, std::array<double, 4> moments,
                                std::optional<double> tau = std::nullopt);
ContinuousIID continuous_laplace(Index n, double location, double scale, std::array<double, 4> moments,
                                 std::optional<double> tau = std::nullopt);

}  // namespace rwgd
