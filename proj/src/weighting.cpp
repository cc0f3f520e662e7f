#include "rwgd/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rwgd/errors.hpp"

namespace rwgd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_probabilities(const Vector& p, const char* what) {
  if (p.size() == 0) throw InvalidArgument(std::string(what) + ": empty probability vector");
  for (Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i)) || p(i) < 0.0 || p(i) > 1.0) {
      throw InvalidArgument(std::string(what) + ": p[" + std::to_string(i) + "] = " + std::to_string(p(i)) +
                            " is not in [0, 1]");
    }
  }
}

}  // namespace

void validate(const WeightingScheme& scheme) {
  std::visit(
      overloaded{
          [](const Identity& s) {
            if (s.n <= 0) throw InvalidArgument("identity weighting needs n >= 1");
          },
          [](const CategoricalSingle& s) {
            check_probabilities(s.p, "categorical weighting");
            if (std::abs(s.p.sum() - 1.0) > 1e-12 * static_cast<double>(s.p.size())) {
              throw InvalidArgument("categorical weighting: probabilities sum to " + std::to_string(s.p.sum()) +
                                    ", expected 1");
            }
          },
          [](const BernoulliIndependent& s) { check_probabilities(s.p, "bernoulli weighting"); },
          [](const FixedDiagonal& s) {
            if (s.c.size() == 0) throw InvalidArgument("fixed weighting: empty diagonal");
            for (Index i = 0; i < s.c.size(); ++i) {
              if (!std::isfinite(s.c(i)) || s.c(i) < 0.0) {
                throw InvalidArgument("fixed weighting: c[" + std::to_string(i) + "] must be finite and non-negative");
              }
            }
          },
          [](const ContinuousIID& s) {
            if (s.n <= 0) throw InvalidArgument("continuous weighting needs n >= 1");
            if (!s.sampler) throw InvalidArgument("continuous weighting needs a sampler");
            for (double m : s.moments) {
              if (!std::isfinite(m)) throw InvalidArgument("continuous weighting: moments must be finite");
            }
            const auto& m = s.moments;
            const double slack = 1e-12 * std::max(1.0, std::abs(m[1]) + std::abs(m[3]));
            if (m[1] < m[0] * m[0] - slack) {
              throw InvalidArgument("continuous weighting: declared E[W^2] < E[W]^2");
            }
            if (m[3] < m[1] * m[1] - slack) {
              throw InvalidArgument("continuous weighting: declared E[W^4] < E[W^2]^2");
            }
            if (s.tau && !(*s.tau >= 0.0)) {
              throw InvalidArgument("continuous weighting: tau must be non-negative");
            }
          },
      },
      scheme);
}

Index dimension(const WeightingScheme& scheme) {
  return std::visit(overloaded{
                        [](const Identity& s) { return s.n; },
                        [](const CategoricalSingle& s) { return s.p.size(); },
                        [](const BernoulliIndependent& s) { return s.p.size(); },
                        [](const FixedDiagonal& s) { return s.c.size(); },
                        [](const ContinuousIID& s) { return s.n; },
                    },
                    scheme);
}

std::string scheme_id(const WeightingScheme& scheme) {
  return std::visit(overloaded{
                        [](const Identity&) { return std::string("identity"); },
                        [](const CategoricalSingle&) { return std::string("categorical"); },
                        [](const BernoulliIndependent&) { return std::string("bernoulli"); },
                        [](const FixedDiagonal&) { return std::string("fixed"); },
                        [](const ContinuousIID& s) { return "continuous_iid:" + s.family; },
                    },
                    scheme);
}

Vector sample_weights(const WeightingScheme& scheme, CounterRng& rng) {
  return std::visit(overloaded{
                        [](const Identity& s) -> Vector { return Vector::Ones(s.n); },
                        [&](const CategoricalSingle& s) -> Vector {
                          Vector d = Vector::Zero(s.p.size());
                          const double u = rng.uniform01();
                          double acc = 0.0;
                          Index pick = -1;
                          for (Index i = 0; i < s.p.size(); ++i) {
                            if (s.p(i) <= 0.0) continue;
                            pick = i;
                            acc += s.p(i);
                            if (u < acc) break;
                          }
                          d(pick) = 1.0;
                          return d;
                        },
                        [&](const BernoulliIndependent& s) -> Vector {
                          Vector d(s.p.size());
                          for (Index i = 0; i < s.p.size(); ++i) d(i) = rng.uniform01() < s.p(i) ? 1.0 : 0.0;
                          return d;
                        },
                        [](const FixedDiagonal& s) -> Vector { return s.c; },
                        [&](const ContinuousIID& s) -> Vector {
                          Vector d(s.n);
                          for (Index i = 0; i < s.n; ++i) d(i) = s.sampler(rng);
                          return d;
                        },
                    },
                    scheme);
}

std::optional<WeightingMoments> analytic_moments(const WeightingScheme& scheme) {
  WeightingMoments out;
  std::visit(overloaded{
                 [&](const Identity& s) {
                   out.m2_diag = Vector::Ones(s.n);
                   out.sigma_d = Matrix::Zero(s.n, s.n);
                 },
                 [&](const CategoricalSingle& s) {
                   out.m2_diag = s.p;
                   out.sigma_d = -s.p * s.p.transpose();
                   out.sigma_d.diagonal() += s.p;
                 },
                 [&](const BernoulliIndependent& s) {
                   out.m2_diag = s.p;
                   out.sigma_d = s.p.cwiseProduct((1.0 - s.p.array()).matrix()).asDiagonal();
                 },
                 [&](const FixedDiagonal& s) {
                   out.m2_diag = s.c.cwiseProduct(s.c);
                   out.sigma_d = Matrix::Zero(s.c.size(), s.c.size());
                 },
                 [&](const ContinuousIID& s) {
                   out.m2_diag = Vector::Constant(s.n, s.moments[1]);
                   const double v = s.moments[3] - s.moments[1] * s.moments[1];
                   out.sigma_d = Vector::Constant(s.n, std::max(v, 0.0)).asDiagonal();
                 },
             },
             scheme);
  return out;
}

WeightingMoments moments(const WeightingScheme& scheme) {
  auto m = analytic_moments(scheme);
  if (!m) throw InvalidArgument("no closed-form moments for " + scheme_id(scheme));
  return *m;
}

WeightingMoments estimated_moments(const WeightingScheme& scheme, std::int64_t samples, CounterRng& rng) {
  if (samples < 2) throw InvalidArgument("estimated_moments needs at least 2 samples");
  const Index n = dimension(scheme);
  // Welford updates keep constant draws exact (zero covariance, exact mean).
  Vector mean = Vector::Zero(n);
  Matrix comoment = Matrix::Zero(n, n);
  for (std::int64_t s = 1; s <= samples; ++s) {
    const Vector d = sample_weights(scheme, rng);
    const Vector sq = d.cwiseProduct(d);
    const Vector delta = sq - mean;
    mean += delta / static_cast<double>(s);
    comoment.noalias() += delta * (sq - mean).transpose();
  }
  WeightingMoments out;
  out.m2_diag = mean;
  out.sigma_d = comoment / static_cast<double>(samples - 1);
  out.sigma_d = 0.5 * (out.sigma_d + out.sigma_d.transpose());
  out.estimated_from = samples;
  return out;
}

Matrix cov_of_squares_apply(const Matrix& sigma_d, const Vector& u) {
  if (sigma_d.rows() != u.size() || sigma_d.cols() != u.size()) {
    throw DimensionError("cov_of_squares_apply: sigma_d is " + std::to_string(sigma_d.rows()) + "x" +
                         std::to_string(sigma_d.cols()) + " but u has length " + std::to_string(u.size()));
  }
  return u.asDiagonal() * sigma_d * u.asDiagonal();
}

BoundedSupport bounded_support(const WeightingScheme& scheme) {
  return std::visit(overloaded{
                        [](const Identity&) { return BoundedSupport{1.0}; },
                        [](const CategoricalSingle&) { return BoundedSupport{1.0}; },
                        [](const BernoulliIndependent&) { return BoundedSupport{1.0}; },
                        [](const FixedDiagonal& s) { return BoundedSupport{s.c.maxCoeff()}; },
                        [](const ContinuousIID& s) { return BoundedSupport{s.tau}; },
                    },
                    scheme);
}

std::optional<std::vector<WeightOutcome>> finite_support(const WeightingScheme& scheme) {
  using Out = std::optional<std::vector<WeightOutcome>>;
  return std::visit(overloaded{
                        [](const Identity& s) -> Out { return std::vector<WeightOutcome>{{Vector::Ones(s.n), 1.0}}; },
                        [](const CategoricalSingle& s) -> Out {
                          std::vector<WeightOutcome> atoms;
                          for (Index i = 0; i < s.p.size(); ++i) {
                            if (s.p(i) <= 0.0) continue;
                            atoms.push_back({Vector::Unit(s.p.size(), i), s.p(i)});
                          }
                          return atoms;
                        },
                        [](const BernoulliIndependent& s) -> Out {
                          const Index n = s.p.size();
                          if (n > 30) return std::nullopt;
                          std::vector<WeightOutcome> atoms;
                          for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
                            Vector d(n);
                            double prob = 1.0;
                            for (Index i = 0; i < n; ++i) {
                              const bool on = (mask >> i) & 1U;
                              d(i) = on ? 1.0 : 0.0;
                              prob *= on ? s.p(i) : 1.0 - s.p(i);
                            }
                            if (prob > 0.0) atoms.push_back({d, prob});
                          }
                          return atoms;
                        },
                        [](const FixedDiagonal& s) -> Out { return std::vector<WeightOutcome>{{s.c, 1.0}}; },
                        [](const ContinuousIID&) -> Out { return std::nullopt; },
                    },
                    scheme);
}

CategoricalSingle uniform_categorical(Index n) {
  if (n <= 0) throw InvalidArgument("uniform categorical needs n >= 1");
  return CategoricalSingle{Vector::Constant(n, 1.0 / static_cast<double>(n))};
}

CategoricalSingle categorical_from_row_norms(const Matrix& x, double sign) {
  if (x.rows() == 0) throw InvalidArgument("row-norm weighting of an empty design");
  const Vector logits = sign * x.rowwise().norm();
  const Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return CategoricalSingle{e / e.sum()};
}

ContinuousIID continuous_uniform(Index n, double lo, double hi, std::array<double, 4> moments,
                                 std::optional<double> tau) {
  if (!(lo < hi)) throw InvalidArgument("uniform weighting needs lo < hi");
  return ContinuousIID{n, "uniform", [lo, hi](CounterRng& rng) { return lo + (hi - lo) * rng.uniform01(); }, moments,
                       tau};
}

ContinuousIID continuous_normal(Index n, double mean, double stddev, std::array<double, 4> moments,
                                std::optional<double> tau) {
  if (!(stddev > 0.0)) throw InvalidArgument("normal weighting needs stddev > 0");
  return ContinuousIID{n, "normal",
                       [mean, stddev](CounterRng& rng) {
                         std::normal_distribution<double> dist(mean, stddev);
                         return dist(rng);
                       },
                       moments, tau};
}

ContinuousIID continuous_laplace(Index n, double location, double scale, std::array<double, 4> moments,
                                 std::optional<double> tau) {
  if (!(scale > 0.0)) throw InvalidArgument("laplace weighting needs scale > 0");
  return ContinuousIID{n, "laplace",
                       [location, scale](CounterRng& rng) {
                         const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53 - 0.5;
                         const double sgn = u < 0.0 ? -1.0 : 1.0;
                         return location - scale * sgn * std::log1p(-2.0 * std::abs(u));
                       },
                       moments, tau};
}

}  // namespace rwgd
