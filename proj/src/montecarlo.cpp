#include "rwgd/montecarlo.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <thread>

#include "rwgd/bounds.hpp"
#include "rwgd/errors.hpp"
#include "rwgd/numeric.hpp"

namespace rwgd {

namespace {

constexpr std::int64_t kChunk = 64;

// Runs fn(chunk) for chunks [0, n_chunks) on up to `threads` workers, then
// hands results to merge() in chunk order, one wave at a time.
template <class Acc>
void run_chunked(std::int64_t n_chunks, int threads, const std::function<Acc(std::int64_t)>& fn,
                 const std::function<void(Acc&)>& merge) {
  const std::int64_t workers = std::max<std::int64_t>(1, threads);
  for (std::int64_t base = 0; base < n_chunks; base += workers) {
    const std::int64_t wave = std::min(workers, n_chunks - base);
    std::vector<Acc> results(static_cast<std::size_t>(wave));
    if (wave == 1) {
      results[0] = fn(base);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(wave));
      for (std::int64_t j = 0; j < wave; ++j) {
        pool.emplace_back([&, j] {
          try {
            results[static_cast<std::size_t>(j)] = fn(base + j);
          } catch (...) {
            errors[static_cast<std::size_t>(j)] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    for (auto& r : results) merge(r);
  }
}

double standard_error(const CompensatedSum& sum, const CompensatedSum& sum_sq, std::int64_t n) {
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double nn = static_cast<double>(n);
  const double mean = sum.value() / nn;
  const double var = std::max(0.0, (sum_sq.value() - nn * mean * mean) / (nn - 1.0));
  return std::sqrt(var / nn);
}

Vector advance(const WeightedProblem& wp, const WeightingScheme& scheme, const StepSchedule& schedule, Vector w,
               std::int64_t K, std::uint64_t seed, std::uint64_t traj) {
  for (std::int64_t k = 1; k <= K; ++k) {
    CounterRng rng(seed, traj, static_cast<std::uint64_t>(k));
    w = weighted_step(w, wp.x(), wp.y(), schedule_value(schedule, k), sample_weights(scheme, rng));
  }
  return w;
}

struct EnsembleAcc {
  std::vector<CompensatedMatrix> mean;
  std::vector<CompensatedMatrix> second;
  std::vector<CompensatedSum> sq;
  std::vector<CompensatedSum> sq2;
};

}  // namespace

EnsembleSummary ensemble_moments(const WeightedProblem& wp, const WeightingScheme& scheme, const StepSchedule& schedule,
                                 const Vector& w1, std::int64_t K, std::int64_t n_traj, std::uint64_t seed,
                                 const EnsembleOptions& options) {
  if (n_traj < 1) throw InvalidArgument("ensemble needs n_traj >= 1");
  if (K < 0) throw InvalidArgument("horizon K must be >= 0");
  validate(scheme);
  validate(schedule);
  if (dimension(scheme) != wp.n()) throw DimensionError("weighting scheme dimension does not match the data");
  if (w1.size() != wp.d()) throw DimensionError("initial iterate has the wrong length");
  if (options.enforce_assumptions) require_trajectory_assumptions(wp, scheme, schedule, w1);

  const Index d = wp.d();
  const auto steps = static_cast<std::size_t>(K + 1);
  auto make_acc = [&] {
    EnsembleAcc acc;
    acc.mean.assign(steps, CompensatedMatrix(d, 1));
    if (options.track_second_moment) acc.second.assign(steps, CompensatedMatrix(d, d));
    acc.sq.assign(steps, {});
    acc.sq2.assign(steps, {});
    return acc;
  };
  EnsembleAcc total = make_acc();
  const std::int64_t n_chunks = (n_traj + kChunk - 1) / kChunk;

  run_chunked<EnsembleAcc>(
      n_chunks, options.threads,
      [&](std::int64_t chunk) {
        EnsembleAcc acc = make_acc();
        const std::int64_t begin = chunk * kChunk;
        const std::int64_t end = std::min(n_traj, begin + kChunk);
        for (std::int64_t t = begin; t < end; ++t) {
          Vector w = w1;
          for (std::int64_t k = 1; k <= K + 1; ++k) {
            const auto j = static_cast<std::size_t>(k - 1);
            const Vector e = w - wp.w_hat;
            const double s = e.squaredNorm();
            acc.mean[j].add(e);
            if (options.track_second_moment) acc.second[j].add(e * e.transpose());
            acc.sq[j].add(s);
            acc.sq2[j].add(s * s);
            if (k > K) break;
            CounterRng rng(seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
            w = weighted_step(w, wp.x(), wp.y(), schedule_value(schedule, k), sample_weights(scheme, rng));
          }
        }
        return acc;
      },
      [&](EnsembleAcc& acc) {
        for (std::size_t j = 0; j < steps; ++j) {
          total.mean[j].merge(acc.mean[j]);
          if (options.track_second_moment) total.second[j].merge(acc.second[j]);
          total.sq[j].merge(acc.sq[j]);
          total.sq2[j].merge(acc.sq2[j]);
        }
      });

  EnsembleSummary out;
  out.K = K;
  out.n_traj = n_traj;
  out.seed_base = seed;
  const double nn = static_cast<double>(n_traj);
  for (std::size_t j = 0; j < steps; ++j) {
    out.ks.push_back(static_cast<std::int64_t>(j) + 1);
    Vector m = total.mean[j].value().col(0) / nn;
    out.mean_error_norm.push_back(m.norm());
    out.mean_error.push_back(std::move(m));
    if (options.track_second_moment) out.second_moment.push_back(total.second[j].value() / nn);
    out.sq_distance.push_back(total.sq[j].value() / nn);
    out.standard_errors.push_back(standard_error(total.sq[j], total.sq2[j], n_traj));
  }
  return out;
}

double w2_to_point_mass(const std::vector<Vector>& samples, const Vector& center) {
  if (samples.empty()) throw InvalidArgument("w2_to_point_mass needs at least one sample");
  CompensatedSum sum;
  for (const auto& s : samples) {
    if (s.size() != center.size()) throw DimensionError("sample and center have different lengths");
    sum.add((s - center).squaredNorm());
  }
  return std::sqrt(sum.value() / static_cast<double>(samples.size()));
}

std::vector<Vector> final_iterates(const WeightedProblem& wp, const WeightingScheme& scheme,
                                   const StepSchedule& schedule, const Vector& w1, std::int64_t K, std::int64_t n_traj,
                                   std::uint64_t seed, const EnsembleOptions& options) {
  if (n_traj < 1) throw InvalidArgument("ensemble needs n_traj >= 1");
  validate(scheme);
  validate(schedule);
  if (options.enforce_assumptions) require_trajectory_assumptions(wp, scheme, schedule, w1);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n_traj));
  const std::int64_t n_chunks = (n_traj + kChunk - 1) / kChunk;
  run_chunked<std::vector<Vector>>(
      n_chunks, options.threads,
      [&](std::int64_t chunk) {
        std::vector<Vector> part;
        const std::int64_t begin = chunk * kChunk;
        const std::int64_t end = std::min(n_traj, begin + kChunk);
        for (std::int64_t t = begin; t < end; ++t) {
          part.push_back(advance(wp, scheme, schedule, w1, K, seed, static_cast<std::uint64_t>(t)));
        }
        return part;
      },
      [&](std::vector<Vector>& part) {
        for (auto& v : part) out.push_back(std::move(v));
      });
  return out;
}

ContractionEstimate gmc_contraction_estimate(const WeightedProblem& wp, const WeightingScheme& scheme, double alpha,
                                             const Vector& u1, const Vector& v1, std::int64_t K, double q,
                                             std::int64_t n_pairs, std::uint64_t seed, const EnsembleOptions& options) {
  if (n_pairs < 1) throw InvalidArgument("contraction estimate needs n_pairs >= 1");
  if (!(q >= 1.0)) throw InvalidArgument("contraction estimate needs q >= 1");
  if (K < 0) throw InvalidArgument("horizon K must be >= 0");
  const StepSchedule schedule = ConstantStep{alpha};
  validate(scheme);
  validate(schedule);
  if (u1.size() != wp.d() || v1.size() != wp.d()) throw DimensionError("coupled starts have the wrong length");
  if (options.enforce_assumptions) {
    require_trajectory_assumptions(wp, scheme, schedule, u1);
    require_trajectory_assumptions(wp, scheme, schedule, v1);
    const AssumptionReport rep = assumption_check(wp, scheme, schedule, u1);
    for (const char* name : {check::compact_support, check::gmc_step}) {
      const AssumptionItem& item = rep.item(name);
      if (item.status == CheckStatus::fail) throw AssumptionError(item.name + " violated: " + item.detail);
    }
  }

  struct Acc {
    std::vector<CompensatedSum> s, s2;
  };
  const auto steps = static_cast<std::size_t>(K + 1);
  Acc total{std::vector<CompensatedSum>(steps), std::vector<CompensatedSum>(steps)};
  const std::int64_t n_chunks = (n_pairs + kChunk - 1) / kChunk;
  run_chunked<Acc>(
      n_chunks, options.threads,
      [&](std::int64_t chunk) {
        Acc acc{std::vector<CompensatedSum>(steps), std::vector<CompensatedSum>(steps)};
        const std::int64_t begin = chunk * kChunk;
        const std::int64_t end = std::min(n_pairs, begin + kChunk);
        for (std::int64_t t = begin; t < end; ++t) {
          Vector u = u1;
          Vector v = v1;
          for (std::int64_t k = 1; k <= K + 1; ++k) {
            const auto j = static_cast<std::size_t>(k - 1);
            const double x = std::pow((u - v).norm(), q);
            acc.s[j].add(x);
            acc.s2[j].add(x * x);
            if (k > K) break;
            CounterRng rng(seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
            const Vector dd = sample_weights(scheme, rng);
            u = weighted_step(u, wp.x(), wp.y(), alpha, dd);
            v = weighted_step(v, wp.x(), wp.y(), alpha, dd);
          }
        }
        return acc;
      },
      [&](Acc& acc) {
        for (std::size_t j = 0; j < steps; ++j) {
          total.s[j].merge(acc.s[j]);
          total.s2[j].merge(acc.s2[j]);
        }
      });

  ContractionEstimate out;
  const double nn = static_cast<double>(n_pairs);
  for (std::size_t j = 0; j < steps; ++j) {
    out.ks.push_back(static_cast<std::int64_t>(j) + 1);
    const double mean = total.s[j].value() / nn;
    const double se =
        n_pairs < 2 ? std::numeric_limits<double>::quiet_NaN() : standard_error(total.s[j], total.s2[j], n_pairs);
    out.mean_q.push_back(mean);
    out.se_q.push_back(se);
    const double root = std::pow(mean, 1.0 / q);
    out.moment_root.push_back(root);
    out.se_root.push_back(mean > 0.0 ? se / (q * std::pow(mean, (q - 1.0) / q)) : 0.0);
  }
  return out;
}

std::vector<MomentState> enumeration_oracle(const WeightedProblem& wp, const WeightingScheme& scheme,
                                            const StepSchedule& schedule, const Vector& w1, std::int64_t K,
                                            std::int64_t max_outcomes) {
  validate(scheme);
  validate(schedule);
  if (K < 0) throw InvalidArgument("horizon K must be >= 0");
  if (dimension(scheme) != wp.n()) throw DimensionError("weighting scheme dimension does not match the data");
  if (w1.size() != wp.d()) throw DimensionError("initial iterate has the wrong length");
  const auto atoms = finite_support(scheme);
  if (!atoms) {
    throw InvalidArgument("enumeration oracle needs a finitely supported weighting, got " + scheme_id(scheme));
  }
  const auto support = static_cast<std::int64_t>(atoms->size());
  std::int64_t total = 1;
  for (std::int64_t k = 0; k < K; ++k) {
    if (total > max_outcomes / std::max<std::int64_t>(support, 1)) {
      total = -1;
      break;
    }
    total *= support;
  }
  if (total < 0 || total > max_outcomes) {
    throw BudgetError("enumeration needs " + std::to_string(support) + "^" + std::to_string(K) +
                      " weight sequences, above the cap of " + std::to_string(max_outcomes) +
                      " outcomes; lower K or raise max_outcomes");
  }

  const Index d = wp.d();
  const auto steps = static_cast<std::size_t>(K + 1);
  std::vector<CompensatedMatrix> m(steps, CompensatedMatrix(d, 1));
  std::vector<CompensatedMatrix> a(steps, CompensatedMatrix(d, d));
  std::vector<double> alphas;
  for (std::int64_t k = 1; k <= K; ++k) alphas.push_back(schedule_value(schedule, k));

  std::function<void(std::int64_t, const Vector&, double)> visit = [&](std::int64_t done, const Vector& w,
                                                                       double prob) {
    const Vector e = w - wp.w_hat;
    const auto j = static_cast<std::size_t>(done);
    m[j].add(prob * e);
    a[j].add(prob * (e * e.transpose()));
    if (done == K) return;
    for (const auto& atom : *atoms) {
      visit(done + 1, weighted_step(w, wp.x(), wp.y(), alphas[j], atom.d), prob * atom.prob);
    }
  };
  visit(0, w1, 1.0);

  std::vector<MomentState> out;
  for (std::size_t j = 0; j < steps; ++j) {
    Matrix aj = a[j].value();
    out.push_back({static_cast<std::int64_t>(j) + 1, m[j].value().col(0), 0.5 * (aj + aj.transpose())});
  }
  return out;
}

Vector draw_noise(const Matrix& sigma_eps, std::uint64_t seed, std::uint64_t rep) {
  const Index n = sigma_eps.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_eps);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  CounterRng rng(derive_seed(seed, 1), rep, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = normal(rng);
  return eig.eigenvectors() * root.cwiseProduct(z);
}

namespace {

void check_risk_instance(const RiskInstance& inst) {
  if (inst.w_star.size() != inst.x.cols()) throw DimensionError("w_star does not match the design width");
  if (inst.sigma_eps.rows() != inst.x.rows() || inst.sigma_eps.cols() != inst.x.rows()) {
    throw DimensionError("noise covariance does not match the number of data points");
  }
}

WeightedProblem replicate_problem(const RiskInstance& inst, const Vector& m2, std::uint64_t seed, std::uint64_t rep) {
  Dataset data;
  data.x = inst.x;
  data.y = inst.x * inst.w_star + draw_noise(inst.sigma_eps, seed, rep);
  data.w_star = inst.w_star;
  data.sigma_eps = inst.sigma_eps;
  return build_weighted_problem(std::move(data), m2);
}

}  // namespace

RiskCurve risk_curve(const RiskInstance& inst, const WeightingScheme& scheme, double alpha, const Vector& w1,
                     std::int64_t K, std::int64_t n_rep, std::uint64_t seed, const EnsembleOptions& options) {
  check_risk_instance(inst);
  if (n_rep < 1) throw InvalidArgument("risk curve needs n_rep >= 1");
  validate(scheme);
  const WeightingMoments mom = moments(scheme);
  const StepSchedule schedule = ConstantStep{alpha};
  const std::uint64_t weight_seed = derive_seed(seed, 2);

  struct Acc {
    std::vector<CompensatedSum> s, s2;
  };
  const auto steps = static_cast<std::size_t>(K + 1);
  Acc total{std::vector<CompensatedSum>(steps), std::vector<CompensatedSum>(steps)};
  const std::int64_t n_chunks = (n_rep + kChunk - 1) / kChunk;
  run_chunked<Acc>(
      n_chunks, options.threads,
      [&](std::int64_t chunk) {
        Acc acc{std::vector<CompensatedSum>(steps), std::vector<CompensatedSum>(steps)};
        const std::int64_t begin = chunk * kChunk;
        const std::int64_t end = std::min(n_rep, begin + kChunk);
        for (std::int64_t r = begin; r < end; ++r) {
          const WeightedProblem wp = replicate_problem(inst, mom.m2_diag, seed, static_cast<std::uint64_t>(r));
          if (options.enforce_assumptions) require_trajectory_assumptions(wp, scheme, schedule, w1);
          Vector w = w1;
          for (std::int64_t k = 1; k <= K + 1; ++k) {
            const auto j = static_cast<std::size_t>(k - 1);
            const double s = (w - inst.w_star).squaredNorm();
            acc.s[j].add(s);
            acc.s2[j].add(s * s);
            if (k > K) break;
            CounterRng rng(weight_seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(k));
            w = weighted_step(w, wp.x(), wp.y(), alpha, sample_weights(scheme, rng));
          }
        }
        return acc;
      },
      [&](Acc& acc) {
        for (std::size_t j = 0; j < steps; ++j) {
          total.s[j].merge(acc.s[j]);
          total.s2[j].merge(acc.s2[j]);
        }
      });

  RiskCurve out;
  for (std::size_t j = 0; j < steps; ++j) {
    out.ks.push_back(static_cast<std::int64_t>(j) + 1);
    out.mean.push_back(total.s[j].value() / static_cast<double>(n_rep));
    out.se.push_back(standard_error(total.s[j], total.s2[j], n_rep));
  }
  return out;
}

std::int64_t default_burn_in(const MomentContext& ctx, const Vector& w1) {
  if (!is_constant(ctx.schedule)) throw InvalidArgument("burn-in rule needs a constant step schedule");
  require_variance_step(ctx);
  const double alpha = std::get<ConstantStep>(ctx.schedule).alpha;
  const Vector e = w1 - ctx.wp.w_hat;
  const double c0 =
      e.squaredNorm() + 2.0 * std::pow(ctx.wp.norm_x, 3) * ctx.norm_sigma_d() * e.norm() * ctx.residual.norm();
  const double c2_upper = c0 + variance_ceiling(ctx).value;
  constexpr double target = 1e-6;
  constexpr std::int64_t cap = 100'000'000;
  for (std::int64_t k = 1; k <= cap; ++k) {
    if (constant_step_envelope(c2_upper, alpha, ctx.sigma(), k) <= target) return k;
  }
  throw NumericalError("burn-in horizon exceeds " + std::to_string(cap) + " steps");
}

RiskEstimate risk_limit_estimate(const RiskInstance& inst, const WeightingScheme& scheme, double alpha,
                                 std::optional<std::int64_t> k_burn, std::int64_t n_rep, std::uint64_t seed,
                                 const Vector& w1, const EnsembleOptions& options) {
  check_risk_instance(inst);
  if (n_rep < 1) throw InvalidArgument("risk estimate needs n_rep >= 1");
  if (k_burn && *k_burn < 0) throw InvalidArgument("burn-in must be >= 0");
  validate(scheme);
  const WeightingMoments mom = moments(scheme);
  const StepSchedule schedule = ConstantStep{alpha};
  const std::uint64_t weight_seed = derive_seed(seed, 2);

  struct Acc {
    CompensatedSum s, s2;
    std::int64_t kmin = std::numeric_limits<std::int64_t>::max();
    std::int64_t kmax = 0;
  };
  Acc total;
  const std::int64_t n_chunks = (n_rep + kChunk - 1) / kChunk;
  run_chunked<Acc>(
      n_chunks, options.threads,
      [&](std::int64_t chunk) {
        Acc acc;
        const std::int64_t begin = chunk * kChunk;
        const std::int64_t end = std::min(n_rep, begin + kChunk);
        for (std::int64_t r = begin; r < end; ++r) {
          const WeightedProblem wp = replicate_problem(inst, mom.m2_diag, seed, static_cast<std::uint64_t>(r));
          const MomentContext ctx = make_moment_context(wp, mom, schedule, options.enforce_assumptions);
          if (options.enforce_assumptions) {
            require_trajectory_assumptions(wp, scheme, schedule, w1);
            require_variance_step(ctx);
          }
          const std::int64_t kb = k_burn ? *k_burn : default_burn_in(ctx, w1);
          acc.kmin = std::min(acc.kmin, kb);
          acc.kmax = std::max(acc.kmax, kb);
          const Vector w = advance(wp, scheme, schedule, w1, kb, weight_seed, static_cast<std::uint64_t>(r));
          const double s = (w - inst.w_star).squaredNorm();
          acc.s.add(s);
          acc.s2.add(s * s);
        }
        return acc;
      },
      [&](Acc& acc) {
        total.s.merge(acc.s);
        total.s2.merge(acc.s2);
        total.kmin = std::min(total.kmin, acc.kmin);
        total.kmax = std::max(total.kmax, acc.kmax);
      });

  RiskEstimate out;
  out.estimate = total.s.value() / static_cast<double>(n_rep);
  out.se = standard_error(total.s, total.s2, n_rep);
  out.k_burn_min = total.kmin;
  out.k_burn_max = total.kmax;
  return out;
}

}  // namespace rwgd
