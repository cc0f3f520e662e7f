#include "rwgd/cli/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "rwgd/errors.hpp"
#include "rwgd/rng.hpp"

namespace rwgd::cli {

namespace {

void check_sizes(std::int64_t n, std::int64_t d, double fraction) {
  if (n < 1 || d < 1) throw ConfigError("generator needs n, d >= 1");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("rescale_fraction must lie in [0, 1]");
}

struct Design {
  Matrix x;
  std::vector<bool> rescaled;
};

Design gaussian_design(std::int64_t n, std::int64_t d, double entry_std, double fraction, double factor,
                       std::uint64_t seed) {
  check_sizes(n, d, fraction);
  if (!(entry_std > 0.0)) throw ConfigError("entry_std must be positive");
  Design out{Matrix(n, d), std::vector<bool>(static_cast<std::size_t>(n), false)};
  CounterRng rng(seed, 0);
  std::normal_distribution<double> normal(0.0, entry_std);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) out.x(i, j) = normal(rng);
  }
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  CounterRng pick(seed, 1);
  std::shuffle(rows.begin(), rows.end(), pick);
  const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  for (std::size_t t = 0; t < m; ++t) {
    out.x.row(rows[t]) *= factor;
    out.rescaled[static_cast<std::size_t>(rows[t])] = true;
  }
  return out;
}

Vector standard_normal(Index size, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = normal(rng);
  return v;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

GeneratedData from_inline(const InlineData& in) {
  const auto n = static_cast<Index>(in.x.size());
  if (n == 0) throw ConfigError("inline dataset has no rows");
  const auto d = static_cast<Index>(in.x.front().size());
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& row = in.x[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != d) throw ConfigError("inline dataset rows have unequal lengths");
    for (Index j = 0; j < d; ++j) x(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (static_cast<Index>(in.y.size()) != n) throw ConfigError("inline dataset needs one label per row");
  return {Dataset{x, to_vector(in.y), {}, {}}, std::vector<bool>(static_cast<std::size_t>(n), false)};
}

double parse_number(std::string_view field, const std::string& where) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ConfigError("cannot parse number '" + std::string(field) + "' at " + where);
  }
  return v;
}

}  // namespace

Vector noise_std(const NoiseMap& map, const std::vector<bool>& rescaled) {
  const auto n = static_cast<Index>(rescaled.size());
  Vector out(n);
  if (map.rescaled) {
    for (Index i = 0; i < n; ++i) out(i) = rescaled[static_cast<std::size_t>(i)] ? *map.rescaled : *map.other;
  } else {
    if (static_cast<Index>(map.per_row.size()) != n) {
      throw ConfigError("noise map lists " + std::to_string(map.per_row.size()) + " rows, dataset has " +
                        std::to_string(n));
    }
    out = to_vector(map.per_row);
  }
  if (!(out.array() >= 0.0).all() || !out.allFinite()) throw ConfigError("noise standard deviations must be >= 0");
  return out;
}

GeneratedData generate_dataset(const DatasetSpec& spec) {
  if (const auto* g = std::get_if<GaussianRescaledSpec>(&spec)) {
    if (!(g->label_noise_std >= 0.0)) throw ConfigError("label_noise_std must be >= 0");
    Design des = gaussian_design(g->n, g->d, g->entry_std, g->rescale_fraction, g->rescale_factor, g->seed);
    const Vector w_star = standard_normal(g->d, g->seed, 2);
    Vector y = des.x * w_star + g->label_noise_std * standard_normal(g->n, g->seed, 3);
    Dataset data{des.x, y, w_star, {}};
    if (g->label_noise_std > 0.0) {
      data.sigma_eps = Matrix::Identity(g->n, g->n) * (g->label_noise_std * g->label_noise_std);
    } else {
      data.sigma_eps = Matrix::Zero(g->n, g->n);
    }
    return {std::move(data), std::move(des.rescaled)};
  }
  if (const auto* h = std::get_if<HeteroscedasticSpec>(&spec)) return generate_dataset(spec, h->noise_map);
  if (const auto* in = std::get_if<InlineData>(&spec)) return from_inline(*in);
  const Dataset data = read_dataset_csv(std::get<DataFile>(spec).path);
  return {data, std::vector<bool>(static_cast<std::size_t>(data.n()), false)};
}

GeneratedData generate_dataset(const DatasetSpec& spec, const NoiseMap& noise_override) {
  const auto* h = std::get_if<HeteroscedasticSpec>(&spec);
  if (!h) throw ConfigError("noise maps need a heteroscedastic generator");
  Design des = gaussian_design(h->n, h->d, h->entry_std, h->rescale_fraction, h->rescale_factor, h->seed);
  Vector w_star;
  if (h->w_star.empty()) {
    w_star = standard_normal(h->d, h->seed, 2);
  } else {
    if (static_cast<std::int64_t>(h->w_star.size()) != h->d) throw ConfigError("w_star must have d entries");
    w_star = to_vector(h->w_star);
  }
  const Vector std_dev = noise_std(noise_override, des.rescaled);
  const Vector y = des.x * w_star + std_dev.cwiseProduct(standard_normal(h->n, h->seed, 3));
  const Matrix sigma = std_dev.cwiseProduct(std_dev).asDiagonal();
  return {Dataset{des.x, y, w_star, sigma}, std::move(des.rescaled)};
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("data file is empty: " + path.string());
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::string_view rest(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_number(rest.substr(0, comma), where));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (row.size() < 2) throw ConfigError("data rows need at least one feature and a label at " + where);
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError("ragged data row at " + where);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("data file has no rows: " + path.string());
  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(rows.front().size()) - 1;
  Dataset data{Matrix(n, d), Vector(n), {}, {}};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) data.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    data.y(i) = rows[static_cast<std::size_t>(i)].back();
  }
  return data;
}

WeightingScheme resolve_scheme(const SchemeSpec& spec, const Matrix& x) {
  const Index n = x.rows();
  const auto sized = [&](const char* what) {
    if (static_cast<Index>(spec.values.size()) != n) {
      throw ConfigError(std::string(what) + " scheme lists " + std::to_string(spec.values.size()) +
                        " entries, dataset has " + std::to_string(n) + " rows");
    }
    return to_vector(spec.values);
  };
  WeightingScheme out;
  if (spec.type == "identity") {
    out = Identity{n};
  } else if (spec.type == "uniform") {
    out = uniform_categorical(n);
  } else if (spec.type == "categorical") {
    out = CategoricalSingle{sized("categorical")};
  } else if (spec.type == "bernoulli") {
    out = BernoulliIndependent{sized("bernoulli")};
  } else if (spec.type == "fixed") {
    out = FixedDiagonal{sized("fixed")};
  } else if (spec.type == "row_norm") {
    out = categorical_from_row_norms(x, spec.sign);
  } else if (spec.type == "continuous") {
    const double a = spec.a, b = spec.b;
    if (spec.family == "uniform") {
      std::array<double, 4> m{};
      for (int j = 1; j <= 4; ++j) m[j - 1] = (std::pow(b, j + 1) - std::pow(a, j + 1)) / ((j + 1) * (b - a));
      out = continuous_uniform(n, a, b, m, spec.tau.value_or(std::max(std::abs(a), std::abs(b))));
    } else {
      if (spec.tau) throw ConfigError(spec.family + " weights are unbounded, tau does not apply");
      if (spec.family == "normal") {
        const double s2 = b * b;
        out = continuous_normal(n, a, b,
                                {a, a * a + s2, a * a * a + 3 * a * s2, std::pow(a, 4) + 6 * a * a * s2 + 3 * s2 * s2});
      } else {
        const double s2 = b * b;
        out = continuous_laplace(
            n, a, b, {a, a * a + 2 * s2, a * a * a + 6 * a * s2, std::pow(a, 4) + 12 * a * a * s2 + 24 * s2 * s2});
      }
    }
  } else {
    throw ConfigError("unknown scheme type '" + spec.type + "'");
  }
  try {
    validate(out);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid scheme: ") + e.what());
  }
  return out;
}

StepSchedule resolve_schedule(const ScheduleSpec& spec, double norm_xx_hat) {
  StepSchedule out;
  if (spec.type == "explicit") {
    out = ExplicitSteps{spec.values};
  } else {
    const double alpha = spec.alpha ? *spec.alpha : *spec.alpha_fraction / norm_xx_hat;
    if (spec.type == "constant") {
      out = ConstantStep{alpha};
    } else {
      out = HarmonicStep{alpha};
    }
  }
  try {
    validate(out);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid schedule: ") + e.what());
  }
  return out;
}

std::vector<OracleInstance> generate_oracle_instances(const OracleGenerated& spec, std::int64_t max_outcomes) {
  if (spec.count < 0 || spec.max_K < 0) throw ConfigError("generated oracle battery needs count, max_K >= 0");
  std::vector<OracleInstance> out;
  for (std::int64_t t = 0; t < spec.count; ++t) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(t));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<std::int64_t>(1 + rng() % 3);
    const auto d = static_cast<std::int64_t>(1 + rng() % 3);
    InlineData data;
    for (std::int64_t i = 0; i < n; ++i) {
      std::vector<double> row;
      for (std::int64_t j = 0; j < d; ++j) row.push_back(normal(rng));
      data.x.push_back(row);
      data.y.push_back(normal(rng));
    }
    OracleInstance inst;
    inst.dataset = data;
    const bool bernoulli = t % 2 == 1;
    inst.scheme.type = bernoulli ? "bernoulli" : "categorical";
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      inst.scheme.values.push_back(0.1 + 0.8 * rng.uniform01());
      total += inst.scheme.values.back();
    }
    if (!bernoulli) {
      for (double& p : inst.scheme.values) p /= total;
    }
    inst.schedule.type = t % 4 < 2 ? "constant" : "harmonic";
    inst.schedule.alpha_fraction = 0.2 + 0.7 * rng.uniform01();
    const double support = bernoulli ? std::pow(2.0, static_cast<double>(n)) : static_cast<double>(n);
    std::int64_t k_cap = spec.max_K;
    while (k_cap > 1 && std::pow(support, static_cast<double>(k_cap)) > static_cast<double>(max_outcomes)) --k_cap;
    inst.K = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(std::max<std::int64_t>(k_cap, 1)));
    inst.K = std::min(inst.K, spec.max_K);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace rwgd::cli
