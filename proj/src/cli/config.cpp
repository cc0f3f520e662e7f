#include "rwgd/cli/config.hpp"

#include <fstream>
#include <set>

#include "rwgd/errors.hpp"

namespace rwgd::cli {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.contains(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T read(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

template <typename T>
T read_or(const json& j, const std::string& key, const std::string& where, T fallback) {
  return j.contains(key) ? read<T>(j, key, where) : fallback;
}

template <typename T>
std::optional<T> read_opt(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return read<T>(j, key, where);
}

NoiseMap parse_noise_map(const json& j, const std::string& where) {
  NoiseMap m;
  if (j.is_array()) {
    try {
      m.per_row = j.get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError(where + " must list numbers: " + e.what());
    }
    return m;
  }
  check_keys(j, {"rescaled", "other"}, where);
  m.rescaled = read<double>(j, "rescaled", where);
  m.other = read<double>(j, "other", where);
  return m;
}

json noise_map_json(const NoiseMap& m) {
  if (m.rescaled) return json{{"rescaled", *m.rescaled}, {"other", *m.other}};
  return json(m.per_row);
}

DatasetSpec parse_dataset(const json& j, const std::string& where) {
  check_keys(j, {"generator", "file", "inline"}, where);
  if (j.size() != 1) throw ConfigError(where + " needs exactly one of generator, file, inline");
  if (j.contains("file")) return DataFile{read<std::string>(j, "file", where)};
  if (j.contains("inline")) {
    const json& in = j.at("inline");
    const std::string w = where + ".inline";
    check_keys(in, {"x", "y"}, w);
    return InlineData{read<std::vector<std::vector<double>>>(in, "x", w), read<std::vector<double>>(in, "y", w)};
  }
  const json& g = j.at("generator");
  const std::string w = where + ".generator";
  require_object(g, w);
  const auto type = read<std::string>(g, "type", w);
  if (type == "gaussian_rescaled") {
    check_keys(g, {"type", "n", "d", "rescale_fraction", "rescale_factor", "entry_std", "label_noise_std", "seed"}, w);
    GaussianRescaledSpec s;
    s.n = read_or(g, "n", w, s.n);
    s.d = read_or(g, "d", w, s.d);
    s.rescale_fraction = read_or(g, "rescale_fraction", w, s.rescale_fraction);
    s.rescale_factor = read_or(g, "rescale_factor", w, s.rescale_factor);
    s.entry_std = read_or(g, "entry_std", w, s.entry_std);
    s.label_noise_std = read_or(g, "label_noise_std", w, s.label_noise_std);
    s.seed = read_or(g, "seed", w, s.seed);
    return s;
  }
  if (type == "heteroscedastic") {
    check_keys(g, {"type", "n", "d", "rescale_fraction", "rescale_factor", "entry_std", "noise_map", "w_star", "seed"},
               w);
    HeteroscedasticSpec s;
    s.n = read_or(g, "n", w, s.n);
    s.d = read_or(g, "d", w, s.d);
    s.rescale_fraction = read_or(g, "rescale_fraction", w, s.rescale_fraction);
    s.rescale_factor = read_or(g, "rescale_factor", w, s.rescale_factor);
    s.entry_std = read_or(g, "entry_std", w, s.entry_std);
    if (!g.contains("noise_map")) throw ConfigError("missing key 'noise_map' in " + w);
    s.noise_map = parse_noise_map(g.at("noise_map"), w + ".noise_map");
    s.w_star = read_or(g, "w_star", w, s.w_star);
    s.seed = read_or(g, "seed", w, s.seed);
    return s;
  }
  throw ConfigError("unknown generator type '" + type + "' in " + w);
}

json dataset_json(const DatasetSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianRescaledSpec>) {
          return {{"generator",
                   {{"type", "gaussian_rescaled"},
                    {"n", s.n},
                    {"d", s.d},
                    {"rescale_fraction", s.rescale_fraction},
                    {"rescale_factor", s.rescale_factor},
                    {"entry_std", s.entry_std},
                    {"label_noise_std", s.label_noise_std},
                    {"seed", s.seed}}}};
        } else if constexpr (std::is_same_v<T, HeteroscedasticSpec>) {
          json g = {{"type", "heteroscedastic"},
                    {"n", s.n},
                    {"d", s.d},
                    {"rescale_fraction", s.rescale_fraction},
                    {"rescale_factor", s.rescale_factor},
                    {"entry_std", s.entry_std},
                    {"noise_map", noise_map_json(s.noise_map)},
                    {"seed", s.seed}};
          if (!s.w_star.empty()) g["w_star"] = s.w_star;
          return {{"generator", g}};
        } else if constexpr (std::is_same_v<T, InlineData>) {
          return {{"inline", {{"x", s.x}, {"y", s.y}}}};
        } else {
          return {{"file", s.path}};
        }
      },
      spec);
}

SchemeSpec parse_scheme(const json& j, const std::string& where) {
  require_object(j, where);
  SchemeSpec s;
  s.type = read<std::string>(j, "type", where);
  if (s.type == "identity" || s.type == "uniform") {
    check_keys(j, {"type"}, where);
  } else if (s.type == "categorical" || s.type == "bernoulli") {
    check_keys(j, {"type", "p"}, where);
    s.values = read<std::vector<double>>(j, "p", where);
  } else if (s.type == "fixed") {
    check_keys(j, {"type", "c"}, where);
    s.values = read<std::vector<double>>(j, "c", where);
  } else if (s.type == "row_norm") {
    check_keys(j, {"type", "sign"}, where);
    s.sign = read_or(j, "sign", where, s.sign);
  } else if (s.type == "continuous") {
    s.family = read<std::string>(j, "family", where);
    const char* first = "lo";
    const char* second = "hi";
    if (s.family == "normal") {
      first = "mean";
      second = "stddev";
    } else if (s.family == "laplace") {
      first = "location";
      second = "scale";
    } else if (s.family != "uniform") {
      throw ConfigError("unknown continuous family '" + s.family + "' in " + where);
    }
    check_keys(j, {"type", "family", first, second, "tau"}, where);
    s.a = read<double>(j, first, where);
    s.b = read<double>(j, second, where);
    s.tau = read_opt<double>(j, "tau", where);
  } else {
    throw ConfigError("unknown scheme type '" + s.type + "' in " + where);
  }
  return s;
}

json scheme_json(const SchemeSpec& s) {
  json j = {{"type", s.type}};
  if (s.type == "categorical" || s.type == "bernoulli") j["p"] = s.values;
  if (s.type == "fixed") j["c"] = s.values;
  if (s.type == "row_norm") j["sign"] = s.sign;
  if (s.type == "continuous") {
    j["family"] = s.family;
    const bool normal = s.family == "normal", laplace = s.family == "laplace";
    j[normal ? "mean" : laplace ? "location" : "lo"] = s.a;
    j[normal ? "stddev" : laplace ? "scale" : "hi"] = s.b;
    if (s.tau) j["tau"] = *s.tau;
  }
  return j;
}

ScheduleSpec parse_schedule(const json& j, const std::string& where) {
  require_object(j, where);
  ScheduleSpec s;
  s.type = read<std::string>(j, "type", where);
  if (s.type == "explicit") {
    check_keys(j, {"type", "values"}, where);
    s.values = read<std::vector<double>>(j, "values", where);
    return s;
  }
  if (s.type != "constant" && s.type != "harmonic")
    throw ConfigError("unknown schedule type '" + s.type + "' in " + where);
  check_keys(j, {"type", "alpha", "alpha_fraction"}, where);
  s.alpha = read_opt<double>(j, "alpha", where);
  s.alpha_fraction = read_opt<double>(j, "alpha_fraction", where);
  if (s.alpha.has_value() == s.alpha_fraction.has_value()) {
    throw ConfigError(where + " needs exactly one of alpha, alpha_fraction");
  }
  return s;
}

json schedule_json(const ScheduleSpec& s) {
  json j = {{"type", s.type}};
  if (s.type == "explicit") j["values"] = s.values;
  if (s.alpha) j["alpha"] = *s.alpha;
  if (s.alpha_fraction) j["alpha_fraction"] = *s.alpha_fraction;
  return j;
}

OracleSpec parse_oracle(const json& j, const std::string& where) {
  check_keys(j, {"instances", "generated", "max_outcomes", "tolerance"}, where);
  OracleSpec o;
  if (j.contains("instances")) {
    const json& list = j.at("instances");
    if (!list.is_array()) throw ConfigError(where + ".instances must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = where + ".instances[" + std::to_string(i) + "]";
      const json& in = list[i];
      check_keys(in, {"dataset", "scheme", "schedule", "K", "w1"}, w);
      OracleInstance inst;
      inst.dataset = parse_dataset(read<json>(in, "dataset", w), w + ".dataset");
      inst.scheme = parse_scheme(read<json>(in, "scheme", w), w + ".scheme");
      inst.schedule = parse_schedule(read<json>(in, "schedule", w), w + ".schedule");
      inst.K = read<std::int64_t>(in, "K", w);
      inst.w1 = read_or(in, "w1", w, inst.w1);
      o.instances.push_back(std::move(inst));
    }
  }
  if (j.contains("generated")) {
    const json& g = j.at("generated");
    const std::string w = where + ".generated";
    check_keys(g, {"count", "max_K", "seed"}, w);
    OracleGenerated gen;
    gen.count = read<std::int64_t>(g, "count", w);
    gen.max_K = read_or(g, "max_K", w, gen.max_K);
    gen.seed = read_or(g, "seed", w, gen.seed);
    o.generated = gen;
  }
  o.max_outcomes = read_or(j, "max_outcomes", where, o.max_outcomes);
  o.tolerance = read_or(j, "tolerance", where, o.tolerance);
  return o;
}

json oracle_json(const OracleSpec& o) {
  json j = {{"max_outcomes", o.max_outcomes}, {"tolerance", o.tolerance}};
  if (!o.instances.empty()) {
    json list = json::array();
    for (const auto& inst : o.instances) {
      json in = {{"dataset", dataset_json(inst.dataset)},
                 {"scheme", scheme_json(inst.scheme)},
                 {"schedule", schedule_json(inst.schedule)},
                 {"K", inst.K}};
      if (!inst.w1.empty()) in["w1"] = inst.w1;
      list.push_back(in);
    }
    j["instances"] = list;
  }
  if (o.generated) {
    j["generated"] = {{"count", o.generated->count}, {"max_K", o.generated->max_K}, {"seed", o.generated->seed}};
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  const std::string where = "config";
  check_keys(j,
             {"dataset", "scheme", "schemes", "schedule", "K", "n_traj", "seed", "enforce_assumptions", "w1", "outputs",
              "panels", "n_rep", "oracle"},
             where);
  ExperimentConfig c;
  if (j.contains("dataset")) c.dataset = parse_dataset(j.at("dataset"), "dataset");
  if (j.contains("scheme")) c.scheme = parse_scheme(j.at("scheme"), "scheme");
  if (j.contains("schemes")) {
    const json& list = j.at("schemes");
    if (!list.is_array()) throw ConfigError("schemes must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = "schemes[" + std::to_string(i) + "]";
      check_keys(list[i], {"name", "scheme"}, w);
      c.schemes.push_back({read<std::string>(list[i], "name", w), parse_scheme(read<json>(list[i], "scheme", w), w)});
    }
  }
  if (j.contains("schedule")) c.schedule = parse_schedule(j.at("schedule"), "schedule");
  c.K = read_or(j, "K", where, c.K);
  c.n_traj = read_or(j, "n_traj", where, c.n_traj);
  c.seed = read_or(j, "seed", where, c.seed);
  c.enforce_assumptions = read_or(j, "enforce_assumptions", where, c.enforce_assumptions);
  c.w1 = read_or(j, "w1", where, c.w1);
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    check_keys(o, {"csv_dir", "plot"}, "outputs");
    c.outputs.csv_dir = read_or(o, "csv_dir", "outputs", c.outputs.csv_dir);
    c.outputs.plot = read_or(o, "plot", "outputs", c.outputs.plot);
  }
  if (j.contains("panels")) {
    const json& list = j.at("panels");
    if (!list.is_array()) throw ConfigError("panels must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = "panels[" + std::to_string(i) + "]";
      check_keys(list[i], {"name", "noise_map"}, w);
      c.panels.push_back(
          {read<std::string>(list[i], "name", w), parse_noise_map(read<json>(list[i], "noise_map", w), w)});
    }
  }
  c.n_rep = read_or(j, "n_rep", where, c.n_rep);
  if (j.contains("oracle")) c.oracle = parse_oracle(j.at("oracle"), "oracle");
  if (c.K < 0) throw ConfigError("K must be >= 0");
  if (c.n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (c.n_rep < 1) throw ConfigError("n_rep must be >= 1");
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j = {{"K", c.K},
            {"n_traj", c.n_traj},
            {"seed", c.seed},
            {"enforce_assumptions", c.enforce_assumptions},
            {"outputs", {{"csv_dir", c.outputs.csv_dir}, {"plot", c.outputs.plot}}},
            {"n_rep", c.n_rep}};
  if (c.dataset) j["dataset"] = dataset_json(*c.dataset);
  if (c.scheme) j["scheme"] = scheme_json(*c.scheme);
  if (!c.schemes.empty()) {
    json list = json::array();
    for (const auto& s : c.schemes) list.push_back({{"name", s.name}, {"scheme", scheme_json(s.scheme)}});
    j["schemes"] = list;
  }
  if (c.schedule) j["schedule"] = schedule_json(*c.schedule);
  if (!c.w1.empty()) j["w1"] = c.w1;
  if (!c.panels.empty()) {
    json list = json::array();
    for (const auto& p : c.panels) list.push_back({{"name", p.name}, {"noise_map", noise_map_json(p.noise_map)}});
    j["panels"] = list;
  }
  if (c.oracle) j["oracle"] = oracle_json(*c.oracle);
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  ExperimentConfig c = parse_config(j);
  const auto resolve = [&](DatasetSpec& spec) {
    if (auto* f = std::get_if<DataFile>(&spec)) {
      const std::filesystem::path p(f->path);
      if (p.is_relative()) f->path = (path.parent_path() / p).lexically_normal().string();
    }
  };
  if (c.dataset) resolve(*c.dataset);
  if (c.oracle) {
    for (auto& inst : c.oracle->instances) resolve(inst.dataset);
  }
  return c;
}

}  // namespace rwgd::cli
