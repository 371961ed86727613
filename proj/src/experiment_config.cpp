#include "supermarket/experiment_config.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "supermarket/oracle.hpp"

namespace supermarket {

namespace {

constexpr std::array<std::pair<Scenario, std::string_view>, 8> kScenarioNames{{
    {Scenario::EquilibriumMarginal, "equilibrium-marginal"},
    {Scenario::MarginalScaling, "marginal-scaling"},
    {Scenario::ChaosScaling, "chaos-scaling"},
    {Scenario::NonequilibriumTracking, "nonequilibrium-tracking"},
    {Scenario::MixingDiagnostic, "mixing-diagnostic"},
    {Scenario::MaxQueueConcentration, "max-queue-concentration"},
    {Scenario::VarianceStudy, "variance-study"},
    {Scenario::OracleValidation, "oracle-validation"},
}};

constexpr std::array<std::pair<InitialFamily, std::string_view>, 3> kFamilyNames{{
    {InitialFamily::PointZero, "point-zero"},
    {InitialFamily::TruncatedGeometric, "truncated-geometric"},
    {InitialFamily::BoundedUniform, "bounded-uniform"},
}};

void reject_unknown(const YAML::Node& map, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!map.IsMap()) throw ValidationError(where, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ValidationError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

template <class T>
T read(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError(field, "has the wrong type");
  }
}

template <class T>
void read_if(const YAML::Node& map, const char* key, const std::string& prefix, T& out) {
  if (const YAML::Node node = map[key]) out = read<T>(node, prefix + key);
}

template <class T>
void read_if(const YAML::Node& map, const char* key, const std::string& prefix,
             std::optional<T>& out) {
  if (const YAML::Node node = map[key]) out = read<T>(node, prefix + key);
}

// Non-negative integers arrive through a signed read so "-3" is reported
// as out of range instead of wrapping.
std::size_t read_count(const YAML::Node& node, const std::string& field) {
  const auto v = read<long long>(node, field);
  if (v < 0) throw ValidationError(field, "must be non-negative");
  return static_cast<std::size_t>(v);
}

void read_count_if(const YAML::Node& map, const char* key, const std::string& prefix,
                   std::size_t& out) {
  if (const YAML::Node node = map[key]) out = read_count(node, prefix + key);
}

std::string number(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

std::string_view scenario_name(Scenario s) noexcept {
  for (const auto& [value, name] : kScenarioNames) {
    if (value == s) return name;
  }
  return "unknown";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept {
  for (const auto& [value, label] : kScenarioNames) {
    if (label == name) return value;
  }
  return std::nullopt;
}

std::string_view initial_family_name(InitialFamily f) noexcept {
  for (const auto& [value, name] : kFamilyNames) {
    if (value == f) return name;
  }
  return "unknown";
}

std::vector<double> InitialLaw::pmf() const {
  if (family == InitialFamily::PointZero) return {1.0};
  std::vector<double> p(max_length + 1);
  double w = 1.0;
  double total = 0.0;
  for (double& x : p) {
    x = family == InitialFamily::TruncatedGeometric ? w : 1.0;
    total += x;
    w *= ratio;
  }
  for (double& x : p) x /= total;
  return p;
}

TailVector InitialLaw::tail() const {
  const auto p = pmf();
  std::vector<double> v(p.size());
  double acc = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) {
    acc += p[k];
    v[k] = acc;
  }
  v[0] = 1.0;
  for (std::size_t k = 1; k < v.size(); ++k) v[k] = std::min(v[k], v[k - 1]);
  return TailVector(std::move(v));
}

QueueState InitialLaw::sample(std::size_t n, Engine& engine) const {
  std::vector<QueueLength> x(n, 0);
  if (family == InitialFamily::PointZero) return QueueState(std::move(x));
  const auto p = pmf();
  std::discrete_distribution<QueueLength> draw(p.begin(), p.end());
  for (auto& len : x) len = draw(engine);
  return QueueState(std::move(x));
}

double ExperimentConfig::burn_in_for(const GridPoint& p) const {
  if (burn_in) return *burn_in;
  return 10.0 * std::log(static_cast<double>(p.n));
}

void validate(const ExperimentConfig& c) {
  if (c.grid.empty()) throw ValidationError("grid", "needs at least one parameter combination");
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const GridPoint& p = c.grid[i];
    const std::string where = "grid[" + std::to_string(i) + "]";
    try {
      (void)p.params();
    } catch (const ValidationError& e) {
      throw ValidationError(where + "." + e.field(), e.what());
    }
    if (p.samples && *p.samples == 0) throw ValidationError(where + ".samples", "must be positive");
    if (c.scenario == Scenario::MarginalScaling && p.d < 2) {
      throw ValidationError(where + ".d", "marginal scaling needs d >= 2");
    }
    if (c.scenario == Scenario::ChaosScaling && c.r > p.n) {
      throw ValidationError("chaos.r", "exceeds n at " + where);
    }
    if (c.scenario == Scenario::OracleValidation) {
      try {
        const ModelParams params = p.params();
        (void)build_chain(params, c.cap.value_or(default_cap(params)));
      } catch (const ValidationError& e) {
        throw ValidationError(where + "." + e.field(), e.what());
      }
    }
  }
  if (c.scenario == Scenario::MarginalScaling && c.grid.size() < 2) {
    throw ValidationError("grid", "a scaling run needs at least two values of n");
  }
  if (c.replications < kMinReplications) {
    throw ValidationError("replications",
                          "at least " + std::to_string(kMinReplications) +
                              " are needed for standard errors");
  }
  if (c.workers < 1) throw ValidationError("workers", "must be at least 1");
  if (c.output.empty()) throw ValidationError("output", "must name a result file");
  if (c.burn_in && !(*c.burn_in >= 0.0 && std::isfinite(*c.burn_in))) {
    throw ValidationError("sampling.burn_in", "must be finite and non-negative");
  }
  if (!(c.spacing > 0.0 && std::isfinite(c.spacing))) {
    throw ValidationError("sampling.spacing", "must be positive");
  }
  if (c.samples < 1) throw ValidationError("sampling.samples", "must be positive");
  if (c.r < 1 || c.r > 3) throw ValidationError("chaos.r", "must be 1, 2 or 3");
  if (c.initial.family == InitialFamily::TruncatedGeometric &&
      !(c.initial.ratio > 0.0 && c.initial.ratio < 1.0)) {
    throw ValidationError("tracking.initial.ratio", "must lie in (0, 1)");
  }
  if (c.t_max && !(*c.t_max > 0.0 && std::isfinite(*c.t_max))) {
    throw ValidationError("tracking.t_max", "must be positive");
  }
  if (c.pool_queues < 1) throw ValidationError("tracking.pool_queues", "must be positive");
  if (!(c.theta > 1.0)) throw ValidationError("tracking.theta", "must exceed 1");
  if (c.horizon && !(*c.horizon > 0.0 && std::isfinite(*c.horizon))) {
    throw ValidationError("mixing.horizon", "must be positive");
  }
  if (c.cap && *c.cap < 1) throw ValidationError("oracle.cap", "must be at least 1");
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ValidationError("config", std::string("not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ValidationError("config", "top level must be a mapping");
  reject_unknown(root, "", {"scenario", "seed", "replications", "workers", "output", "grid",
                            "sampling", "chaos", "tracking", "mixing", "oracle"});

  ExperimentConfig c;
  if (!root["scenario"]) throw ValidationError("scenario", "is required");
  const auto name = read<std::string>(root["scenario"], "scenario");
  const auto scenario = parse_scenario(name);
  if (!scenario) throw ValidationError("scenario", "unknown scenario '" + name + "'");
  c.scenario = *scenario;

  read_if(root, "seed", "", c.seed);
  read_count_if(root, "replications", "", c.replications);
  read_count_if(root, "workers", "", c.workers);
  read_if(root, "output", "", c.output);

  const YAML::Node grid = root["grid"];
  if (!grid || !grid.IsSequence()) throw ValidationError("grid", "must be a list of {n, lambda, d}");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string where = "grid[" + std::to_string(i) + "]";
    const YAML::Node item = grid[i];
    reject_unknown(item, where, {"n", "lambda", "d", "samples"});
    for (const char* key : {"n", "lambda", "d"}) {
      if (!item[key]) throw ValidationError(where + "." + key, "is required");
    }
    GridPoint p;
    p.n = read_count(item["n"], where + ".n");
    p.lambda = read<double>(item["lambda"], where + ".lambda");
    p.d = static_cast<unsigned>(read_count(item["d"], where + ".d"));
    if (item["samples"]) p.samples = read_count(item["samples"], where + ".samples");
    c.grid.push_back(p);
  }

  if (const YAML::Node s = root["sampling"]) {
    reject_unknown(s, "sampling", {"burn_in", "spacing", "samples"});
    read_if(s, "burn_in", "sampling.", c.burn_in);
    read_if(s, "spacing", "sampling.", c.spacing);
    read_count_if(s, "samples", "sampling.", c.samples);
  }
  if (const YAML::Node s = root["chaos"]) {
    reject_unknown(s, "chaos", {"r"});
    read_count_if(s, "r", "chaos.", c.r);
  }
  if (const YAML::Node s = root["tracking"]) {
    reject_unknown(s, "tracking", {"initial", "t_max", "pool_queues", "theta"});
    if (const YAML::Node init = s["initial"]) {
      reject_unknown(init, "tracking.initial", {"family", "ratio", "max"});
      if (init["family"]) {
        const auto fam = read<std::string>(init["family"], "tracking.initial.family");
        bool found = false;
        for (const auto& [value, label] : kFamilyNames) {
          if (label == fam) {
            c.initial.family = value;
            found = true;
          }
        }
        if (!found) throw ValidationError("tracking.initial.family", "unsupported family '" + fam + "'");
      }
      read_if(init, "ratio", "tracking.initial.", c.initial.ratio);
      if (init["max"]) {
        c.initial.max_length = static_cast<unsigned>(read_count(init["max"], "tracking.initial.max"));
      }
    }
    read_if(s, "t_max", "tracking.", c.t_max);
    read_count_if(s, "pool_queues", "tracking.", c.pool_queues);
    read_if(s, "theta", "tracking.", c.theta);
  }
  if (const YAML::Node s = root["mixing"]) {
    reject_unknown(s, "mixing", {"level", "horizon"});
    if (s["level"]) c.mixing_level = static_cast<unsigned>(read_count(s["level"], "mixing.level"));
    read_if(s, "horizon", "mixing.", c.horizon);
  }
  if (const YAML::Node s = root["oracle"]) {
    reject_unknown(s, "oracle", {"cap"});
    if (s["cap"]) c.cap = static_cast<unsigned>(read_count(s["cap"], "oracle.cap"));
  }

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "scenario: " << scenario_name(c.scenario) << '\n'
      << "seed: " << c.seed << '\n'
      << "replications: " << c.replications << '\n'
      << "workers: " << c.workers << '\n'
      << "output: " << quoted(c.output) << '\n'
      << "grid:\n";
  for (const GridPoint& p : c.grid) {
    out << "  - {n: " << p.n << ", lambda: " << number(p.lambda) << ", d: " << p.d;
    if (p.samples) out << ", samples: " << *p.samples;
    out << "}\n";
  }
  out << "sampling:\n";
  if (c.burn_in) out << "  burn_in: " << number(*c.burn_in) << '\n';
  out << "  spacing: " << number(c.spacing) << '\n'
      << "  samples: " << c.samples << '\n'
      << "chaos:\n"
      << "  r: " << c.r << '\n'
      << "tracking:\n"
      << "  initial: {family: " << initial_family_name(c.initial.family)
      << ", ratio: " << number(c.initial.ratio) << ", max: " << c.initial.max_length << "}\n";
  if (c.t_max) out << "  t_max: " << number(*c.t_max) << '\n';
  out << "  pool_queues: " << c.pool_queues << '\n'
      << "  theta: " << number(c.theta) << '\n'
      << "mixing:\n"
      << "  level: " << c.mixing_level << '\n';
  if (c.horizon) out << "  horizon: " << number(*c.horizon) << '\n';
  if (c.cap) out << "oracle:\n  cap: " << *c.cap << '\n';
  return out.str();
}

std::string to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = scenario_name(c.scenario);
  j["seed"] = c.seed;
  j["replications"] = c.replications;
  j["workers"] = c.workers;
  j["output"] = c.output;
  j["grid"] = nlohmann::json::array();
  for (const GridPoint& p : c.grid) {
    nlohmann::json g{{"n", p.n}, {"lambda", p.lambda}, {"d", p.d}};
    if (p.samples) g["samples"] = *p.samples;
    j["grid"].push_back(g);
  }
  j["sampling"] = {{"spacing", c.spacing}, {"samples", c.samples}};
  if (c.burn_in) j["sampling"]["burn_in"] = *c.burn_in;
  j["chaos"] = {{"r", c.r}};
  j["tracking"] = {{"initial",
                    {{"family", initial_family_name(c.initial.family)},
                     {"ratio", c.initial.ratio},
                     {"max", c.initial.max_length}}},
                   {"pool_queues", c.pool_queues},
                   {"theta", c.theta}};
  if (c.t_max) j["tracking"]["t_max"] = *c.t_max;
  j["mixing"] = {{"level", c.mixing_level}};
  if (c.horizon) j["mixing"]["horizon"] = *c.horizon;
  if (c.cap) j["oracle"] = {{"cap", *c.cap}};
  return j.dump();
}

std::size_t effective_workers(const ExperimentConfig& config) {
  const char* env = std::getenv("SUPERMARKET_WORKERS");
  if (env == nullptr || *env == '\0') return config.workers;
  std::size_t value = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto res = std::from_chars(env, end, value);
  if (res.ec != std::errc{} || res.ptr != end || value < 1) {
    throw ValidationError("SUPERMARKET_WORKERS", "must be a positive integer");
  }
  return value;
}

}  // namespace supermarket
