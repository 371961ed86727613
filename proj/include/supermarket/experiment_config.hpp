#pragma once

// Experiment configuration: a YAML document with nested sections, parsed
// and validated up front so a run never starts from a bad file.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "supermarket/core.hpp"
#include "supermarket/rng.hpp"

namespace supermarket {

enum class Scenario {
  EquilibriumMarginal,
  MarginalScaling,
  ChaosScaling,
  NonequilibriumTracking,
  MixingDiagnostic,
  MaxQueueConcentration,
  VarianceStudy,
  OracleValidation,
};

std::string_view scenario_name(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view name) noexcept;

/// One parameter combination. `samples` overrides the global snapshot count
/// for this cell, which lets scaling runs keep the total work per cell fixed.
struct GridPoint {
  std::size_t n = 0;
  double lambda = 0.0;
  unsigned d = 0;
  std::optional<std::size_t> samples;

  ModelParams params() const { return make_params(n, lambda, d); }
};

enum class InitialFamily { PointZero, TruncatedGeometric, BoundedUniform };

std::string_view initial_family_name(InitialFamily f) noexcept;

/// Law of iid initial queue lengths for the tracking scenario.
struct InitialLaw {
  InitialFamily family = InitialFamily::PointZero;
  double ratio = 0.5;          // truncated geometric: Pr(L = j) proportional to ratio^j
  unsigned max_length = 10;    // support {0, ..., max_length}

  /// Pr(L = j) for j = 0..max_length (a single 1 for PointZero).
  std::vector<double> pmf() const;
  /// v0(k) = Pr(L >= k).
  TailVector tail() const;
  /// n iid draws.
  QueueState sample(std::size_t n, Engine& engine) const;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::EquilibriumMarginal;
  std::vector<GridPoint> grid;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string output;

  // sampling
  std::optional<double> burn_in;  // default: 10 ln n (runs start empty)
  double spacing = 1.0;
  std::size_t samples = 100;

  // chaos-scaling
  std::size_t r = 2;

  // nonequilibrium-tracking
  InitialLaw initial;
  std::optional<double> t_max;     // default: 20 ln n
  std::size_t pool_queues = 100000;
  double theta = 2.0;

  // mixing-diagnostic
  unsigned mixing_level = 5;
  std::optional<double> horizon;   // default: 50 (level + ln n)

  // oracle-validation
  std::optional<unsigned> cap;

  std::size_t samples_for(const GridPoint& p) const { return p.samples.value_or(samples); }
  double burn_in_for(const GridPoint& p) const;
};

/// Smallest number of replications accepted; standard errors need it.
inline constexpr std::size_t kMinReplications = 20;

/// Parses YAML text (JSON is accepted as well) and validates the result.
/// Unknown keys are rejected so typos cannot silently fall back to defaults.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Throws ValidationError naming the offending field.
void validate(const ExperimentConfig& config);

/// Canonical YAML: fixed key order, defaults written out, unset optional
/// fields omitted, one grid point per line. Parsing the output gives back
/// an equal configuration.
std::string to_yaml(const ExperimentConfig& config);
/// The same content as a JSON object, used as the config echo in results.
std::string to_json(const ExperimentConfig& config);

/// Worker count after the SUPERMARKET_WORKERS override, if set.
std::size_t effective_workers(const ExperimentConfig& config);

}  // namespace supermarket
