#pragma once

// Experiment orchestration: fans replications out over a worker pool,
// reduces them in replication order and writes a versioned JSON result set.

#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "supermarket/estimators.hpp"
#include "supermarket/experiment_config.hpp"

namespace supermarket {

inline constexpr int kResultSchemaVersion = 1;

/// Results for one grid point. Replication i of cell c ran with
/// derive_seed(config.seed, c, i), listed in `replication_seeds`.
struct CellRecord {
  std::size_t cell = 0;
  GridPoint point;
  std::vector<std::uint64_t> replication_seeds;
  bool ok = true;
  std::string error;
  std::vector<std::pair<std::string, EstimateWithError>> estimates;
  std::vector<std::pair<std::string, std::vector<double>>> series;

  /// Throws std::out_of_range when the estimate is missing.
  const EstimateWithError& estimate(const std::string& name) const;
  const std::vector<double>& values(const std::string& name) const;
  bool has_estimate(const std::string& name) const;
};

struct ResultSet {
  int schema_version = kResultSchemaVersion;
  ExperimentConfig config;
  std::vector<CellRecord> records;
  /// Cross-cell quantities such as regression slopes.
  std::vector<std::pair<std::string, EstimateWithError>> summary;
  double wall_seconds = 0.0;
  std::size_t workers = 1;

  const EstimateWithError& summary_value(const std::string& name) const;
};

/// Runs the configured scenario over the grid. Cells run one after the
/// other; a cell that throws is recorded as failed and the run goes on.
/// The result is written to config.output when `write` is set.
ResultSet run(const ExperimentConfig& config, bool write = true);

/// JSON document with keys schema_version, config, records, summary and
/// metadata. Everything outside `metadata` is a pure function of the config.
std::string to_json(const ResultSet& results);
/// Parses and validates a result document; throws ValidationError when the
/// schema version or layout does not match.
ResultSet results_from_json(const std::string& text);

/// Validates, then writes; throws std::runtime_error when the file cannot be
/// written.
void write_results(const ResultSet& results, const std::string& path);
ResultSet read_results(const std::string& path);

/// Runs job(i) for i in [0, count) on `workers` threads and returns the
/// results in index order. Jobs must not share mutable state. If any job
/// throws, the exception of the lowest failing index is rethrown once all
/// workers have stopped.
template <class T>
std::vector<T> parallel_map(std::size_t count, std::size_t workers,
                            const std::function<T(std::size_t)>& job);

namespace detail {
void run_pool(std::size_t count, std::size_t workers,
              const std::function<void(std::size_t)>& job,
              std::vector<std::exception_ptr>& errors);
}  // namespace detail

template <class T>
std::vector<T> parallel_map(std::size_t count, std::size_t workers,
                            const std::function<T(std::size_t)>& job) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  detail::run_pool(count, workers, [&](std::size_t i) { slots[i].emplace(job(i)); }, errors);
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Leave-one-out jackknife over `count` replications. `statistic` receives
/// the index to drop, or count to keep all; returns the full-sample value
/// with the jackknife standard error.
EstimateWithError jackknife(std::size_t count,
                            const std::function<double(std::size_t drop)>& statistic);

/// Ordinary least-squares slope of y on x with its standard error.
EstimateWithError ols_slope(std::span<const double> x, std::span<const double> y);

/// Geometric time grid {0, 0.5, 1, 2, 4, ...} capped by and ending at t_max.
std::vector<double> tracking_time_grid(double t_max);

}  // namespace supermarket
