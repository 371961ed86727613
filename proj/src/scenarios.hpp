#pragma once

#include <cstdint>
#include <vector>

#include "supermarket/experiments.hpp"

namespace supermarket::scenarios {

struct CellContext {
  const ExperimentConfig& config;
  std::size_t cell;
  const GridPoint& point;
  std::vector<std::uint64_t> seeds;  // one per replication
  std::size_t workers;
};

/// Fills record.estimates and record.series for one grid point.
void run_cell(const CellContext& ctx, CellRecord& record);

/// Cross-cell summary, computed from successful cells only.
void summarize(ResultSet& results);

}  // namespace supermarket::scenarios
