#include "supermarket/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "scenarios.hpp"
#include "supermarket/rng.hpp"

namespace supermarket {

using Json = nlohmann::ordered_json;

namespace {

template <class Map>
auto find_named(const Map& items, const std::string& name) {
  for (auto it = items.begin(); it != items.end(); ++it) {
    if (it->first == name) return it;
  }
  return items.end();
}

Json estimate_json(const EstimateWithError& e) {
  return Json{{"value", e.value}, {"std_error", e.std_error}, {"replications", e.replication_count}};
}

// NaN and infinities are written as null by the JSON layer.
double number_or_nan(const Json& j, const std::string& field) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw ValidationError(field, "must be a number");
  return j.get<double>();
}

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError(where.empty() ? key : where + "." + key, "is missing");
  }
  return obj.at(key);
}

EstimateWithError estimate_from(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "must be an object");
  const Json& reps = member(j, "replications", where);
  if (!reps.is_number_unsigned()) throw ValidationError(where + ".replications", "must be a count");
  EstimateWithError e;
  e.value = number_or_nan(member(j, "value", where), where + ".value");
  e.std_error = number_or_nan(member(j, "std_error", where), where + ".std_error");
  e.replication_count = reps.get<std::size_t>();
  return e;
}

std::vector<std::pair<std::string, EstimateWithError>> estimates_from(const Json& j,
                                                                      const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "must be an object");
  std::vector<std::pair<std::string, EstimateWithError>> out;
  for (const auto& [name, value] : j.items()) out.emplace_back(name, estimate_from(value, where + "." + name));
  return out;
}

}  // namespace

const EstimateWithError& CellRecord::estimate(const std::string& name) const {
  const auto it = find_named(estimates, name);
  if (it == estimates.end()) throw std::out_of_range("no estimate '" + name + "'");
  return it->second;
}

const std::vector<double>& CellRecord::values(const std::string& name) const {
  const auto it = find_named(series, name);
  if (it == series.end()) throw std::out_of_range("no series '" + name + "'");
  return it->second;
}

bool CellRecord::has_estimate(const std::string& name) const {
  return find_named(estimates, name) != estimates.end();
}

const EstimateWithError& ResultSet::summary_value(const std::string& name) const {
  const auto it = find_named(summary, name);
  if (it == summary.end()) throw std::out_of_range("no summary value '" + name + "'");
  return it->second;
}

namespace detail {

void run_pool(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job,
              std::vector<std::exception_ptr>& errors) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), count);
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
}

}  // namespace detail

EstimateWithError jackknife(std::size_t count,
                            const std::function<double(std::size_t drop)>& statistic) {
  if (count < 2) throw ValidationError("replications", "jackknife needs at least two");
  const double full = statistic(count);
  std::vector<double> loo(count);
  for (std::size_t i = 0; i < count; ++i) loo[i] = statistic(i);
  const double c = static_cast<double>(count);
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / c;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return {full, std::sqrt((c - 1.0) / c * ss), count};
}

EstimateWithError ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("regression", "needs two or more points");
  const double m = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("regression", "x values must not all coincide");
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fit = my + slope * (x[i] - mx);
    rss += (y[i] - fit) * (y[i] - fit);
  }
  const double se = x.size() > 2 ? std::sqrt(rss / (m - 2.0) / sxx) : 0.0;
  return {slope, se, x.size()};
}

std::vector<double> tracking_time_grid(double t_max) {
  if (!(t_max > 0.0)) throw ValidationError("t_max", "must be positive");
  std::vector<double> grid{0.0};
  for (double t = 0.5; t < t_max; t *= 2.0) grid.push_back(t);
  grid.push_back(t_max);
  return grid;
}

ResultSet run(const ExperimentConfig& config, bool write) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  ResultSet results;
  results.config = config;
  results.workers = effective_workers(config);

  for (std::size_t c = 0; c < config.grid.size(); ++c) {
    CellRecord record;
    record.cell = c;
    record.point = config.grid[c];
    for (std::size_t i = 0; i < config.replications; ++i) {
      record.replication_seeds.push_back(derive_seed(config.seed, c, i));
    }
    try {
      const scenarios::CellContext ctx{config, c, record.point, record.replication_seeds,
                                       results.workers};
      scenarios::run_cell(ctx, record);
    } catch (const std::exception& e) {
      record.ok = false;
      record.error = e.what();
      record.estimates.clear();
      record.series.clear();
    }
    results.records.push_back(std::move(record));
  }
  scenarios::summarize(results);
  results.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (write) write_results(results, config.output);
  return results;
}

std::string to_json(const ResultSet& results) {
  Json doc;
  doc["schema_version"] = results.schema_version;
  doc["config"] = Json::parse(to_json(results.config));
  doc["records"] = Json::array();
  for (const CellRecord& r : results.records) {
    Json rec;
    rec["cell"] = r.cell;
    rec["params"] = {{"n", r.point.n}, {"lambda", r.point.lambda}, {"d", r.point.d}};
    if (r.point.samples) rec["params"]["samples"] = *r.point.samples;
    rec["master_seed"] = results.config.seed;
    rec["replication_seeds"] = r.replication_seeds;
    rec["ok"] = r.ok;
    if (!r.ok) rec["error"] = r.error;
    rec["estimates"] = Json::object();
    for (const auto& [name, e] : r.estimates) rec["estimates"][name] = estimate_json(e);
    rec["series"] = Json::object();
    for (const auto& [name, v] : r.series) rec["series"][name] = v;
    doc["records"].push_back(std::move(rec));
  }
  doc["summary"] = Json::object();
  for (const auto& [name, e] : results.summary) doc["summary"][name] = estimate_json(e);
  doc["metadata"] = {{"wall_seconds", results.wall_seconds}, {"workers", results.workers}};
  return doc.dump(2);
}

ResultSet results_from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("results", std::string("not valid JSON: ") + e.what());
  }
  const Json& version = member(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kResultSchemaVersion) {
    throw ValidationError("schema_version", "unsupported result schema version");
  }
  ResultSet out;
  out.schema_version = version.get<int>();
  out.config = parse_config(member(doc, "config", "").dump());

  const Json& records = member(doc, "records", "");
  if (!records.is_array()) throw ValidationError("records", "must be an array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string where = "records[" + std::to_string(i) + "]";
    const Json& rec = records[i];
    CellRecord r;
    const Json& cell = member(rec, "cell", where);
    if (!cell.is_number_unsigned()) throw ValidationError(where + ".cell", "must be a count");
    r.cell = cell.get<std::size_t>();
    if (r.cell >= out.config.grid.size()) throw ValidationError(where + ".cell", "outside the grid");
    r.point = out.config.grid[r.cell];
    const Json& params = member(rec, "params", where);
    if (member(params, "n", where + ".params") != r.point.n ||
        member(params, "d", where + ".params") != r.point.d ||
        member(params, "lambda", where + ".params") != r.point.lambda) {
      throw ValidationError(where + ".params", "does not match the config grid");
    }
    if (member(rec, "master_seed", where) != out.config.seed) {
      throw ValidationError(where + ".master_seed", "does not match the config seed");
    }
    const Json& seeds = member(rec, "replication_seeds", where);
    if (!seeds.is_array()) throw ValidationError(where + ".replication_seeds", "must be an array");
    for (const Json& s : seeds) {
      if (!s.is_number_unsigned()) throw ValidationError(where + ".replication_seeds", "must hold seeds");
      r.replication_seeds.push_back(s.get<std::uint64_t>());
    }
    for (std::size_t k = 0; k < r.replication_seeds.size(); ++k) {
      if (r.replication_seeds[k] != derive_seed(out.config.seed, r.cell, k)) {
        throw ValidationError(where + ".replication_seeds", "not derived from the master seed");
      }
    }
    const Json& ok = member(rec, "ok", where);
    if (!ok.is_boolean()) throw ValidationError(where + ".ok", "must be a boolean");
    r.ok = ok.get<bool>();
    if (!r.ok) {
      const Json& err = member(rec, "error", where);
      if (!err.is_string()) throw ValidationError(where + ".error", "must be a string");
      r.error = err.get<std::string>();
    }
    r.estimates = estimates_from(member(rec, "estimates", where), where + ".estimates");
    const Json& series = member(rec, "series", where);
    if (!series.is_object()) throw ValidationError(where + ".series", "must be an object");
    for (const auto& [name, values] : series.items()) {
      if (!values.is_array()) throw ValidationError(where + ".series." + name, "must be an array");
      std::vector<double> v;
      for (const Json& x : values) v.push_back(number_or_nan(x, where + ".series." + name));
      r.series.emplace_back(name, std::move(v));
    }
    out.records.push_back(std::move(r));
  }
  out.summary = estimates_from(member(doc, "summary", ""), "summary");
  const Json& meta = member(doc, "metadata", "");
  out.wall_seconds = number_or_nan(member(meta, "wall_seconds", "metadata"), "metadata.wall_seconds");
  const Json& workers = member(meta, "workers", "metadata");
  if (!workers.is_number_unsigned()) throw ValidationError("metadata.workers", "must be a count");
  out.workers = workers.get<std::size_t>();
  return out;
}

void write_results(const ResultSet& results, const std::string& path) {
  const std::string text = to_json(results);
  (void)results_from_json(text);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write results to '" + path + "'");
  out << text << '\n';
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

ResultSet read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("results", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return results_from_json(buf.str());
}

}  // namespace supermarket
