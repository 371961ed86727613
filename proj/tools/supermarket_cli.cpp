// Command-line front end: run and validate experiment configs, solve the
// exact oracle, and integrate the mean-field ODE.
//
// Exit codes: 0 success, 1 validation failure, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <string>

#include "supermarket/experiments.hpp"
#include "supermarket/meanfield.hpp"
#include "supermarket/oracle.hpp"

namespace sm = supermarket;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

void print_summary(const sm::ResultSet& results) {
  std::cout << "scenario " << sm::scenario_name(results.config.scenario) << ", "
            << results.records.size() << " cell(s), " << results.config.replications
            << " replications, " << std::fixed << std::setprecision(1) << results.wall_seconds
            << " s\n";
  std::cout << std::defaultfloat << std::setprecision(6);
  for (const auto& r : results.records) {
    std::cout << "cell " << r.cell << " (n=" << r.point.n << ", lambda=" << r.point.lambda
              << ", d=" << r.point.d << ")";
    if (!r.ok) {
      std::cout << " FAILED: " << r.error << '\n';
      continue;
    }
    std::cout << '\n';
    for (const auto& [name, e] : r.estimates) {
      std::cout << "  " << std::left << std::setw(36) << name << std::right << std::setw(14)
                << e.value << " +- " << e.std_error << '\n';
    }
  }
  for (const auto& [name, e] : results.summary) {
    std::cout << "summary " << name << " = " << e.value << " +- " << e.std_error << '\n';
  }
  std::cout << "results written to " << results.config.output << '\n';
}

int cmd_run(const std::string& path) {
  const sm::ExperimentConfig config = sm::load_config(path);
  (void)sm::effective_workers(config);
  const sm::ResultSet results = sm::run(config);
  print_summary(results);
  for (const auto& r : results.records) {
    if (!r.ok) std::cerr << "warning: cell " << r.cell << " failed: " << r.error << '\n';
  }
  return kOk;
}

int cmd_validate(const std::string& path) {
  const sm::ExperimentConfig config = sm::load_config(path);
  (void)sm::effective_workers(config);
  std::cout << sm::to_yaml(config);
  return kOk;
}

int cmd_oracle(std::size_t n, double lambda, unsigned d, unsigned cap) {
  const sm::ModelParams params = sm::make_params(n, lambda, d);
  const sm::TruncatedChain chain = sm::build_chain(params, cap);
  const auto pi = sm::stationary(chain);
  sm::write_oracle_json(std::cout, chain, pi);
  return kOk;
}

int cmd_ode(double lambda, unsigned d, double t, bool grid) {
  if (!(t >= 0.0)) throw sm::ValidationError("t", "must be non-negative");
  const sm::ModelParams params = sm::make_params(1, lambda, d);
  const sm::TailVector v0 = sm::TailVector::point_mass_at_zero();
  std::vector<double> times{t};
  if (grid && t > 0.0) times = sm::tracking_time_grid(t);
  const auto trajectory =
      sm::integrate_trajectory(v0, times, params, sm::default_ode_config(params, v0));
  sm::write_trajectory_csv(std::cout, times, trajectory);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supermarket model simulator, mean-field solver and experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Path to the YAML config")->required();

  auto* validate = app.add_subcommand("validate", "Validate a config and print its canonical form");
  validate->add_option("config", config_path, "Path to the YAML config")->required();

  std::size_t n = 0;
  double lambda = 0.0;
  unsigned d = 0;
  unsigned cap = 0;
  auto* oracle = app.add_subcommand("oracle", "Exact stationary law of a tiny system as JSON");
  oracle->add_option("n", n, "Number of queues (at most 4)")->required();
  oracle->add_option("lambda", lambda, "Arrival intensity per queue, in (0, 1)")->required();
  oracle->add_option("d", d, "Choices per arrival")->required();
  oracle->add_option("cap", cap, "Largest queue length kept")->required();

  double t = 0.0;
  bool grid = false;
  auto* ode = app.add_subcommand("ode", "Mean-field tail v_t from the empty system as CSV");
  ode->add_option("lambda", lambda, "Arrival intensity per queue, in (0, 1)")->required();
  ode->add_option("d", d, "Choices per arrival")->required();
  ode->add_option("t", t, "Time")->required();
  ode->add_flag("--grid", grid, "Print the geometric grid 0, 0.5, 1, 2, ..., t instead of t alone");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*validate) return cmd_validate(config_path);
    if (*oracle) return cmd_oracle(n, lambda, d, cap);
    if (*ode) return cmd_ode(lambda, d, t, grid);
  } catch (const sm::ValidationError& e) {
    std::cerr << "validation error [" << e.field() << "]: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
