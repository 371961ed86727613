#include "doctest.h"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "supermarket/coupling_sim.hpp"
#include "supermarket/oracle.hpp"

using namespace supermarket;

TEST_CASE("a single queue is a truncated M/M/1 queue") {
  const double lambda = 0.6;
  const TruncatedChain chain = build_chain(make_params(1, lambda, 2), 60);
  const auto pi = stationary(chain);
  const double norm = (1 - lambda) / (1 - std::pow(lambda, 61));
  for (std::size_t k = 0; k <= 60; ++k) {
    CHECK(pi[k] == doctest::Approx(norm * std::pow(lambda, k)).epsilon(1e-10));
  }
}

TEST_CASE("state indexing and routing counts") {
  const TruncatedChain chain = build_chain(make_params(2, 0.5, 2), 4);
  CHECK(chain.state_count() == 25);
  CHECK(chain.index(QueueState{0, 0}) == 0);
  CHECK(chain.index(QueueState{1, 0}) == 5);
  CHECK(chain.state(7) == QueueState{1, 2});
  // (0,0) goes to queue 0; (0,1), (1,0) and (1,1) all pick queue 1.
  CHECK(chain.routing_counts(QueueState{3, 1}) == std::vector<std::uint64_t>{1, 3});
  CHECK(chain.routing_counts(QueueState{2, 2}) == std::vector<std::uint64_t>{2, 2});
  CHECK(chain.rows_balance_exactly());
  const TruncatedChain three = build_chain(make_params(3, 0.5, 3), 3);
  CHECK(three.rows_balance_exactly());
  CHECK(three.routing_counts(QueueState{0, 1, 1}) == std::vector<std::uint64_t>{19, 4, 4});
}

TEST_CASE("generator rows sum to zero") {
  const TruncatedChain chain = build_chain(make_params(3, 0.7, 2), 6);
  std::vector<double> row(chain.state_count(), 0.0);
  for (const auto& t : chain.transitions()) row[t.from] += t.rate;
  for (std::size_t s = 0; s < row.size(); ++s) CHECK(row[s] + chain.diagonal()[s] == doctest::Approx(0.0));
}

TEST_CASE("stationary law of two queues") {
  const ModelParams p = make_params(2, 0.5, 2);
  const unsigned cap = default_cap(p);
  const TruncatedChain chain = build_chain(p, cap);
  const auto pi = stationary(chain);
  CHECK(stationary_residual(chain, pi) <= 1e-12);

  const EmpiricalLaw joint = exact_joint(chain, pi);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) {
      const std::size_t ab[] = {a, b};
      const std::size_t ba[] = {b, a};
      CHECK(std::fabs(joint.at(ab) - joint.at(ba)) <= 1e-12);
    }
  }

  const TailAverages avg = exact_tail_averages(chain, pi);
  for (std::size_t k = 1; k < cap; ++k) CHECK(std::fabs(generator_residual(avg, k, 0.5)) <= 1e-10);
  CHECK(avg.mean_u(1) == doctest::Approx(0.5).epsilon(1e-9));
  // Finite n: the second tail exceeds its mean-field value.
  CHECK(avg.mean_u(2) - std::pow(0.5, 3) > 1e-4);

  const auto wider_pi = stationary(build_chain(p, cap + 10));
  const EmpiricalLaw wider = exact_marginal(build_chain(p, cap + 10), wider_pi);
  CHECK(tv_distance(exact_marginal(chain, pi), wider) < 1e-10);
}

TEST_CASE("oracle limits") {
  CHECK_THROWS_AS(build_chain(make_params(5, 0.5, 2), 3), ValidationError);
  CHECK_THROWS_AS(build_chain(make_params(4, 0.5, 2), 40), ValidationError);
  CHECK_THROWS_AS(build_chain(make_params(2, 0.5, 2), 0), ValidationError);
  CHECK(default_cap(make_params(1, 0.5, 2)) == 34);
}

TEST_CASE("oracle JSON") {
  const TruncatedChain chain = build_chain(make_params(2, 0.5, 2), 10);
  const auto pi = stationary(chain);
  std::ostringstream out;
  write_oracle_json(out, chain, pi);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["n"] == 2);
  CHECK(j["cap"] == 10);
  CHECK(j["states"] == 121);
  CHECK(j["marginal"].size() == 11);
  CHECK(j["joint01"].size() == 11);
  CHECK(j["residual"].get<double>() <= 1e-12);
}

TEST_CASE("simulated joint law of two queues matches the oracle") {
  const ModelParams p = make_params(2, 0.5, 2);
  const TruncatedChain chain = build_chain(p, default_cap(p));
  const EmpiricalLaw exact = exact_joint(chain, stationary(chain));
  const auto samples = sample_equilibrium(p, 50.0, 2.0, 40000, 11);
  CHECK(tv_distance(joint_empirical(samples, 2), exact) <= 0.02);
}
