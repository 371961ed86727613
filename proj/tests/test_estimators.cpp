#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "supermarket/coupling_sim.hpp"
#include "supermarket/estimators.hpp"
#include "supermarket/meanfield.hpp"
#include "test_support.hpp"

using namespace supermarket;

namespace {

EmpiricalLaw scalar(std::vector<double> mass) {
  const std::size_t extent = mass.size();
  return EmpiricalLaw(1, extent, std::move(mass));
}

EmpiricalLaw random_law(std::mt19937_64& rng, std::size_t extent) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> m(extent);
  double total = 0.0;
  for (auto& x : m) total += (x = unif(rng));
  for (auto& x : m) x /= total;
  return scalar(std::move(m));
}

}  // namespace

TEST_CASE("across replications") {
  const double v[] = {1.0, 2.0, 3.0, 4.0};
  const auto e = across_replications(v);
  CHECK(e.value == doctest::Approx(2.5));
  // sample sd sqrt(5/3), divided by sqrt(4)
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(e.replication_count == 4);

  std::vector<double> w{0.3, 1.7, -2.0, 5.5, 0.01, 9.0};
  const auto a = across_replications(w);
  std::shuffle(w.begin(), w.end(), std::mt19937_64(2));
  const auto b = across_replications(w);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  CHECK(a.std_error == doctest::Approx(b.std_error).epsilon(1e-12));
}

TEST_CASE("empirical marginals") {
  const std::vector<QueueState> s{{0, 2}, {1, 2}, {0, 0}, {3, 1}};
  const EmpiricalLaw q0 = empirical_marginal(s, 0);
  CHECK(q0[0] == 0.5);
  CHECK(q0[1] == 0.25);
  CHECK(q0[3] == 0.25);
  CHECK(q0.sample_count() == 4);
  const EmpiricalLaw pooled = empirical_marginal(s);
  CHECK(pooled[0] == 3.0 / 8);
  CHECK(pooled[1] == 2.0 / 8);
  CHECK(pooled[2] == 2.0 / 8);
  CHECK(pooled[3] == 1.0 / 8);
}

TEST_CASE("total variation on small examples") {
  CHECK(tv_distance(scalar({0.5, 0.5}), scalar({0.5, 0.5})) == 0.0);
  CHECK(tv_distance(EmpiricalLaw::point_mass(0), EmpiricalLaw::point_mass(4)) == 1.0);
  CHECK(tv_distance(scalar({0.5, 0.5}), scalar({0.25, 0.25, 0.5})) == doctest::Approx(0.5));
}

TEST_CASE("total variation is a metric bounded by Wasserstein") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const EmpiricalLaw p = random_law(rng, 1 + rng() % 8);
    const EmpiricalLaw q = random_law(rng, 1 + rng() % 8);
    const EmpiricalLaw r = random_law(rng, 1 + rng() % 8);
    const double pq = tv_distance(p, q);
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0 + 1e-12);
    CHECK(pq == doctest::Approx(tv_distance(q, p)).epsilon(1e-12));
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(pq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12);
    // Integer-valued laws: TV <= W1.
    CHECK(pq <= wasserstein_distance(p, q) + 1e-12);
  }
  CHECK(wasserstein_distance(EmpiricalLaw::point_mass(0), EmpiricalLaw::point_mass(3)) == 3.0);
}

TEST_CASE("distance to an analytic tail") {
  const TailVector geo = limit_law(0.5, 1, 60);
  std::vector<double> m(61);
  for (std::size_t k = 0; k <= 60; ++k) m[k] = geo[k] - geo[k + 1];
  double s = 0.0;
  for (double x : m) s += x;
  m[0] += 1.0 - s;
  CHECK(tv_distance_to_tail(scalar(m), geo) < 1e-11);
  CHECK(tv_distance_to_tail(EmpiricalLaw::point_mass(0), geo) == doctest::Approx(0.5));
}

TEST_CASE("empirical laws of iid draws converge in total variation") {
  std::mt19937_64 rng(6);
  std::geometric_distribution<int> geo(0.5);
  const TailVector tail = limit_law(0.5, 1, 80);
  double previous = 1.0;
  for (std::size_t size : {100u, 10000u, 1000000u}) {
    std::vector<std::uint64_t> counts(80, 0);
    for (std::size_t i = 0; i < size; ++i) ++counts[std::min(geo(rng), 79)];
    const double tv = tv_distance_to_tail(EmpiricalLaw::from_counts(counts), tail);
    CHECK(tv < previous);
    previous = tv;
  }
  CHECK(previous < 0.005);
}

TEST_CASE("moments") {
  const EmpiricalLaw p = scalar({0.25, 0.5, 0.25});
  CHECK(moment(p, 0) == 1.0);
  CHECK(moment(p, 1) == 1.0);
  CHECK(moment(p, 2) == 1.5);
  // First moment of a tail law is sum_{k>=1} v(k).
  const TailVector v = limit_law(0.5, 2, 30);
  double direct = 0.0;
  for (std::size_t k = 1; k <= 30; ++k) direct += v[k];
  CHECK(moment(tail_to_law(v), 1) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("product laws and joint empirical laws") {
  const EmpiricalLaw pr = product_law(scalar({0.5, 0.5}), 2);
  const std::size_t i00[] = {0, 0};
  const std::size_t i10[] = {1, 0};
  CHECK(pr.at(i00) == 0.25);
  CHECK(pr.at(i10) == 0.25);
  const std::vector<QueueState> s{{0, 1, 2, 3}, {1, 1, 0, 0}};
  const EmpiricalLaw first = joint_empirical(s, 2);
  const std::size_t i01[] = {0, 1};
  const std::size_t i11[] = {1, 1};
  CHECK(first.at(i01) == 0.5);
  CHECK(first.at(i11) == 0.5);
  CHECK(first.sample_count() == 2);
  const EmpiricalLaw blocks = joint_empirical(s, 2, JointSampling::DisjointBlocks);
  CHECK(blocks.sample_count() == 4);
  const std::size_t i23[] = {2, 3};
  CHECK(blocks.at(i23) == 0.25);
  CHECK(blocks.at(i00) == 0.25);
  CHECK_THROWS_AS(joint_empirical(s, 4), ValidationError);
  CHECK_THROWS_AS(joint_empirical(s, 5), ValidationError);
}

TEST_CASE("chaos gap of a single queue vanishes") {
  const ModelParams p = make_params(4, 0.5, 2);
  std::mt19937_64 rng(7);
  std::vector<QueueState> s;
  for (int i = 0; i < 50; ++i) s.push_back(test_support::random_state(rng, 4, 3));
  const ChaosGap g = chaos_gap(s, 1, ChaosReference::ProductOfEmpirical, p);
  CHECK(g.raw == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("chaos gap of independent coordinates is near its noise floor") {
  const ModelParams p = make_params(2, 0.5, 2);
  std::mt19937_64 rng(8);
  std::vector<QueueState> s;
  for (int i = 0; i < 40000; ++i) s.push_back(test_support::random_state(rng, 2, 3));
  const ChaosGap g = chaos_gap(s, 2, ChaosReference::ProductOfEmpirical, p);
  CHECK(g.raw < 0.02);
  CHECK(std::fabs(g.corrected()) < 0.01);
}

TEST_CASE("max-queue statistics") {
  const ModelParams p = make_params(3, 0.5, 2);
  const std::vector<QueueState> empty(5, QueueState::empty(3));
  const MaxQueueReport r = max_queue_stats(empty, p);
  CHECK(r.law[0] == 1.0);
  REQUIRE(r.exceedance.size() == 1);
  CHECK(r.exceedance[0] == 0.0);
  CHECK(r.bound[0] == doctest::Approx(1.5));

  const std::vector<QueueState> s{{0, 2, 1}, {3, 0, 0}};
  const MaxQueueReport q = max_queue_stats(s, p);
  CHECK(q.law[2] == 0.5);
  CHECK(q.law[3] == 0.5);
  CHECK(q.exceedance[2] == 0.5);
  CHECK(q.exceedance[3] == 0.0);
  CHECK(q.bound[1] == doctest::Approx(3 * 0.25));
}

TEST_CASE("variance of the number of busy servers") {
  const std::vector<QueueState> same(10, QueueState{1, 0, 2});
  CHECK(variance_nonempty(same) == 0.0);
  const std::vector<QueueState> alt{{1, 0}, {0, 0}, {1, 0}, {0, 0}};
  CHECK(variance_nonempty(alt) == doctest::Approx(1.0 / 3.0));

  // d = 1: independent M/M/1 queues, busy with probability lambda, so the
  // variance is n lambda (1 - lambda).
  const ModelParams p = make_params(50, 0.5, 1);
  std::vector<SampleSet> reps;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) reps.push_back(sample_equilibrium(p, 30.0, 5.0, 200, seed));
  const auto v = variance_nonempty(reps, p);
  CHECK(v.value == doctest::Approx(12.5).epsilon(0.12));
}

TEST_CASE("tail averages from snapshots agree with counts") {
  std::mt19937_64 rng(9);
  std::vector<QueueState> s;
  for (int i = 0; i < 30; ++i) s.push_back(test_support::random_state(rng, 6, 4));
  const TailAverages a = tail_averages(s, 2);
  for (std::size_t k = 0; k <= 5; ++k) {
    double u = 0.0, u2 = 0.0, c2 = 0.0;
    for (const auto& x : s) {
      const double l = static_cast<double>(queue_counts(k, x));
      u += l / 6.0;
      u2 += (l / 6.0) * (l / 6.0);
      c2 += l * l;
    }
    CHECK(a.mean_u(k) == doctest::Approx(u / 30));
    CHECK(a.mean_u_pow(k) == doctest::Approx(u2 / 30));
    CHECK(a.mean_count_sq(k) == doctest::Approx(c2 / 30));
  }
  CHECK(a.mean_u(0) == 1.0);
  CHECK(a.mean_u(40) == 0.0);
}

TEST_CASE("generator residual of the limit law is zero") {
  const double lambda = 0.6;
  const TailVector v = limit_law(lambda, 2, 30);
  TailAverages a;
  a.n = 1;
  for (std::size_t k = 0; k <= 31; ++k) {
    a.u.push_back(v[k]);
    a.u_pow.push_back(v[k] * v[k]);
  }
  for (std::size_t k = 1; k <= 5; ++k) CHECK(std::fabs(generator_residual(a, k, lambda)) < 1e-15);
}
