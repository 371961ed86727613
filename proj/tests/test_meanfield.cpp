#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "supermarket/meanfield.hpp"
#include "test_support.hpp"

using namespace supermarket;

TEST_CASE("tail exponents") {
  CHECK(tail_exponent(2, 0) == 0);
  CHECK(tail_exponent(2, 1) == 1);
  CHECK(tail_exponent(2, 2) == 3);
  CHECK(tail_exponent(2, 3) == 7);
  CHECK(tail_exponent(3, 3) == 13);
  CHECK(tail_exponent(1, 9) == 9);
  CHECK(tail_exponent(2, 63) == (std::uint64_t{1} << 63) - 1);
  CHECK(tail_exponent(2, 64) == std::numeric_limits<std::uint64_t>::max());
  CHECK(tail_exponent(3, 60) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("limit law values") {
  const TailVector v = limit_law(0.5, 2, 30);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(0.5));
  CHECK(v[2] == doctest::Approx(0.125));
  CHECK(v[3] == doctest::Approx(std::pow(0.5, 7)));
  CHECK(v[30] == 0.0);
  const TailVector g = limit_law(0.7, 1, 10);
  for (std::size_t k = 0; k <= 10; ++k) CHECK(g[k] == doctest::Approx(std::pow(0.7, k)));
  CHECK(default_truncation(0.7, 2) == 30);
  CHECK(default_truncation(0.7, 1) >= 100);
}

TEST_CASE("the limit law is a fixed point of the drift") {
  for (double lambda : {0.3, 0.5, 0.7, 0.9, 0.95}) {
    for (unsigned d : {2u, 3u, 4u}) {
      const ModelParams p = make_params(1, lambda, d);
      CHECK(fixed_point_residual(limit_law(lambda, d, 30), p) <= 1e-12);
    }
  }
}

TEST_CASE("drift on a hand-worked tail") {
  // v = (1, 1/2, 1/4), lambda = 1/2, d = 2, v(3) = 0:
  //   k=1: (1 - 1/4)/2 - (1/2 - 1/4) = 1/8
  //   k=2: (1/4 - 1/16)/2 - 1/4 = -5/32
  const TailVector v({1.0, 0.5, 0.25});
  const auto a = drift(v, make_params(1, 0.5, 2));
  REQUIRE(a.size() == 3);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == 0.125);
  CHECK(a[2] == -0.15625);
}

TEST_CASE("drift is Lipschitz with constant 2 lambda d + 2") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const double lambda = 0.05 + 0.9 * std::generate_canonical<double, 53>(rng);
    const unsigned d = 1 + rng() % 4;
    const ModelParams p = make_params(1, lambda, d);
    const TailVector v(test_support::random_tail(rng, 12, 12));
    const TailVector w(test_support::random_tail(rng, 12, 12));
    const auto av = drift(v, p);
    const auto aw = drift(w, p);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k <= 12; ++k) {
      lhs = std::max(lhs, std::fabs(av[k] - aw[k]));
      rhs = std::max(rhs, std::fabs(v[k] - w[k]));
    }
    CHECK(lhs <= (2 * lambda * d + 2) * rhs + 1e-15);
  }
}

TEST_CASE("the residual is continuous with the Lipschitz constant") {
  const ModelParams p = make_params(1, 0.7, 3);
  const TailVector v = limit_law(0.7, 3, 30);
  std::vector<double> w(v.values().begin(), v.values().end());
  w[2] -= 1e-6;
  CHECK(fixed_point_residual(TailVector(w), p) <= (2 * 0.7 * 3 + 2) * 1e-6 + 1e-12);
}

TEST_CASE("integration keeps tails valid and converges to the fixed point") {
  std::mt19937_64 rng(4);
  const double grid[] = {0.0, 10.0, 25.0, 50.0, 100.0, 200.0, 500.0};
  for (int trial = 0; trial < 12; ++trial) {
    const double lambda = 0.3 + 0.6 * std::generate_canonical<double, 53>(rng);
    const unsigned d = 2 + rng() % 3;
    const ModelParams p = make_params(1, lambda, d);
    const TailVector v0(test_support::random_tail(rng, 10, 10));
    const OdeConfig cfg = default_ode_config(p, v0);
    const auto traj = integrate_trajectory(v0, grid, p, cfg);
    const TailVector limit = limit_law(lambda, d, cfg.truncation);
    double prev = 2.0;
    for (const TailVector& v : traj) {
      CHECK_NOTHROW(TailVector(std::vector<double>(v.values().begin(), v.values().end())));
      double dist = 0.0;
      for (std::size_t k = 0; k <= cfg.truncation; ++k) dist = std::max(dist, std::fabs(v[k] - limit[k]));
      CHECK(dist <= prev + 1e-9);
      prev = dist;
    }
    CHECK(prev < 1e-6);
  }
}

TEST_CASE("halving the tolerance barely moves the solution") {
  const ModelParams p = make_params(1, 0.9, 2);
  const TailVector v0({1.0, 1.0, 1.0, 1.0, 0.5});
  OdeConfig cfg = default_ode_config(p, v0);
  cfg.step_tol = 1e-8;
  const TailVector a = integrate(v0, 20.0, p, cfg);
  cfg.step_tol = 5e-9;
  const TailVector b = integrate(v0, 20.0, p, cfg);
  double diff = 0.0;
  for (std::size_t k = 0; k <= cfg.truncation; ++k) diff = std::max(diff, std::fabs(a[k] - b[k]));
  CHECK(diff < 10 * 1e-8);
}

TEST_CASE("integration edge cases") {
  const ModelParams p = make_params(1, 0.5, 2);
  const TailVector v0({1.0, 0.25});
  CHECK(integrate(v0, 0.0, p, default_ode_config(p, v0)) == v0);
  CHECK_THROWS_AS(integrate(v0, -1.0, p, default_ode_config(p, v0)), ValidationError);
  const double backwards[] = {2.0, 1.0};
  CHECK_THROWS_AS(integrate_trajectory(v0, backwards, p, default_ode_config(p, v0)), ValidationError);
  // Short input tail padded to a longer truncation.
  OdeConfig cfg;
  cfg.truncation = 40;
  const TailVector v = integrate(TailVector::point_mass_at_zero(), 3.0, p, cfg);
  CHECK(v.truncation() == 40);
  CHECK(v[1] > 0.0);
  CHECK(v[1] < 0.5);
}

TEST_CASE("istar") {
  // n = 10^4: n^(-1/2) ln^2 n = 0.848; 0.9 is above it and 0.9^3 = 0.729 below.
  CHECK(istar(10000, 0.9, 2) == 2);
  // n = 10^6, lambda = 0.99: threshold 0.1909; 0.99^(2^i - 1) first drops below at i = 8.
  CHECK(istar(1000000, 0.99, 2) == 8);
  CHECK_THROWS_AS(istar(100, 0.5, 1), ValidationError);
  CHECK_THROWS_AS(istar(1, 0.5, 2), ValidationError);
}

TEST_CASE("weighted tail distance") {
  const double lambda = 0.6;
  const TailVector limit = limit_law(lambda, 2, 30);
  CHECK(weighted_tail_distance(limit, lambda, 2, 2.0) == doctest::Approx(0.0).epsilon(1e-15));
  const TailVector v({1.0, 0.9, 0.5, 0.1});
  double s2 = 0.0;
  for (std::size_t k = 1; k <= 30; ++k) s2 += std::pow(v[k] - limit[k], 2) * std::pow(3.0, k);
  CHECK(weighted_tail_distance(v, lambda, 2, 3.0, 30) == doctest::Approx(std::sqrt(s2)).epsilon(1e-12));
  CHECK(weighted_tail_distance(v, lambda, 2, 1.5, 30) < weighted_tail_distance(v, lambda, 2, 3.0, 30));
  CHECK_THROWS_AS(weighted_tail_distance(v, lambda, 2, 1.0), ValidationError);
}

TEST_CASE("tail to law and CSV export") {
  const EmpiricalLaw law = tail_to_law(TailVector({1.0, 0.5, 0.25}));
  CHECK(law[0] == 0.5);
  CHECK(law[1] == 0.25);
  CHECK(law[2] == 0.25);
  std::ostringstream out;
  const double times[] = {0.0};
  const TailVector traj[] = {TailVector({1.0, 0.5})};
  write_trajectory_csv(out, times, traj);
  CHECK(out.str() == "t,v1\n0,0.5\n");
}
