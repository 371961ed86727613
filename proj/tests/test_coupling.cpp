#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "supermarket/coupling_sim.hpp"
#include "supermarket/estimators.hpp"
#include "test_support.hpp"

using namespace supermarket;
using test_support::random_state;

TEST_CASE("arrivals join the first shortest queue in the list") {
  const QueueState x{1, 0, 0};
  const std::uint32_t c12[] = {1, 2};
  const std::uint32_t c01[] = {0, 1};
  const std::uint32_t c21[] = {2, 1};
  const std::uint32_t c00[] = {0, 0};
  CHECK(apply_arrival(x, c12) == QueueState{1, 1, 0});
  CHECK(apply_arrival(x, c01) == QueueState{1, 1, 0});
  CHECK(apply_arrival(x, c21) == QueueState{1, 0, 1});
  CHECK(apply_arrival(x, c00) == QueueState{2, 0, 0});
  const std::uint32_t bad[] = {0, 3};
  CHECK_THROWS_AS(apply_arrival(x, bad), ValidationError);
}

TEST_CASE("potential departures at empty queues are ignored") {
  CHECK(apply_departure(QueueState{2, 0}, 0) == QueueState{1, 0});
  CHECK(apply_departure(QueueState{2, 0}, 1) == QueueState{2, 0});
  CHECK_THROWS_AS(apply_departure(QueueState{2, 0}, 2), ValidationError);
}

TEST_CASE("event streams validate their contents") {
  const ModelParams p = make_params(3, 0.5, 2);
  const std::vector<Event> good{ArrivalEvent{0.1, {0, 1}}, DepartureEvent{0.2, 2}};
  CHECK(EventStream(p, 1.0, 0, good).size() == 2);
  CHECK(EventStream(p, 1.0, 0, good).arrival_count() == 1);

  const std::vector<Event> unordered{ArrivalEvent{0.3, {0, 1}}, DepartureEvent{0.2, 2}};
  const std::vector<Event> tie{ArrivalEvent{0.2, {0, 1}}, DepartureEvent{0.2, 2}};
  const std::vector<Event> short_list{ArrivalEvent{0.1, {0}}};
  const std::vector<Event> bad_index{DepartureEvent{0.1, 3}};
  const std::vector<Event> late{DepartureEvent{1.5, 0}};
  CHECK_THROWS_AS(EventStream(p, 1.0, 0, unordered), ValidationError);
  CHECK_THROWS_AS(EventStream(p, 1.0, 0, tie), ValidationError);
  CHECK_THROWS_AS(EventStream(p, 1.0, 0, short_list), ValidationError);
  CHECK_THROWS_AS(EventStream(p, 1.0, 0, bad_index), ValidationError);
  CHECK_THROWS_AS(EventStream(p, 1.0, 0, late), ValidationError);
}

TEST_CASE("generated streams are reproducible, ordered and Poisson") {
  const ModelParams p = make_params(50, 0.6, 3);
  const double T = 200.0;
  const EventStream s = generate_events(p, T, 42);
  const EventStream again = generate_events(p, T, 42);
  REQUIRE(s.size() == again.size());
  double last = -1.0;
  std::vector<std::uint64_t> hits(50, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const EventView e = s[i];
    CHECK(e.time > last);
    CHECK(e.time <= T);
    CHECK(e.time == again[i].time);
    last = e.time;
    CHECK(e.queues.size() == (e.kind == EventKind::Arrival ? 3u : 1u));
    for (auto q : e.queues) ++hits[q];
  }
  // Counts of the two Poisson streams within four standard deviations.
  const double arrivals = static_cast<double>(s.arrival_count());
  const double departures = static_cast<double>(s.size()) - arrivals;
  const double ea = 0.6 * 50 * T;
  const double ed = 50 * T;
  CHECK(std::fabs(arrivals - ea) < 4.0 * std::sqrt(ea));
  CHECK(std::fabs(departures - ed) < 4.0 * std::sqrt(ed));
  // Queue selections: chi-square against uniform, 49 degrees of freedom.
  double total = 0.0;
  for (auto h : hits) total += static_cast<double>(h);
  double chi2 = 0.0;
  for (auto h : hits) chi2 += std::pow(static_cast<double>(h) - total / 50, 2) / (total / 50);
  CHECK(chi2 < 100.0);
}

TEST_CASE("replay conserves customers") {
  std::mt19937_64 rng(5);
  const ModelParams p = make_params(20, 0.8, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const QueueState x0 = random_state(rng, 20, 6);
    const EventStream s = generate_events(p, 30.0, rng());
    ReplayCounts counts;
    const QueueState x = evolve(x0, s, 30.0, counts);
    CHECK(x.l1_norm() == x0.l1_norm() + counts.arrivals - counts.effective_departures);
    CHECK(counts.arrivals == s.arrival_count());
  }
}

TEST_CASE("the coupling contracts, preserves order and is monotone in added customers") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    const unsigned d = 1 + rng() % 3;
    const ModelParams p = make_params(n, 0.3 + 0.6 * std::generate_canonical<double, 53>(rng), d);
    const EventStream s = generate_events(p, 10.0, rng());
    const QueueState x = random_state(rng, n, 5);
    const QueueState y = random_state(rng, n, 5);
    std::vector<QueueLength> bumped = x.vector();
    for (auto& v : bumped) v += rng() % 3;
    const QueueState z(bumped);

    std::vector<ArrivalEvent> extra;
    for (int e = 0; e < 3; ++e) {
      std::vector<std::uint32_t> choices(d);
      for (auto& c : choices) c = static_cast<std::uint32_t>(rng() % n);
      extra.push_back({std::ldexp(static_cast<double>(rng() >> 11), -53) * 10.0, choices});
    }
    const EventStream more = add_customers(s, extra);

    std::uint64_t prev_l1 = l1_distance(x, y);
    QueueLength prev_linf = linf_distance(x, y);
    for (double t = 0.5; t <= 10.0; t += 0.5) {
      const QueueState xt = evolve(x, s, t);
      const QueueState yt = evolve(y, s, t);
      CHECK(l1_distance(xt, yt) <= prev_l1);
      CHECK(linf_distance(xt, yt) <= prev_linf);
      prev_l1 = l1_distance(xt, yt);
      prev_linf = linf_distance(xt, yt);
      CHECK(dominated_by(xt, evolve(z, s, t)));
      CHECK(dominated_by(xt, evolve(x, more, t)));
    }
  }
}

TEST_CASE("coalescence time agrees between stored and lazy streams") {
  const ModelParams p = make_params(30, 0.7, 2);
  const QueueState empty = QueueState::empty(30);
  const QueueState loaded(std::vector<QueueLength>(30, 4));
  CHECK(coalescence_time(p, empty, empty, 1, 10.0) == 0.0);
  const auto lazy = coalescence_time(p, empty, loaded, 9, 500.0);
  const auto stored = coalescence_time(empty, loaded, generate_events(p, 500.0, 9));
  REQUIRE(lazy.has_value());
  REQUIRE(stored.has_value());
  CHECK(*lazy == *stored);
  CHECK(evolve(empty, generate_events(p, 500.0, 9), *lazy) ==
        evolve(loaded, generate_events(p, 500.0, 9), *lazy));
  CHECK_FALSE(coalescence_time(p, empty, loaded, 9, *lazy * 0.5).has_value());
}

TEST_CASE("coalescence from a loaded start grows slowly with n") {
  auto mean_time = [](std::size_t n) {
    const ModelParams p = make_params(n, 0.7, 2);
    const QueueState empty = QueueState::empty(n);
    const QueueState loaded(std::vector<QueueLength>(n, 3));
    double total = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) total += coalescence_time(p, empty, loaded, s, 1e4).value();
    return total / 20.0;
  };
  const double small = mean_time(50);
  const double large = mean_time(800);
  CHECK(large > small * 0.8);
  // A ln n law predicts a ratio of ln 800 / ln 50 = 1.7; linear growth would give 16.
  CHECK(large < small * 4.0);
}

TEST_CASE("simulator reproduces the stream replay") {
  std::mt19937_64 rng(7);
  const ModelParams p = make_params(25, 0.75, 2);
  const QueueState x0 = random_state(rng, 25, 4);
  Simulator sim(p, x0, 123);
  const EventStream s = generate_events(p, 40.0, 123);
  for (double t : {0.0, 1.0, 7.5, 40.0}) {
    sim.run_until(t);
    const QueueState expected = evolve(x0, s, t);
    CHECK(sim.state() == expected);
    const auto tc = tail_counts(expected);
    CHECK(std::vector<std::uint64_t>(sim.tail_counts().begin(), sim.tail_counts().end()) == tc);
    CHECK(sim.max_length() == expected.linf_norm());
  }
  CHECK_THROWS_AS(sim.run_until(1.0), ValidationError);
}

TEST_CASE("occupation integrals match a direct replay") {
  const ModelParams p = make_params(6, 0.7, 2);
  const QueueState x0{2, 0, 1, 0, 0, 3};
  Simulator sim(p, x0, 99);
  sim.run_until(5.0);
  sim.start_occupation();
  sim.run_until(60.0);
  const Occupation occ = sim.occupation();

  const EventStream s = generate_events(p, 60.0, 99);
  std::vector<double> count(8, 0.0), count_sq(8, 0.0), frac_pow(8, 0.0);
  QueueState x = evolve(x0, s, 5.0);
  double t = 5.0;
  auto accrue = [&](double until) {
    for (std::size_t k = 0; k < count.size(); ++k) {
      const double c = static_cast<double>(queue_counts(k, x));
      count[k] += c * (until - t);
      count_sq[k] += c * c * (until - t);
      frac_pow[k] += (c / 6.0) * (c / 6.0) * (until - t);
    }
    t = until;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const EventView e = s[i];
    if (e.time <= 5.0) continue;
    accrue(e.time);
    x = e.kind == EventKind::Arrival ? apply_arrival(x, e.queues) : apply_departure(x, e.queues[0]);
  }
  accrue(60.0);
  CHECK(occ.duration == doctest::Approx(55.0));
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(occ.mean_fraction(k, 6) == doctest::Approx(count[k] / (55.0 * 6.0)).epsilon(1e-10));
    CHECK(occ.mean_count_sq(k) == doctest::Approx(count_sq[k] / 55.0).epsilon(1e-10));
    CHECK(occ.mean_fraction_pow(k) == doctest::Approx(frac_pow[k] / 55.0).epsilon(1e-10));
  }
}

TEST_CASE("single queue equilibrium is geometric") {
  const ModelParams p = make_params(1, 0.5, 3);
  const auto samples = sample_equilibrium(p, 50.0, 3.0, 20000, 17);
  const EmpiricalLaw law = empirical_marginal(samples);
  // Spaced samples of an M/M/1 queue; generous tolerance for correlation.
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(law[k] == doctest::Approx(0.5 * std::pow(0.5, k)).epsilon(0.02 / std::pow(0.5, k) + 0.05));
  }
}

TEST_CASE("equilibrium queues are exchangeable") {
  const ModelParams p = make_params(10, 0.7, 2);
  const auto samples = sample_equilibrium(p, 50.0, 2.0, 20000, 3);
  const EmpiricalLaw pooled = empirical_marginal(samples);
  const EmpiricalLaw first = empirical_marginal(samples, 0);
  const EmpiricalLaw last = empirical_marginal(samples, 9);
  CHECK(tv_distance(pooled, first) < 0.02);
  CHECK(tv_distance(pooled, last) < 0.02);
}

TEST_CASE("burn-in default and CSV export") {
  CHECK(default_burn_in(QueueState{0, 3, 1}) == doctest::Approx(10.0 * (3.0 + std::log(3.0))));
  const ModelParams p = make_params(3, 0.5, 2);
  const double times[] = {0.0, 1.0};
  const SimRecord rec = record_run(p, QueueState{2, 0, 1}, 5, times);
  std::ostringstream out;
  write_csv(out, rec);
  const std::string csv = out.str();
  CHECK(csv.rfind("time,histogram\n0,1 1 1\n", 0) == 0);
}
