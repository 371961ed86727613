#include "doctest.h"

#include <algorithm>
#include <random>

#include "supermarket/core.hpp"
#include "test_support.hpp"

using namespace supermarket;

namespace {

std::string field_of(auto&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("parameter validation names the offending field") {
  const ModelParams p = make_params(100, 0.7, 2);
  CHECK(p.n() == 100);
  CHECK(p.lambda() == 0.7);
  CHECK(p.d() == 2);
  CHECK(field_of([] { make_params(100, 1.0, 2); }) == "lambda");
  CHECK(field_of([] { make_params(100, 0.0, 2); }) == "lambda");
  CHECK(field_of([] { make_params(0, 0.5, 2); }) == "n");
  CHECK(field_of([] { make_params(10, 0.5, 0); }) == "d");
  CHECK_NOTHROW(make_params(1, 0.5, 1));
}

TEST_CASE("tail profile examples") {
  CHECK(tail_profile(QueueState{0, 0, 0, 0}).values().size() == 1);
  CHECK(tail_profile(QueueState{0, 0, 0, 0})[0] == 1.0);

  const TailVector v = tail_profile(QueueState{2, 1, 0, 0});
  REQUIRE(v.truncation() == 2);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.5);
  CHECK(v[2] == 0.25);
  CHECK(v[3] == 0.0);

  const TailVector w = tail_profile(QueueState{3, 3, 3});
  CHECK(w.truncation() == 3);
  for (std::size_t k = 0; k <= 3; ++k) CHECK(w[k] == 1.0);
}

TEST_CASE("queue counts examples") {
  const QueueState x{2, 1, 0, 0};
  CHECK(queue_counts(1, x) == 2);
  CHECK(queue_counts(0, x) == 4);
  CHECK(queue_counts(5, x) == 0);
}

TEST_CASE("counts and profile agree, profile is a valid tail, and both ignore order") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    const QueueState x = test_support::random_state(rng, n, 1 + rng() % 9);
    const auto counts = tail_counts(x);
    const TailVector v = tail_profile(x);
    REQUIRE(counts.size() == v.values().size());
    for (std::size_t k = 0; k < counts.size() + 2; ++k) {
      const auto c = queue_counts(k, x);
      CHECK(c == (k < counts.size() ? counts[k] : 0));
      CHECK(v[k] == static_cast<double>(c) / static_cast<double>(n));
    }
    CHECK_NOTHROW(TailVector(std::vector<double>(v.values().begin(), v.values().end())));

    std::vector<QueueLength> shuffled = x.vector();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(tail_profile(QueueState(shuffled)) == v);
  }
}

TEST_CASE("norms and distances") {
  const QueueState x{3, 0, 2};
  const QueueState y{1, 1, 2};
  CHECK(x.l1_norm() == 5);
  CHECK(x.linf_norm() == 3);
  CHECK(QueueState::empty(4).linf_norm() == 0);
  CHECK(l1_distance(x, y) == 3);
  CHECK(linf_distance(x, y) == 2);
  CHECK(dominated_by(QueueState{1, 0, 2}, x));
  CHECK_FALSE(dominated_by(y, x));
  CHECK_THROWS_AS(dominated_by(x, QueueState{1, 1}), ValidationError);
}

TEST_CASE("tail vectors enforce their invariants") {
  CHECK_THROWS_AS(TailVector({0.9, 0.5}), ValidationError);
  CHECK_THROWS_AS(TailVector({1.0, 0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(TailVector({1.0, -0.1}), ValidationError);
  CHECK_NOTHROW(TailVector({1.0, 0.5, 0.5 + 1e-15}, 1e-12));
  const TailVector v({1.0, 0.5, 0.25});
  CHECK(v[10] == 0.0);
  CHECK(v.resized(5).truncation() == 5);
  CHECK(v.resized(5)[2] == 0.25);
  CHECK(v.resized(1).truncation() == 1);
}

TEST_CASE("empirical laws validate their masses") {
  CHECK_THROWS_AS(EmpiricalLaw(1, 2, {0.5, 0.4}), ValidationError);
  CHECK_THROWS_AS(EmpiricalLaw(1, 2, {1.5, -0.5}), ValidationError);
  CHECK_THROWS_AS(EmpiricalLaw(1, 3, {0.5, 0.5}), ValidationError);
  const std::vector<std::uint64_t> counts{1, 3};
  const EmpiricalLaw law = EmpiricalLaw::from_counts(counts);
  CHECK(law.sample_count() == 4);
  CHECK(law[0] == 0.25);
  CHECK(law[1] == 0.75);
  CHECK(law[7] == 0.0);
  const EmpiricalLaw pm = EmpiricalLaw::point_mass(2, 2);
  const std::size_t idx[] = {2, 2};
  CHECK(pm.at(idx) == 1.0);
  CHECK(law.widened(5).extent() == 5);
  CHECK(law.widened(5)[1] == 0.75);
}
