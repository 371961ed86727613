#pragma once

// Event streams for the natural coupling (arrival times, choice lists,
// potential-departure times, departure selections), the deterministic map
// that replays a stream from any initial state, and the simulation engine
// built on the same event source.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "supermarket/core.hpp"
#include "supermarket/rng.hpp"

namespace supermarket {

enum class EventKind : std::uint8_t { Arrival, PotentialDeparture };

/// Non-owning view of one event. For arrivals `queues` holds the d choices in
/// list order; for potential departures it holds the single selected queue.
struct EventView {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  std::span<const std::uint32_t> queues;
};

struct ArrivalEvent {
  double time;
  std::vector<std::uint32_t> choices;
};

struct DepartureEvent {
  double time;
  std::uint32_t selection;
};

using Event = std::variant<ArrivalEvent, DepartureEvent>;

/// Lazily generated coupling events. Events come from a single exponential
/// clock of rate n(1 + lambda); each is an arrival with probability
/// lambda / (1 + lambda), otherwise a potential departure. Arrivals draw d
/// queues uniformly with replacement, departures one uniform queue. The
/// sequence is a pure function of (params, seed).
class EventSource {
 public:
  EventSource(const ModelParams& params, std::uint64_t seed);

  /// Produces the next event. The returned view is valid until the next call.
  const EventView& next();

 private:
  ModelParams params_;
  Engine engine_;
  double total_rate_;
  double arrival_prob_;
  std::vector<std::uint32_t> buffer_;
  EventView current_;
};

/// Materialised, time-ordered event sequence on [0, horizon].
class EventStream {
 public:
  /// Validates and stores events: times strictly increasing and in
  /// [0, horizon], queue indices in [0, n), arrivals carry exactly d choices.
  EventStream(const ModelParams& params, double horizon, std::uint64_t seed,
              std::span<const Event> events);

  const ModelParams& params() const noexcept { return params_; }
  double horizon() const noexcept { return horizon_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return times_.size(); }
  EventView operator[](std::size_t i) const;

  std::size_t arrival_count() const noexcept;
  std::vector<Event> events() const;

 private:
  friend EventStream generate_events(const ModelParams&, double, std::uint64_t);
  EventStream(const ModelParams& params, double horizon, std::uint64_t seed)
      : params_(params), horizon_(horizon), seed_(seed) {}
  void push(const EventView& e);

  ModelParams params_;
  double horizon_;
  std::uint64_t seed_;
  std::vector<double> times_;
  std::vector<EventKind> kinds_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> queues_;
};

/// All events of EventSource(params, seed) with time <= horizon.
EventStream generate_events(const ModelParams& params, double horizon, std::uint64_t seed);

/// Joins the shortest chosen queue, ties going to the earliest position in
/// the list.
QueueState apply_arrival(const QueueState& x, std::span<const std::uint32_t> choices);
/// Removes one customer from `selection` unless that queue is empty.
QueueState apply_departure(const QueueState& x, std::uint32_t selection);

/// x0 with every event of `stream` at time <= t applied in order.
QueueState evolve(const QueueState& x0, const EventStream& stream, double t);

/// Counts gathered while replaying a stream.
struct ReplayCounts {
  std::uint64_t arrivals = 0;
  std::uint64_t effective_departures = 0;
};
QueueState evolve(const QueueState& x0, const EventStream& stream, double t, ReplayCounts& counts);

/// Stream with `extra` arrivals merged in. Throws on a time collision or a
/// time outside the horizon.
EventStream add_customers(const EventStream& stream, std::span<const ArrivalEvent> extra);

/// First time the coupled paths from x and y agree, or nullopt if they are
/// still apart at the stream horizon.
std::optional<double> coalescence_time(const QueueState& x, const QueueState& y,
                                       const EventStream& stream);
/// Same, driving the pair with a lazily generated stream up to `horizon`.
std::optional<double> coalescence_time(const ModelParams& params, const QueueState& x,
                                       const QueueState& y, std::uint64_t seed, double horizon);

namespace detail {
/// Index of the queue an arrival with these choices joins.
std::uint32_t route(std::span<const QueueLength> x, std::span<const std::uint32_t> choices);
}  // namespace detail

/// Time-integrated statistics of the tail counts l(k, X_t) over a window.
struct Occupation {
  double duration = 0.0;
  std::vector<double> count;      // integral of l(k, X_t) dt
  std::vector<double> count_sq;   // integral of l(k, X_t)^2 dt
  std::vector<double> frac_pow;   // integral of u(k, X_t)^d dt

  /// Time-average of u(k, X_t).
  double mean_fraction(std::size_t k, std::size_t n) const;
  /// Time-average of u(k, X_t)^d.
  double mean_fraction_pow(std::size_t k) const;
  /// Time-average of l(k, X_t)^2.
  double mean_count_sq(std::size_t k) const;
};

/// Sequential replay engine driven by an EventSource. Keeps l(k, X_t)
/// up to date per event and, optionally, the occupation integrals.
class Simulator {
 public:
  Simulator(const ModelParams& params, QueueState initial, std::uint64_t seed);

  const ModelParams& params() const noexcept { return params_; }
  double time() const noexcept { return time_; }
  std::span<const QueueLength> lengths() const noexcept { return lengths_; }
  QueueState state() const { return QueueState(lengths_); }
  /// l(k, X_t) for k = 0..max queue length.
  std::span<const std::uint64_t> tail_counts() const noexcept {
    return std::span<const std::uint64_t>(counts_).first(max_length_ + 1);
  }
  QueueLength max_length() const noexcept { return max_length_; }
  std::uint64_t arrivals() const noexcept { return arrivals_; }
  std::uint64_t effective_departures() const noexcept { return departures_; }

  /// Applies every event with time <= t (right-continuous).
  void run_until(double t);

  /// Starts a fresh occupation window at the current time.
  void start_occupation();
  /// Integrals over [window start, current time].
  Occupation occupation();

 private:
  void increment(std::uint32_t j);
  void decrement(std::uint32_t j);
  void flush(std::size_t k, double t);

  ModelParams params_;
  EventSource source_;
  std::vector<QueueLength> lengths_;
  std::vector<std::uint64_t> counts_;
  QueueLength max_length_ = 0;
  double time_ = 0.0;
  std::optional<EventView> pending_;
  std::uint64_t arrivals_ = 0;
  std::uint64_t departures_ = 0;

  bool tracking_ = false;
  double window_start_ = 0.0;
  Occupation occ_;
  std::vector<double> last_flush_;
};

/// 10 * (max(x0) + ln n): heuristic burn-in scaled by the initial load and
/// the O(ln n) mixing time.
double default_burn_in(const QueueState& x0);

/// Starts empty, discards [0, burn_in] and records `count` snapshots at
/// burn_in + spacing, burn_in + 2 spacing, ...
std::vector<QueueState> sample_equilibrium(const ModelParams& params, double burn_in,
                                           double spacing, std::size_t count, std::uint64_t seed);

/// Snapshot trace of one replay, for debugging exports.
struct SimRecord {
  ModelParams params;
  QueueState initial;
  std::vector<std::pair<double, QueueState>> snapshots;
  std::uint64_t stream_seed;
};

SimRecord record_run(const ModelParams& params, const QueueState& initial, std::uint64_t seed,
                     std::span<const double> snapshot_times);

/// One CSV row per snapshot: time, then the number of queues of length
/// 0, 1, 2, ... separated by spaces.
void write_csv(std::ostream& out, const SimRecord& record);

}  // namespace supermarket
