#include "supermarket/coupling_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace supermarket {

EventSource::EventSource(const ModelParams& params, std::uint64_t seed)
    : params_(params),
      engine_(seed),
      total_rate_(static_cast<double>(params.n()) * (1.0 + params.lambda())),
      arrival_prob_(params.lambda() / (1.0 + params.lambda())),
      buffer_(std::max<unsigned>(params.d(), 1)) {}

const EventView& EventSource::next() {
  double t = current_.time;
  // Equal times have probability zero; a gap that rounds away is redrawn.
  do {
    t = current_.time - std::log(uniform_open01(engine_)) / total_rate_;
  } while (!(t > current_.time));
  current_.time = t;
  const std::uint64_t n = params_.n();
  if (uniform_open01(engine_) < arrival_prob_) {
    current_.kind = EventKind::Arrival;
    for (unsigned i = 0; i < params_.d(); ++i) {
      buffer_[i] = static_cast<std::uint32_t>(uniform_below(engine_, n));
    }
    current_.queues = std::span<const std::uint32_t>(buffer_.data(), params_.d());
  } else {
    current_.kind = EventKind::PotentialDeparture;
    buffer_[0] = static_cast<std::uint32_t>(uniform_below(engine_, n));
    current_.queues = std::span<const std::uint32_t>(buffer_.data(), 1);
  }
  return current_;
}

EventStream::EventStream(const ModelParams& params, double horizon, std::uint64_t seed,
                         std::span<const Event> events)
    : params_(params), horizon_(horizon), seed_(seed) {
  if (!(horizon > 0.0)) throw ValidationError("horizon", "must be positive");
  double last = -1.0;
  for (const Event& e : events) {
    EventView view;
    std::uint32_t single = 0;
    if (const auto* a = std::get_if<ArrivalEvent>(&e)) {
      if (a->choices.size() != params.d()) {
        throw ValidationError("choices", "arrival must carry exactly d choices");
      }
      view = {a->time, EventKind::Arrival, a->choices};
    } else {
      const auto& dep = std::get<DepartureEvent>(e);
      single = dep.selection;
      view = {dep.time, EventKind::PotentialDeparture, std::span<const std::uint32_t>(&single, 1)};
    }
    if (!(view.time >= 0.0) || view.time > horizon) {
      throw ValidationError("time", "event time outside [0, horizon]");
    }
    if (!(view.time > last)) throw ValidationError("time", "event times must be strictly increasing");
    for (std::uint32_t q : view.queues) {
      if (q >= params.n()) throw ValidationError("queue", "queue index out of range");
    }
    last = view.time;
    push(view);
  }
}

void EventStream::push(const EventView& e) {
  times_.push_back(e.time);
  kinds_.push_back(e.kind);
  offsets_.push_back(static_cast<std::uint32_t>(queues_.size()));
  queues_.insert(queues_.end(), e.queues.begin(), e.queues.end());
}

EventView EventStream::operator[](std::size_t i) const {
  const std::size_t begin = offsets_[i];
  const std::size_t end = i + 1 < offsets_.size() ? offsets_[i + 1] : queues_.size();
  return {times_[i], kinds_[i], std::span<const std::uint32_t>(queues_).subspan(begin, end - begin)};
}

std::size_t EventStream::arrival_count() const noexcept {
  return static_cast<std::size_t>(std::count(kinds_.begin(), kinds_.end(), EventKind::Arrival));
}

std::vector<Event> EventStream::events() const {
  std::vector<Event> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const EventView e = (*this)[i];
    if (e.kind == EventKind::Arrival) {
      out.emplace_back(ArrivalEvent{e.time, {e.queues.begin(), e.queues.end()}});
    } else {
      out.emplace_back(DepartureEvent{e.time, e.queues[0]});
    }
  }
  return out;
}

EventStream generate_events(const ModelParams& params, double horizon, std::uint64_t seed) {
  if (!(horizon > 0.0)) throw ValidationError("horizon", "must be positive");
  EventStream stream(params, horizon, seed);
  EventSource source(params, seed);
  for (;;) {
    const EventView& e = source.next();
    if (e.time > horizon) break;
    stream.push(e);
  }
  return stream;
}

namespace detail {

std::uint32_t route(std::span<const QueueLength> x, std::span<const std::uint32_t> choices) {
  std::uint32_t best = choices[0];
  for (std::size_t i = 1; i < choices.size(); ++i) {
    if (x[choices[i]] < x[best]) best = choices[i];
  }
  return best;
}

}  // namespace detail

namespace {

void check_indices(const QueueState& x, std::span<const std::uint32_t> queues) {
  for (std::uint32_t q : queues) {
    if (q >= x.size()) throw ValidationError("queue", "queue index out of range");
  }
}

// Applies one event in place; returns +1, -1 or 0 for the change in customers.
int apply_in_place(std::vector<QueueLength>& x, const EventView& e) {
  if (e.kind == EventKind::Arrival) {
    ++x[detail::route(x, e.queues)];
    return 1;
  }
  QueueLength& q = x[e.queues[0]];
  if (q == 0) return 0;
  --q;
  return -1;
}

}  // namespace

QueueState apply_arrival(const QueueState& x, std::span<const std::uint32_t> choices) {
  if (choices.empty()) throw ValidationError("choices", "arrival needs at least one choice");
  check_indices(x, choices);
  std::vector<QueueLength> y = x.vector();
  ++y[detail::route(y, choices)];
  return QueueState(std::move(y));
}

QueueState apply_departure(const QueueState& x, std::uint32_t selection) {
  check_indices(x, std::span<const std::uint32_t>(&selection, 1));
  std::vector<QueueLength> y = x.vector();
  if (y[selection] > 0) --y[selection];
  return QueueState(std::move(y));
}

QueueState evolve(const QueueState& x0, const EventStream& stream, double t, ReplayCounts& counts) {
  if (x0.size() != stream.params().n()) throw ValidationError("state", "dimension mismatch");
  if (!(t >= 0.0) || t > stream.horizon()) throw ValidationError("t", "outside [0, horizon]");
  std::vector<QueueLength> x = x0.vector();
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const EventView e = stream[i];
    if (e.time > t) break;
    const int delta = apply_in_place(x, e);
    if (e.kind == EventKind::Arrival) ++counts.arrivals;
    if (delta < 0) ++counts.effective_departures;
  }
  return QueueState(std::move(x));
}

QueueState evolve(const QueueState& x0, const EventStream& stream, double t) {
  ReplayCounts counts;
  return evolve(x0, stream, t, counts);
}

EventStream add_customers(const EventStream& stream, std::span<const ArrivalEvent> extra) {
  std::vector<Event> merged = stream.events();
  for (const ArrivalEvent& a : extra) merged.emplace_back(a);
  const auto time_of = [](const Event& e) {
    return std::visit([](const auto& ev) { return ev.time; }, e);
  };
  std::stable_sort(merged.begin(), merged.end(),
                   [&](const Event& a, const Event& b) { return time_of(a) < time_of(b); });
  return EventStream(stream.params(), stream.horizon(), stream.seed(), merged);
}

namespace {

// Tracks sum_j |x(j) - y(j)| while both paths are driven by the same events.
class CoupledPair {
 public:
  CoupledPair(const QueueState& x, const QueueState& y) : x_(x.vector()), y_(y.vector()) {
    if (x_.size() != y_.size()) throw ValidationError("state", "dimension mismatch");
    for (std::size_t j = 0; j < x_.size(); ++j) gap_ += diff(j);
  }

  bool coalesced() const noexcept { return gap_ == 0; }

  void apply(const EventView& e) {
    if (e.kind == EventKind::Arrival) {
      bump(x_, detail::route(x_, e.queues), +1);
      bump(y_, detail::route(y_, e.queues), +1);
    } else {
      const std::uint32_t j = e.queues[0];
      if (x_[j] > 0) bump(x_, j, -1);
      if (y_[j] > 0) bump(y_, j, -1);
    }
  }

 private:
  std::uint64_t diff(std::size_t j) const { return x_[j] > y_[j] ? x_[j] - y_[j] : y_[j] - x_[j]; }
  void bump(std::vector<QueueLength>& v, std::uint32_t j, int delta) {
    gap_ -= diff(j);
    v[j] = static_cast<QueueLength>(static_cast<std::int64_t>(v[j]) + delta);
    gap_ += diff(j);
  }

  std::vector<QueueLength> x_;
  std::vector<QueueLength> y_;
  std::uint64_t gap_ = 0;
};

}  // namespace

std::optional<double> coalescence_time(const QueueState& x, const QueueState& y,
                                       const EventStream& stream) {
  if (x.size() != stream.params().n()) throw ValidationError("state", "dimension mismatch");
  CoupledPair pair(x, y);
  if (pair.coalesced()) return 0.0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const EventView e = stream[i];
    pair.apply(e);
    if (pair.coalesced()) return e.time;
  }
  return std::nullopt;
}

std::optional<double> coalescence_time(const ModelParams& params, const QueueState& x,
                                       const QueueState& y, std::uint64_t seed, double horizon) {
  if (x.size() != params.n()) throw ValidationError("state", "dimension mismatch");
  CoupledPair pair(x, y);
  if (pair.coalesced()) return 0.0;
  EventSource source(params, seed);
  for (;;) {
    const EventView& e = source.next();
    if (e.time > horizon) return std::nullopt;
    pair.apply(e);
    if (pair.coalesced()) return e.time;
  }
}

double Occupation::mean_fraction(std::size_t k, std::size_t n) const {
  if (k >= count.size() || duration <= 0.0) return 0.0;
  return count[k] / (duration * static_cast<double>(n));
}

double Occupation::mean_fraction_pow(std::size_t k) const {
  if (k >= frac_pow.size() || duration <= 0.0) return 0.0;
  return frac_pow[k] / duration;
}

double Occupation::mean_count_sq(std::size_t k) const {
  if (k >= count_sq.size() || duration <= 0.0) return 0.0;
  return count_sq[k] / duration;
}

Simulator::Simulator(const ModelParams& params, QueueState initial, std::uint64_t seed)
    : params_(params), source_(params, seed), lengths_(initial.vector()) {
  if (lengths_.size() != params.n()) throw ValidationError("state", "dimension mismatch");
  const auto tc = supermarket::tail_counts(initial);
  counts_.assign(tc.begin(), tc.end());
  counts_.push_back(0);
  max_length_ = static_cast<QueueLength>(tc.size() - 1);
}

void Simulator::flush(std::size_t k, double t) {
  if (last_flush_.size() <= k) {
    last_flush_.resize(k + 1, t);
    occ_.count.resize(k + 1, 0.0);
    occ_.count_sq.resize(k + 1, 0.0);
    occ_.frac_pow.resize(k + 1, 0.0);
  }
  const double dt = t - last_flush_[k];
  if (dt > 0.0) {
    const double c = static_cast<double>(counts_[k]);
    const double u = c / static_cast<double>(params_.n());
    double p = u;
    for (unsigned i = 1; i < params_.d(); ++i) p *= u;
    occ_.count[k] += c * dt;
    occ_.count_sq[k] += c * c * dt;
    occ_.frac_pow[k] += p * dt;
  }
  last_flush_[k] = t;
}

void Simulator::increment(std::uint32_t j) {
  const std::size_t k = static_cast<std::size_t>(lengths_[j]) + 1;
  if (k + 1 >= counts_.size()) counts_.resize(k + 2, 0);
  if (tracking_) flush(k, time_);
  ++counts_[k];
  ++lengths_[j];
  if (k > max_length_) max_length_ = static_cast<QueueLength>(k);
}

void Simulator::decrement(std::uint32_t j) {
  const std::size_t k = lengths_[j];
  if (tracking_) flush(k, time_);
  --counts_[k];
  --lengths_[j];
  if (k == max_length_ && counts_[k] == 0) --max_length_;
}

void Simulator::run_until(double t) {
  if (t < time_) throw ValidationError("t", "simulation cannot run backwards");
  for (;;) {
    if (!pending_) pending_ = source_.next();
    const EventView& e = *pending_;
    if (e.time > t) break;
    time_ = e.time;
    if (e.kind == EventKind::Arrival) {
      increment(detail::route(lengths_, e.queues));
      ++arrivals_;
    } else {
      const std::uint32_t j = e.queues[0];
      if (lengths_[j] > 0) {
        decrement(j);
        ++departures_;
      }
    }
    pending_.reset();
  }
  time_ = t;
}

void Simulator::start_occupation() {
  tracking_ = true;
  window_start_ = time_;
  occ_ = Occupation{};
  last_flush_.clear();
  for (std::size_t k = 0; k <= max_length_; ++k) flush(k, time_);
}

Occupation Simulator::occupation() {
  if (!tracking_) throw ValidationError("occupation", "no occupation window started");
  for (std::size_t k = 0; k < last_flush_.size(); ++k) flush(k, time_);
  occ_.duration = time_ - window_start_;
  return occ_;
}

double default_burn_in(const QueueState& x0) {
  return 10.0 * (static_cast<double>(x0.linf_norm()) + std::log(static_cast<double>(x0.size())));
}

std::vector<QueueState> sample_equilibrium(const ModelParams& params, double burn_in,
                                           double spacing, std::size_t count, std::uint64_t seed) {
  if (!(burn_in >= 0.0)) throw ValidationError("burn_in", "must be non-negative");
  if (!(spacing > 0.0)) throw ValidationError("spacing", "must be positive");
  std::vector<QueueState> out;
  out.reserve(count);
  Simulator sim(params, QueueState::empty(params.n()), seed);
  sim.run_until(burn_in);
  for (std::size_t i = 1; i <= count; ++i) {
    sim.run_until(burn_in + spacing * static_cast<double>(i));
    out.push_back(sim.state());
  }
  return out;
}

SimRecord record_run(const ModelParams& params, const QueueState& initial, std::uint64_t seed,
                     std::span<const double> snapshot_times) {
  SimRecord record{params, initial, {}, seed};
  Simulator sim(params, initial, seed);
  for (double t : snapshot_times) {
    sim.run_until(t);
    record.snapshots.emplace_back(t, sim.state());
  }
  return record;
}

void write_csv(std::ostream& out, const SimRecord& record) {
  out << "time,histogram\n";
  for (const auto& [t, x] : record.snapshots) {
    std::vector<std::uint64_t> hist(static_cast<std::size_t>(x.linf_norm()) + 1, 0);
    for (QueueLength len : x.lengths()) ++hist[len];
    out << t << ',';
    for (std::size_t k = 0; k < hist.size(); ++k) out << (k ? " " : "") << hist[k];
    out << '\n';
  }
}

}  // namespace supermarket
