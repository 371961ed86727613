#include "supermarket/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "supermarket/kernels.hpp"

namespace supermarket {

ValidationError::ValidationError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

ModelParams make_params(std::size_t n, double lambda, unsigned d) {
  if (n < 1) throw ValidationError("n", "number of servers must be at least 1");
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ValidationError("lambda", "arrival intensity must lie in (0, 1), got " +
                                        std::to_string(lambda));
  }
  if (d < 1) throw ValidationError("d", "number of choices must be at least 1");
  return ModelParams(n, lambda, d);
}

std::uint64_t QueueState::l1_norm() const noexcept {
  return std::accumulate(lengths_.begin(), lengths_.end(), std::uint64_t{0});
}

QueueLength QueueState::linf_norm() const noexcept { return kernels::max_value(lengths_); }

namespace {
void require_same_size(const QueueState& x, const QueueState& y) {
  if (x.size() != y.size()) throw ValidationError("state", "dimension mismatch");
}
}  // namespace

bool dominated_by(const QueueState& x, const QueueState& y) {
  require_same_size(x, y);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] > y[j]) return false;
  }
  return true;
}

std::uint64_t l1_distance(const QueueState& x, const QueueState& y) {
  require_same_size(x, y);
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] > y[j] ? x[j] - y[j] : y[j] - x[j];
  return s;
}

QueueLength linf_distance(const QueueState& x, const QueueState& y) {
  require_same_size(x, y);
  QueueLength m = 0;
  for (std::size_t j = 0; j < x.size(); ++j) m = std::max(m, x[j] > y[j] ? x[j] - y[j] : y[j] - x[j]);
  return m;
}

TailVector::TailVector(std::vector<double> values, double tolerance) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("tail", "tail vector needs at least v(0)");
  if (std::fabs(values_[0] - 1.0) > tolerance) throw ValidationError("tail", "v(0) must equal 1");
  values_[0] = 1.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double v = values_[k];
    if (!std::isfinite(v) || v < -tolerance || v > 1.0 + tolerance) {
      throw ValidationError("tail", "v(" + std::to_string(k) + ") outside [0, 1]");
    }
    if (k > 0 && v > values_[k - 1] + tolerance) {
      throw ValidationError("tail", "tail is not non-increasing at k = " + std::to_string(k));
    }
  }
}

TailVector TailVector::resized(std::size_t K) const {
  std::vector<double> v(K + 1, 0.0);
  std::copy_n(values_.begin(), std::min(values_.size(), K + 1), v.begin());
  return TailVector(std::move(v), Unchecked{});
}

TailVector make_tail_unchecked(std::vector<double> values) {
  return TailVector(std::move(values), TailVector::Unchecked{});
}

EmpiricalLaw::EmpiricalLaw(std::size_t dim, std::size_t extent, std::vector<double> mass,
                           std::uint64_t sample_count)
    : dim_(dim), extent_(extent), mass_(std::move(mass)), sample_count_(sample_count) {
  if (dim_ < 1) throw ValidationError("pmf", "support dimension must be at least 1");
  std::size_t cells = 1;
  for (std::size_t i = 0; i < dim_; ++i) cells *= extent_;
  if (mass_.size() != cells) throw ValidationError("pmf", "mass array does not match the box");
  double total = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0)) throw ValidationError("pmf", "negative or NaN mass");
    total += m;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw ValidationError("pmf", "masses sum to " + std::to_string(total) + ", not 1");
  }
}

EmpiricalLaw EmpiricalLaw::from_counts(std::span<const std::uint64_t> counts) {
  return from_counts(1, counts.size(), counts);
}

EmpiricalLaw EmpiricalLaw::from_counts(std::size_t dim, std::size_t extent,
                                       std::span<const std::uint64_t> counts) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw ValidationError("samples", "no observations");
  std::vector<double> mass(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    mass[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return EmpiricalLaw(dim, extent, std::move(mass), total);
}

EmpiricalLaw EmpiricalLaw::point_mass(std::size_t value, std::size_t dim) {
  std::size_t cells = 1;
  for (std::size_t i = 0; i < dim; ++i) cells *= value + 1;
  std::vector<double> mass(cells, 0.0);
  mass.back() = 1.0;
  return EmpiricalLaw(dim, value + 1, std::move(mass));
}

double EmpiricalLaw::operator[](std::size_t k) const {
  if (dim_ != 1) throw ValidationError("pmf", "scalar access on a joint law");
  return k < extent_ ? mass_[k] : 0.0;
}

double EmpiricalLaw::at(std::span<const std::size_t> index) const {
  if (index.size() != dim_) throw ValidationError("pmf", "index arity mismatch");
  std::size_t flat = 0;
  for (std::size_t i : index) {
    if (i >= extent_) return 0.0;
    flat = flat * extent_ + i;
  }
  return mass_[flat];
}

EmpiricalLaw EmpiricalLaw::widened(std::size_t extent) const {
  if (extent <= extent_) return *this;
  std::size_t cells = 1;
  for (std::size_t i = 0; i < dim_; ++i) cells *= extent;
  std::vector<double> mass(cells, 0.0);
  std::vector<std::size_t> index(dim_, 0);
  for (std::size_t flat = 0; flat < mass_.size(); ++flat) {
    std::size_t rest = flat;
    for (std::size_t i = dim_; i-- > 0;) {
      index[i] = rest % extent_;
      rest /= extent_;
    }
    std::size_t target = 0;
    for (std::size_t i : index) target = target * extent + i;
    mass[target] = mass_[flat];
  }
  return EmpiricalLaw(dim_, extent, std::move(mass), sample_count_);
}

std::vector<std::uint64_t> tail_counts(const QueueState& x) {
  if (x.size() == 0) throw ValidationError("state", "queue state has no servers");
  const QueueLength top = x.linf_norm();
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(top) + 2, 0);
  for (QueueLength len : x.lengths()) ++counts[len];
  // Suffix sums turn the histogram into l(k, x); the extra slot stays 0.
  for (std::size_t k = top; k-- > 0;) counts[k] += counts[k + 1];
  counts.pop_back();
  return counts;
}

TailVector tail_profile(const QueueState& x) {
  const auto counts = tail_counts(x);
  const double n = static_cast<double>(x.size());
  std::vector<double> v(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) v[k] = static_cast<double>(counts[k]) / n;
  v[0] = 1.0;
  return make_tail_unchecked(std::move(v));
}

std::uint64_t queue_counts(std::size_t k, const QueueState& x) {
  if (k > std::numeric_limits<QueueLength>::max()) return 0;
  return kernels::count_at_least(x.lengths(), static_cast<QueueLength>(k));
}

}  // namespace supermarket
