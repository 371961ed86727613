#pragma once

// Domain types for the n-server join-shortest-of-d queueing model and the
// state-inspection functions shared by the simulator, the mean-field solver
// and the estimators.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace supermarket {

using QueueLength = std::uint32_t;

/// Raised when a caller-supplied value violates a documented constraint.
/// `field()` names the offending argument or invariant.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Number of servers, per-server arrival intensity and choices per customer.
/// The system arrival rate is lambda * n; service is unit-rate exponential.
class ModelParams {
 public:
  std::size_t n() const noexcept { return n_; }
  double lambda() const noexcept { return lambda_; }
  unsigned d() const noexcept { return d_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  friend ModelParams make_params(std::size_t n, double lambda, unsigned d);
  ModelParams(std::size_t n, double lambda, unsigned d) : n_(n), lambda_(lambda), d_(d) {}

  std::size_t n_;
  double lambda_;
  unsigned d_;
};

/// Validates and builds model parameters. Throws ValidationError naming
/// "n", "lambda" or "d". n = 1 and d = 1 are accepted: both reduce the model
/// to independent M/M/1 queues and serve as analytic controls.
ModelParams make_params(std::size_t n, double lambda, unsigned d);

/// Queue-lengths vector: one entry per server, counting the customer in
/// service.
class QueueState {
 public:
  QueueState() = default;
  explicit QueueState(std::vector<QueueLength> lengths) : lengths_(std::move(lengths)) {}
  QueueState(std::initializer_list<QueueLength> lengths) : lengths_(lengths) {}

  /// All-empty state on n servers.
  static QueueState empty(std::size_t n) { return QueueState(std::vector<QueueLength>(n, 0)); }

  std::size_t size() const noexcept { return lengths_.size(); }
  QueueLength operator[](std::size_t j) const { return lengths_[j]; }
  std::span<const QueueLength> lengths() const noexcept { return lengths_; }
  const std::vector<QueueLength>& vector() const noexcept { return lengths_; }

  /// Total number of customers in the system.
  std::uint64_t l1_norm() const noexcept;
  /// Maximum queue length.
  QueueLength linf_norm() const noexcept;

  friend bool operator==(const QueueState&, const QueueState&) = default;

 private:
  std::vector<QueueLength> lengths_;
};

/// Componentwise x <= y. Requires equal sizes.
bool dominated_by(const QueueState& x, const QueueState& y);
/// sum_j |x(j) - y(j)|
std::uint64_t l1_distance(const QueueState& x, const QueueState& y);
/// max_j |x(j) - y(j)|
QueueLength linf_distance(const QueueState& x, const QueueState& y);

/// Non-increasing tail sequence 1 = v(0) >= v(1) >= ... >= v(K) >= 0.
/// Indices beyond the truncation index K read as exactly 0.
class TailVector {
 public:
  /// Validates the tail invariants; throws ValidationError("tail", ...) on
  /// failure. `tolerance` allows for rounding noise in v(0) and in the
  /// monotonicity check.
  explicit TailVector(std::vector<double> values, double tolerance = 0.0);

  /// Point mass at zero: v = (1).
  static TailVector point_mass_at_zero() { return TailVector({1.0}); }

  std::size_t truncation() const noexcept { return values_.size() - 1; }
  double operator[](std::size_t k) const noexcept { return k < values_.size() ? values_[k] : 0.0; }
  std::span<const double> values() const noexcept { return values_; }

  /// Copy padded with zeros (or cut) to truncation index K.
  TailVector resized(std::size_t K) const;

  friend bool operator==(const TailVector&, const TailVector&) = default;

 private:
  struct Unchecked {};
  TailVector(std::vector<double> values, Unchecked) : values_(std::move(values)) {}
  friend TailVector make_tail_unchecked(std::vector<double> values);

  std::vector<double> values_;
};

/// Bypasses validation; for internal producers that establish the invariants
/// by construction (clamped integrator output, analytic tails).
TailVector make_tail_unchecked(std::vector<double> values);

/// Finite probability mass function over r-tuples of non-negative integers,
/// stored densely on the box {0..extent-1}^r in row-major order.
/// sample_count is 0 for exact or analytic laws.
class EmpiricalLaw {
 public:
  /// Builds a law from non-negative masses; throws ValidationError("pmf", ...)
  /// unless the masses sum to 1 within 1e-9.
  EmpiricalLaw(std::size_t dim, std::size_t extent, std::vector<double> mass,
               std::uint64_t sample_count = 0);

  /// Normalised histogram of integer observations (scalar).
  static EmpiricalLaw from_counts(std::span<const std::uint64_t> counts);
  /// Normalised histogram over the r-dimensional box.
  static EmpiricalLaw from_counts(std::size_t dim, std::size_t extent,
                                  std::span<const std::uint64_t> counts);
  static EmpiricalLaw point_mass(std::size_t value, std::size_t dim = 1);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t extent() const noexcept { return extent_; }
  std::uint64_t sample_count() const noexcept { return sample_count_; }
  std::span<const double> masses() const noexcept { return mass_; }

  /// Scalar mass at k (0 outside the stored box).
  double operator[](std::size_t k) const;
  /// Mass at an r-tuple (0 outside the stored box).
  double at(std::span<const std::size_t> index) const;

  /// Same law embedded in a larger box.
  EmpiricalLaw widened(std::size_t extent) const;

 private:
  std::size_t dim_;
  std::size_t extent_;
  std::vector<double> mass_;
  std::uint64_t sample_count_;
};

/// l(k, x) for k = 0..max(x): number of queues with length at least k.
std::vector<std::uint64_t> tail_counts(const QueueState& x);

/// u(k, x) = l(k, x) / n for k = 0..max(x).
TailVector tail_profile(const QueueState& x);

/// l(k, x) = |{ j : x(j) >= k }|.
std::uint64_t queue_counts(std::size_t k, const QueueState& x);

}  // namespace supermarket
