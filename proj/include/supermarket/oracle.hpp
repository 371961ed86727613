#pragma once

// Exact stationary law of tiny systems (n <= 4) from the generator of the
// chain truncated at a maximum queue length.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "supermarket/core.hpp"
#include "supermarket/estimators.hpp"

namespace supermarket {

struct Transition {
  std::size_t from;
  std::size_t to;
  double rate;
};

/// Generator of the chain on {0..cap}^n. Arrivals that would push a queue
/// past `cap` are dropped. States are indexed in mixed radix with queue 0
/// as the most significant digit.
class TruncatedChain {
 public:
  const ModelParams& params() const noexcept { return params_; }
  unsigned cap() const noexcept { return cap_; }
  std::size_t state_count() const noexcept { return state_count_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  /// Diagonal entries (minus the total outflow rate) per state.
  const std::vector<double>& diagonal() const noexcept { return diagonal_; }

  QueueState state(std::size_t index) const;
  std::size_t index(const QueueState& x) const;

  /// Arrival routing for state x: entry j is the number of the n^d
  /// equiprobable choice lists that send the customer to queue j.
  std::vector<std::uint64_t> routing_counts(const QueueState& x) const;

  /// Checks, in integer arithmetic, that every state's routing counts add up
  /// to n^d and that departures leave at unit rate per non-empty queue.
  bool rows_balance_exactly() const;

 private:
  friend TruncatedChain build_chain(const ModelParams& params, unsigned cap);
  TruncatedChain(const ModelParams& params, unsigned cap) : params_(params), cap_(cap) {}

  ModelParams params_;
  unsigned cap_;
  std::size_t state_count_ = 0;
  std::vector<Transition> transitions_;
  std::vector<double> diagonal_;
};

/// Upper bound on (cap + 1)^n accepted by build_chain.
inline constexpr std::size_t kMaxOracleStates = 500000;

/// Smallest cap with n lambda^cap < 1e-10.
unsigned default_cap(const ModelParams& params);

/// Requires n <= 4 and (cap + 1)^n <= kMaxOracleStates.
TruncatedChain build_chain(const ModelParams& params, unsigned cap);

/// Solves pi G = 0, sum pi = 1 with a sparse LU factorisation.
std::vector<double> stationary(const TruncatedChain& chain);

/// max over states of |(pi G)(s)|
double stationary_residual(const TruncatedChain& chain, const std::vector<double>& pi);

/// Law of queue 0's length under pi.
EmpiricalLaw exact_marginal(const TruncatedChain& chain, const std::vector<double>& pi);
/// Joint law of queues 0 and 1 under pi (n >= 2).
EmpiricalLaw exact_joint(const TruncatedChain& chain, const std::vector<double>& pi);
/// Exact E[u(k, Y)], E[u(k, Y)^d] and E[l(k, Y)^2].
TailAverages exact_tail_averages(const TruncatedChain& chain, const std::vector<double>& pi);

/// JSON object with the parameters, cap, residual, marginal and (n >= 2)
/// the joint law of queues 0 and 1.
void write_oracle_json(std::ostream& out, const TruncatedChain& chain,
                       const std::vector<double>& pi);

}  // namespace supermarket
