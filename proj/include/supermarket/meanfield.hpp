#pragma once

// Mean-field limit of the tail profile:
//
//   dv(k)/dt = lambda * (v(k-1)^d - v(k)^d) - (v(k) - v(k+1)),  v(0) = 1,
//
// truncated at K with v(K+1) = 0, together with its fixed point
// v(k) = lambda^((d^k - 1)/(d - 1)).

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "supermarket/core.hpp"

namespace supermarket {

struct OdeConfig {
  std::size_t truncation = 30;  ///< K
  double step_tol = 1e-10;      ///< local error tolerance (absolute, sup norm)
  double max_step = 1.0;

  void validate() const;
};

/// Thrown when the adaptive step collapses below a usable size.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest K with limit tail below 1e-16, never less than 30.
std::size_t default_truncation(double lambda, unsigned d);

/// OdeConfig with default_truncation, widened to cover the support of `v0`
/// plus a margin of 30.
OdeConfig default_ode_config(const ModelParams& params, const TailVector& v0);

/// Right-hand side for k = 0..K (index 0 is identically zero).
std::vector<double> drift(const TailVector& v, const ModelParams& params);

/// sup_k |drift(v)(k)|
double fixed_point_residual(const TailVector& v, const ModelParams& params);

/// Solution at time t from v0, evaluated on the truncation cfg.truncation.
TailVector integrate(const TailVector& v0, double t, const ModelParams& params,
                     const OdeConfig& cfg);

/// Solution at each time in `times` (non-decreasing, >= 0).
std::vector<TailVector> integrate_trajectory(const TailVector& v0, std::span<const double> times,
                                             const ModelParams& params, const OdeConfig& cfg);

/// Exponent (d^k - 1)/(d - 1) = 1 + d + ... + d^(k-1), or k when d = 1.
/// Saturates at UINT64_MAX instead of overflowing.
std::uint64_t tail_exponent(unsigned d, std::size_t k) noexcept;

/// Fixed point tail lambda^((d^k-1)/(d-1)) for k = 0..K, computed in log
/// space. For d = 1 this is the geometric tail lambda^k.
TailVector limit_law(double lambda, unsigned d, std::size_t K);

/// Smallest i >= 1 with lambda^((d^i-1)/(d-1)) < n^(-1/2) ln^2 n.
/// Requires n >= 2 and d >= 2.
unsigned istar(std::size_t n, double lambda, unsigned d);

/// p(k) = v(k) - v(k+1), p(K) = v(K).
EmpiricalLaw tail_to_law(const TailVector& v);

/// s with s^2 = sum_{k=1..K} (v(k) - lambda^((d^k-1)/(d-1)))^2 theta^k,
/// K = max(truncation of v, K_min). Requires theta > 1.
double weighted_tail_distance(const TailVector& v, double lambda, unsigned d, double theta,
                              std::size_t K_min = 0);

/// CSV with header "t,v1,...,vK" and one row per time.
void write_trajectory_csv(std::ostream& out, std::span<const double> times,
                          std::span<const TailVector> trajectory);

}  // namespace supermarket
