#pragma once

// Statistics that confront simulated samples with the analytic laws:
// empirical laws, distances, generator-identity residuals, chaos gaps,
// moments, max-queue statistics and the variance diagnostics.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "supermarket/core.hpp"

namespace supermarket {

struct Occupation;

struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replication_count = 0;
};

/// Mean and standard error of the mean across independent replications.
EstimateWithError across_replications(std::span<const double> values);

/// Samples of one replication.
using SampleSet = std::vector<QueueState>;

/// Law of one queue's length across samples, or pooled over all queues when
/// `queue` is empty.
EmpiricalLaw empirical_marginal(std::span<const QueueState> samples,
                                std::optional<std::size_t> queue = std::nullopt);

/// Half the l1 distance over the union of supports. Both laws must have the
/// same support dimension.
double tv_distance(const EmpiricalLaw& p, const EmpiricalLaw& q);

/// TV between a scalar law and the law with tail `analytic`. The analytic
/// law is cut where its tail drops below 1e-12 and the cut mass is added to
/// the result, so the value is an upper bound on the exact distance.
double tv_distance_to_tail(const EmpiricalLaw& p, const TailVector& analytic);

/// sum_{k>=1} |P(X >= k) - Q(X >= k)| for scalar laws.
double wasserstein_distance(const EmpiricalLaw& p, const EmpiricalLaw& q);

/// k-th raw moment of a scalar law.
double moment(const EmpiricalLaw& law, unsigned k);

/// Averages of the tail profile needed by the generator identity, from
/// either snapshots or time integrals. Index k runs from 0 to max length + 1.
struct TailAverages {
  std::size_t n = 0;
  std::uint64_t samples = 0;
  std::vector<double> u;          ///< E[u(k, Y)]
  std::vector<double> u_pow;      ///< E[u(k, Y)^d]
  std::vector<double> count_sq;   ///< E[l(k, Y)^2]

  double mean_u(std::size_t k) const { return k < u.size() ? u[k] : 0.0; }
  double mean_u_pow(std::size_t k) const { return k < u_pow.size() ? u_pow[k] : 0.0; }
  double mean_count_sq(std::size_t k) const { return k < count_sq.size() ? count_sq[k] : 0.0; }
};

TailAverages tail_averages(std::span<const QueueState> samples, unsigned d);
TailAverages tail_averages(const Occupation& occupation, std::size_t n);

/// lambda (E[u(k-1)^d] - E[u(k)^d]) - (E[u(k)] - E[u(k+1)]); zero in equilibrium.
double generator_residual(const TailAverages& averages, std::size_t k, double lambda);
double generator_residual(std::span<const QueueState> samples, std::size_t k,
                          const ModelParams& params);
EstimateWithError generator_residual(std::span<const SampleSet> replications, std::size_t k,
                                     const ModelParams& params);

/// How r-tuples are drawn from each sample.
enum class JointSampling {
  FirstQueues,     ///< queues 0..r-1 only
  DisjointBlocks,  ///< every block (r b, ..., r b + r - 1); exchangeability makes these identically distributed
};

/// Joint law of r queue lengths (1 <= r <= 3, r <= n).
EmpiricalLaw joint_empirical(std::span<const QueueState> samples, std::size_t r,
                             JointSampling sampling = JointSampling::FirstQueues);

/// r-fold product of a scalar law.
EmpiricalLaw product_law(const EmpiricalLaw& marginal, std::size_t r);

enum class ChaosReference { ProductOfEmpirical, ProductOfLimit };

struct ChaosGap {
  double raw = 0.0;          ///< TV(joint, reference)
  double noise_floor = 0.0;  ///< same statistic on time-decoupled tuples (ProductOfEmpirical only)
  double corrected() const { return raw - noise_floor; }
};

/// TV between the joint law of r queues and the chosen product reference.
/// For ProductOfEmpirical the reference is the product of the marginal of
/// the tuple coordinates; the noise floor re-pairs coordinate i of sample s
/// with sample s + i N / r, which leaves the marginal unchanged but removes
/// the within-sample dependence, so it measures the plug-in bias alone.
ChaosGap chaos_gap(std::span<const QueueState> samples, std::size_t r, ChaosReference reference,
                   const ModelParams& params,
                   JointSampling sampling = JointSampling::FirstQueues);
/// Across replications, using the bias-corrected gap per replication.
EstimateWithError chaos_gap(std::span<const SampleSet> replications, std::size_t r,
                            ChaosReference reference, const ModelParams& params,
                            JointSampling sampling = JointSampling::FirstQueues);

struct MaxQueueReport {
  EmpiricalLaw law;                ///< law of the maximum queue length
  std::optional<unsigned> istar;   ///< present when d >= 2 and n >= 2
  unsigned window_low = 0;         ///< {i*, i*+1} for d = 2, {i*-1, i*} for d >= 3
  unsigned window_high = 0;
  double window_mass = 0.0;
  /// For j = 1..max observed + 1: Pr(M >= j) and the bound n lambda^j.
  std::vector<double> exceedance;
  std::vector<double> bound;
};

MaxQueueReport max_queue_stats(std::span<const QueueState> samples, const ModelParams& params);

/// Sample variance of l(1, Y) over one replication's samples.
double variance_nonempty(std::span<const QueueState> samples);
EstimateWithError variance_nonempty(std::span<const SampleSet> replications,
                                    const ModelParams& params);

struct U2Excess {
  EstimateWithError excess;        ///< E[u(2)] - lambda^(d+1)
  EstimateWithError identity_gap;  ///< E[u(2)] - lambda E[u(1)^d], zero in equilibrium
};

U2Excess u2_excess(std::span<const TailAverages> replications, const ModelParams& params);
U2Excess u2_excess(std::span<const SampleSet> replications, const ModelParams& params);

}  // namespace supermarket
