#include "supermarket/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "supermarket/coupling_sim.hpp"
#include "supermarket/kernels.hpp"
#include "supermarket/meanfield.hpp"

namespace supermarket {

namespace {

void require_samples(std::span<const QueueState> samples) {
  if (samples.empty()) throw ValidationError("samples", "empty sample set");
}

void require_scalar(const EmpiricalLaw& law) {
  if (law.dim() != 1) throw ValidationError("support_dim", "scalar law required");
}

double int_pow(double x, unsigned k) {
  double p = 1.0;
  for (unsigned i = 0; i < k; ++i) p *= x;
  return p;
}

}  // namespace

EstimateWithError across_replications(std::span<const double> values) {
  if (values.empty()) throw ValidationError("replications", "no replications");
  const double count = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = values.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
  return {mean, se, values.size()};
}

EmpiricalLaw empirical_marginal(std::span<const QueueState> samples,
                                std::optional<std::size_t> queue) {
  require_samples(samples);
  std::vector<std::uint64_t> hist;
  auto add = [&](QueueLength len) {
    if (len >= hist.size()) hist.resize(static_cast<std::size_t>(len) + 1, 0);
    ++hist[len];
  };
  for (const QueueState& x : samples) {
    if (queue) {
      if (*queue >= x.size()) throw ValidationError("queue", "queue index out of range");
      add(x[*queue]);
    } else {
      for (QueueLength len : x.lengths()) add(len);
    }
  }
  return EmpiricalLaw::from_counts(hist);
}

double tv_distance(const EmpiricalLaw& p, const EmpiricalLaw& q) {
  if (p.dim() != q.dim()) throw ValidationError("support_dim", "dimension mismatch");
  const std::size_t extent = std::max(p.extent(), q.extent());
  const EmpiricalLaw a = p.widened(extent);
  const EmpiricalLaw b = q.widened(extent);
  return std::min(1.0, 0.5 * kernels::abs_diff_sum(a.masses(), b.masses()));
}

double tv_distance_to_tail(const EmpiricalLaw& p, const TailVector& analytic) {
  require_scalar(p);
  // Keep cells 0..cut-1 where cut is the first index with tail below 1e-12;
  // the kept masses sum to 1 - v(cut).
  std::size_t cut = 1;
  while (cut <= analytic.truncation() && analytic[cut] >= 1e-12) ++cut;
  const double neglected = analytic[cut];
  const std::size_t extent = std::max(p.extent(), cut);
  std::vector<double> a(extent, 0.0), b(extent, 0.0);
  for (std::size_t k = 0; k < p.extent(); ++k) a[k] = p[k];
  for (std::size_t k = 0; k < cut; ++k) b[k] = analytic[k] - analytic[k + 1];
  return std::min(1.0, 0.5 * kernels::abs_diff_sum(a, b) + neglected);
}

double wasserstein_distance(const EmpiricalLaw& p, const EmpiricalLaw& q) {
  require_scalar(p);
  require_scalar(q);
  const std::size_t extent = std::max(p.extent(), q.extent());
  std::vector<double> tp(extent, 0.0), tq(extent, 0.0);
  // Tails P(X >= k) for k = 1..extent-1, accumulated from the top.
  double sp = 0.0, sq = 0.0;
  for (std::size_t k = extent; k-- > 1;) {
    sp += p[k];
    sq += q[k];
    tp[k] = sp;
    tq[k] = sq;
  }
  return kernels::abs_diff_sum(tp, tq);
}

double moment(const EmpiricalLaw& law, unsigned k) {
  require_scalar(law);
  double m = 0.0;
  for (std::size_t j = 0; j < law.extent(); ++j) m += int_pow(static_cast<double>(j), k) * law[j];
  return m;
}

TailAverages tail_averages(std::span<const QueueState> samples, unsigned d) {
  require_samples(samples);
  TailAverages out;
  out.n = samples.front().size();
  out.samples = samples.size();
  const double n = static_cast<double>(out.n);
  for (const QueueState& x : samples) {
    if (x.size() != out.n) throw ValidationError("samples", "inconsistent dimensions");
    const auto counts = tail_counts(x);
    if (counts.size() + 1 > out.u.size()) {
      out.u.resize(counts.size() + 1, 0.0);
      out.u_pow.resize(counts.size() + 1, 0.0);
      out.count_sq.resize(counts.size() + 1, 0.0);
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double c = static_cast<double>(counts[k]);
      out.u[k] += c / n;
      out.u_pow[k] += int_pow(c / n, d);
      out.count_sq[k] += c * c;
    }
  }
  const double count = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < out.u.size(); ++k) {
    out.u[k] /= count;
    out.u_pow[k] /= count;
    out.count_sq[k] /= count;
  }
  return out;
}

TailAverages tail_averages(const Occupation& occupation, std::size_t n) {
  TailAverages out;
  out.n = n;
  out.samples = 0;
  const std::size_t size = occupation.count.size() + 1;
  out.u.resize(size, 0.0);
  out.u_pow.resize(size, 0.0);
  out.count_sq.resize(size, 0.0);
  for (std::size_t k = 0; k + 1 < size; ++k) {
    out.u[k] = occupation.mean_fraction(k, n);
    out.u_pow[k] = occupation.mean_fraction_pow(k);
    out.count_sq[k] = occupation.mean_count_sq(k);
  }
  return out;
}

double generator_residual(const TailAverages& averages, std::size_t k, double lambda) {
  if (k < 1) throw ValidationError("k", "must be at least 1");
  return lambda * (averages.mean_u_pow(k - 1) - averages.mean_u_pow(k)) -
         (averages.mean_u(k) - averages.mean_u(k + 1));
}

double generator_residual(std::span<const QueueState> samples, std::size_t k,
                          const ModelParams& params) {
  return generator_residual(tail_averages(samples, params.d()), k, params.lambda());
}

EstimateWithError generator_residual(std::span<const SampleSet> replications, std::size_t k,
                                     const ModelParams& params) {
  std::vector<double> values;
  values.reserve(replications.size());
  for (const SampleSet& s : replications) values.push_back(generator_residual(s, k, params));
  return across_replications(values);
}

namespace {

struct TupleHistogram {
  std::size_t r;
  std::size_t extent;
  std::vector<std::uint64_t> counts;

  void add(std::span<const QueueLength> tuple) {
    QueueLength top = *std::max_element(tuple.begin(), tuple.end());
    if (top >= extent) grow(static_cast<std::size_t>(top) + 1);
    std::size_t flat = 0;
    for (QueueLength v : tuple) flat = flat * extent + v;
    ++counts[flat];
  }

  void grow(std::size_t new_extent) {
    std::size_t cells = 1;
    for (std::size_t i = 0; i < r; ++i) cells *= new_extent;
    std::vector<std::uint64_t> next(cells, 0);
    std::vector<std::size_t> idx(r);
    for (std::size_t flat = 0; flat < counts.size(); ++flat) {
      if (counts[flat] == 0) continue;
      std::size_t rest = flat;
      for (std::size_t i = r; i-- > 0;) {
        idx[i] = rest % extent;
        rest /= extent;
      }
      std::size_t target = 0;
      for (std::size_t i : idx) target = target * new_extent + i;
      next[target] = counts[flat];
    }
    counts.swap(next);
    extent = new_extent;
  }

  EmpiricalLaw law() const { return EmpiricalLaw::from_counts(r, extent, counts); }
};

void check_joint_args(std::span<const QueueState> samples, std::size_t r) {
  require_samples(samples);
  if (r < 1 || r > 3) throw ValidationError("r", "joint laws are limited to 1 <= r <= 3");
  if (r > samples.front().size()) throw ValidationError("r", "r exceeds the number of queues");
}

std::size_t block_count(std::size_t n, std::size_t r, JointSampling sampling) {
  return sampling == JointSampling::FirstQueues ? 1 : n / r;
}

}  // namespace

EmpiricalLaw joint_empirical(std::span<const QueueState> samples, std::size_t r,
                             JointSampling sampling) {
  check_joint_args(samples, r);
  TupleHistogram hist{r, 1, std::vector<std::uint64_t>(1, 0)};
  QueueLength tuple[3];
  for (const QueueState& x : samples) {
    const std::size_t blocks = block_count(x.size(), r, sampling);
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t i = 0; i < r; ++i) tuple[i] = x[b * r + i];
      hist.add(std::span<const QueueLength>(tuple, r));
    }
  }
  return hist.law();
}

EmpiricalLaw product_law(const EmpiricalLaw& marginal, std::size_t r) {
  require_scalar(marginal);
  if (r < 1) throw ValidationError("r", "must be at least 1");
  const std::size_t extent = marginal.extent();
  std::size_t cells = 1;
  for (std::size_t i = 0; i < r; ++i) cells *= extent;
  std::vector<double> mass(cells);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    std::size_t rest = flat;
    double m = 1.0;
    for (std::size_t i = 0; i < r; ++i) {
      m *= marginal[rest % extent];
      rest /= extent;
    }
    mass[flat] = m;
  }
  // Renormalise away the rounding of the products.
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return EmpiricalLaw(r, extent, std::move(mass), marginal.sample_count());
}

ChaosGap chaos_gap(std::span<const QueueState> samples, std::size_t r, ChaosReference reference,
                   const ModelParams& params, JointSampling sampling) {
  check_joint_args(samples, r);
  const EmpiricalLaw joint = joint_empirical(samples, r, sampling);
  ChaosGap gap;
  if (reference == ChaosReference::ProductOfLimit) {
    const TailVector limit = limit_law(params.lambda(), params.d(),
                                       default_truncation(params.lambda(), params.d()));
    EmpiricalLaw marginal = tail_to_law(limit);
    gap.raw = tv_distance(joint, product_law(marginal, r));
    return gap;
  }
  // Marginal of the tuple coordinates actually used.
  std::vector<std::uint64_t> hist;
  const std::size_t count = samples.size();
  for (const QueueState& x : samples) {
    const std::size_t used = block_count(x.size(), r, sampling) * r;
    for (std::size_t j = 0; j < used; ++j) {
      if (x[j] >= hist.size()) hist.resize(static_cast<std::size_t>(x[j]) + 1, 0);
      ++hist[x[j]];
    }
  }
  const EmpiricalLaw reference_law = product_law(EmpiricalLaw::from_counts(hist), r);
  gap.raw = tv_distance(joint, reference_law);
  if (r == 1) return gap;

  TupleHistogram decoupled{r, 1, std::vector<std::uint64_t>(1, 0)};
  QueueLength tuple[3];
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t blocks = block_count(samples[s].size(), r, sampling);
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t i = 0; i < r; ++i) {
        tuple[i] = samples[(s + i * count / r) % count][b * r + i];
      }
      decoupled.add(std::span<const QueueLength>(tuple, r));
    }
  }
  gap.noise_floor = tv_distance(decoupled.law(), reference_law);
  return gap;
}

EstimateWithError chaos_gap(std::span<const SampleSet> replications, std::size_t r,
                            ChaosReference reference, const ModelParams& params,
                            JointSampling sampling) {
  std::vector<double> values;
  values.reserve(replications.size());
  for (const SampleSet& s : replications) {
    values.push_back(chaos_gap(s, r, reference, params, sampling).corrected());
  }
  return across_replications(values);
}

MaxQueueReport max_queue_stats(std::span<const QueueState> samples, const ModelParams& params) {
  require_samples(samples);
  std::vector<std::uint64_t> hist;
  for (const QueueState& x : samples) {
    const QueueLength m = x.linf_norm();
    if (m >= hist.size()) hist.resize(static_cast<std::size_t>(m) + 1, 0);
    ++hist[m];
  }
  MaxQueueReport report{EmpiricalLaw::from_counts(hist), std::nullopt, 0, 0, 0.0, {}, {}};
  if (params.d() >= 2 && params.n() >= 2) {
    const unsigned i = istar(params.n(), params.lambda(), params.d());
    report.istar = i;
    report.window_low = params.d() == 2 ? i : i - 1;
    report.window_high = params.d() == 2 ? i + 1 : i;
    report.window_mass = report.law[report.window_low] + report.law[report.window_high];
  }
  const std::size_t top = report.law.extent();
  double tail = 1.0;
  for (std::size_t j = 1; j <= top; ++j) {
    tail -= report.law[j - 1];
    report.exceedance.push_back(std::max(0.0, tail));
    report.bound.push_back(static_cast<double>(params.n()) *
                           std::pow(params.lambda(), static_cast<double>(j)));
  }
  return report;
}

double variance_nonempty(std::span<const QueueState> samples) {
  require_samples(samples);
  if (samples.size() < 2) return 0.0;
  double mean = 0.0;
  std::vector<double> f;
  f.reserve(samples.size());
  for (const QueueState& x : samples) f.push_back(static_cast<double>(queue_counts(1, x)));
  mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
  double ss = 0.0;
  for (double v : f) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(f.size() - 1);
}

EstimateWithError variance_nonempty(std::span<const SampleSet> replications,
                                    const ModelParams& params) {
  (void)params;
  std::vector<double> values;
  values.reserve(replications.size());
  for (const SampleSet& s : replications) values.push_back(variance_nonempty(s));
  return across_replications(values);
}

U2Excess u2_excess(std::span<const TailAverages> replications, const ModelParams& params) {
  const double lambda = params.lambda();
  const double target = std::pow(lambda, static_cast<double>(params.d() + 1));
  std::vector<double> excess, identity;
  for (const TailAverages& a : replications) {
    excess.push_back(a.mean_u(2) - target);
    identity.push_back(a.mean_u(2) - lambda * a.mean_u_pow(1));
  }
  return {across_replications(excess), across_replications(identity)};
}

U2Excess u2_excess(std::span<const SampleSet> replications, const ModelParams& params) {
  std::vector<TailAverages> averages;
  averages.reserve(replications.size());
  for (const SampleSet& s : replications) averages.push_back(tail_averages(s, params.d()));
  return u2_excess(averages, params);
}

}  // namespace supermarket
