#include "scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "supermarket/coupling_sim.hpp"
#include "supermarket/meanfield.hpp"
#include "supermarket/oracle.hpp"

namespace supermarket::scenarios {

namespace {

// Analytic tails are cut where they drop below this level when deciding
// how many k to report.
constexpr double kTailCut = 1e-12;

EstimateWithError exact(double value, std::size_t reps) { return {value, 0.0, reps}; }

void add(CellRecord& record, std::string name, EstimateWithError e) {
  record.estimates.emplace_back(std::move(name), e);
}

void add_series(CellRecord& record, std::string name, std::vector<double> values) {
  record.series.emplace_back(std::move(name), std::move(values));
}

void accumulate(std::vector<std::uint64_t>& into, std::span<const std::uint64_t> from) {
  if (into.size() < from.size()) into.resize(from.size(), 0);
  for (std::size_t k = 0; k < from.size(); ++k) into[k] += from[k];
}

std::vector<std::uint64_t> minus(std::vector<std::uint64_t> total,
                                 std::span<const std::uint64_t> part) {
  for (std::size_t k = 0; k < part.size(); ++k) total[k] -= part[k];
  while (total.size() > 1 && total.back() == 0) total.pop_back();
  return total;
}

// Scalar law with tail `u` (u[0] = 1); tiny negative differences from
// floating-point accumulation are clamped and the masses renormalised.
EmpiricalLaw law_from_tail(std::span<const double> u) {
  std::vector<double> p(u.size());
  double total = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double next = k + 1 < u.size() ? u[k + 1] : 0.0;
    p[k] = std::max(0.0, u[k] - next);
    total += p[k];
  }
  for (double& x : p) x /= total;
  const std::size_t extent = p.size();
  return EmpiricalLaw(1, extent, std::move(p));
}

std::size_t analytic_support(const TailVector& v) {
  std::size_t K = 0;
  while (K + 1 <= v.truncation() && v[K + 1] >= kTailCut) ++K;
  return K;
}

// One equilibrium replication: start empty, discard [0, burn_in], then take
// `samples` snapshots `spacing` apart while integrating the occupation
// statistics over the same window.
struct EquilibriumRun {
  Occupation occupation;
  std::vector<std::uint64_t> histogram;  // lengths pooled over snapshots and queues
  std::vector<double> nonempty;          // l(1) at each snapshot
  std::vector<QueueState> snapshots;     // kept on request
};

EquilibriumRun run_equilibrium(const ModelParams& params, double burn_in, double spacing,
                               std::size_t samples, std::uint64_t seed, bool keep_snapshots) {
  EquilibriumRun out;
  Simulator sim(params, QueueState::empty(params.n()), seed);
  sim.run_until(burn_in);
  sim.start_occupation();
  out.nonempty.reserve(samples);
  if (keep_snapshots) out.snapshots.reserve(samples);
  for (std::size_t i = 1; i <= samples; ++i) {
    sim.run_until(burn_in + spacing * static_cast<double>(i));
    const auto tc = sim.tail_counts();
    if (out.histogram.size() < tc.size()) out.histogram.resize(tc.size(), 0);
    for (std::size_t k = 0; k < tc.size(); ++k) {
      out.histogram[k] += tc[k] - (k + 1 < tc.size() ? tc[k + 1] : 0);
    }
    out.nonempty.push_back(tc.size() > 1 ? static_cast<double>(tc[1]) : 0.0);
    if (keep_snapshots) out.snapshots.push_back(sim.state());
  }
  out.occupation = sim.occupation();
  return out;
}

template <class T>
std::vector<T> per_replication(const CellContext& ctx, const std::function<T(std::uint64_t)>& job) {
  return parallel_map<T>(ctx.seeds.size(), ctx.workers,
                         [&](std::size_t i) { return job(ctx.seeds[i]); });
}

// ---------------------------------------------------------------- equilibrium

void equilibrium_marginal(const CellContext& ctx, CellRecord& record) {
  const ModelParams params = ctx.point.params();
  const std::size_t n = params.n();
  const double lambda = params.lambda();
  const std::size_t R = ctx.seeds.size();
  const double burn_in = ctx.config.burn_in_for(ctx.point);
  const std::size_t samples = ctx.config.samples_for(ctx.point);

  struct Rep {
    TailAverages averages;
    std::vector<std::uint64_t> histogram;
  };
  const auto reps = per_replication<Rep>(ctx, [&](std::uint64_t seed) {
    auto run = run_equilibrium(params, burn_in, ctx.config.spacing, samples, seed, false);
    return Rep{tail_averages(run.occupation, n), std::move(run.histogram)};
  });

  const TailVector limit = limit_law(lambda, params.d(), default_truncation(lambda, params.d()));
  std::size_t K = analytic_support(limit);
  for (const Rep& r : reps) K = std::max(K, r.averages.u.size() - 1);

  // u_hat(k) per replication, k = 0..K.
  std::vector<std::vector<double>> u(R, std::vector<double>(K + 1, 0.0));
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t k = 0; k <= K; ++k) u[i][k] = reps[i].averages.mean_u(k);
  }
  std::vector<double> u_sum(K + 1, 0.0);
  for (const auto& row : u) {
    for (std::size_t k = 0; k <= K; ++k) u_sum[k] += row[k];
  }
  auto mean_tail = [&](std::size_t drop) {
    std::vector<double> m(K + 1);
    const double count = static_cast<double>(drop < R ? R - 1 : R);
    for (std::size_t k = 0; k <= K; ++k) m[k] = (u_sum[k] - (drop < R ? u[drop][k] : 0.0)) / count;
    return m;
  };

  for (std::size_t k = 1; k <= K; ++k) {
    std::vector<double> col(R);
    for (std::size_t i = 0; i < R; ++i) col[i] = u[i][k];
    add(record, "u_" + std::to_string(k), across_replications(col));
  }
  for (std::size_t k = 1; k <= std::min<std::size_t>(3, K); ++k) {
    std::vector<double> res(R);
    for (std::size_t i = 0; i < R; ++i) res[i] = generator_residual(reps[i].averages, k, lambda);
    add(record, "generator_residual_" + std::to_string(k), across_replications(res));
  }

  add(record, "sup_tail_deviation", jackknife(R, [&](std::size_t drop) {
        const auto m = mean_tail(drop);
        double sup = 0.0;
        for (std::size_t k = 1; k <= K; ++k) sup = std::max(sup, std::fabs(m[k] - limit[k]));
        return sup;
      }));
  add(record, "tv_time_average", jackknife(R, [&](std::size_t drop) {
        return tv_distance_to_tail(law_from_tail(mean_tail(drop)), limit);
      }));

  std::vector<std::uint64_t> pooled;
  for (const Rep& r : reps) accumulate(pooled, r.histogram);
  auto snapshot_law = [&](std::size_t drop) {
    return EmpiricalLaw::from_counts(drop < R ? minus(pooled, reps[drop].histogram) : pooled);
  };
  const EmpiricalLaw limit_pmf = tail_to_law(limit);
  add(record, "tv_snapshots",
      jackknife(R, [&](std::size_t drop) { return tv_distance_to_tail(snapshot_law(drop), limit); }));
  add(record, "wasserstein_snapshots", jackknife(R, [&](std::size_t drop) {
        return wasserstein_distance(snapshot_law(drop), limit_pmf);
      }));
  for (unsigned m = 1; m <= 2; ++m) {
    add(record, "moment_" + std::to_string(m),
        jackknife(R, [&](std::size_t drop) { return moment(snapshot_law(drop), m); }));
    add(record, "limit_moment_" + std::to_string(m), exact(moment(limit_pmf, m), R));
  }

  std::vector<double> limit_values(K + 1), mean_values = mean_tail(R);
  for (std::size_t k = 0; k <= K; ++k) limit_values[k] = limit[k];
  add_series(record, "u_hat", std::move(mean_values));
  add_series(record, "u_limit", std::move(limit_values));
}

// ---------------------------------------------------------------------- chaos

void chaos_scaling(const CellContext& ctx, CellRecord& record) {
  const ModelParams params = ctx.point.params();
  const std::size_t r = ctx.config.r;
  const double burn_in = ctx.config.burn_in_for(ctx.point);
  const std::size_t samples = ctx.config.samples_for(ctx.point);

  struct Rep {
    ChaosGap empirical;
    double limit_gap = 0.0;
  };
  const auto reps = per_replication<Rep>(ctx, [&](std::uint64_t seed) {
    const auto snaps = sample_equilibrium(params, burn_in, ctx.config.spacing, samples, seed);
    Rep rep;
    rep.empirical = chaos_gap(snaps, r, ChaosReference::ProductOfEmpirical, params,
                              JointSampling::DisjointBlocks);
    rep.limit_gap = chaos_gap(snaps, r, ChaosReference::ProductOfLimit, params,
                              JointSampling::DisjointBlocks).raw;
    return rep;
  });

  std::vector<double> corrected, raw, floor, limit;
  for (const Rep& rep : reps) {
    corrected.push_back(rep.empirical.corrected());
    raw.push_back(rep.empirical.raw);
    floor.push_back(rep.empirical.noise_floor);
    limit.push_back(rep.limit_gap);
  }
  add(record, "chaos_gap", across_replications(corrected));
  add(record, "chaos_gap_raw", across_replications(raw));
  add(record, "noise_floor", across_replications(floor));
  add(record, "chaos_gap_limit", across_replications(limit));
  add(record, "tuples_per_replication",
      exact(static_cast<double>(samples * (params.n() / r)), reps.size()));
}

// ------------------------------------------------------------------- tracking

void nonequilibrium_tracking(const CellContext& ctx, CellRecord& record) {
  const ModelParams params = ctx.point.params();
  const std::size_t n = params.n();
  const double lambda = params.lambda();
  const unsigned d = params.d();
  const double t_max = ctx.config.t_max.value_or(20.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2))));
  const std::vector<double> times = tracking_time_grid(t_max);
  const InitialLaw& initial = ctx.config.initial;

  const TailVector v0 = initial.tail();
  const std::vector<TailVector> ode =
      integrate_trajectory(v0, times, params, default_ode_config(params, v0));
  const TailVector limit = limit_law(lambda, d, default_truncation(lambda, d));
  const std::size_t runs_per_group = (ctx.config.pool_queues + n - 1) / n;

  struct Group {
    std::vector<double> tv_mean_field, tv_limit, weighted;
  };
  const auto groups = per_replication<Group>(ctx, [&](std::uint64_t group_seed) {
    std::vector<std::vector<std::uint64_t>> hist(times.size());
    for (std::size_t j = 0; j < runs_per_group; ++j) {
      Engine init_engine(derive_seed(group_seed, 2 * j));
      Simulator sim(params, initial.sample(n, init_engine), derive_seed(group_seed, 2 * j + 1));
      for (std::size_t i = 0; i < times.size(); ++i) {
        sim.run_until(times[i]);
        const auto tc = sim.tail_counts();
        std::vector<std::uint64_t> h(tc.size());
        for (std::size_t k = 0; k < tc.size(); ++k) h[k] = tc[k] - (k + 1 < tc.size() ? tc[k + 1] : 0);
        accumulate(hist[i], h);
      }
    }
    Group g;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const EmpiricalLaw law = EmpiricalLaw::from_counts(hist[i]);
      g.tv_mean_field.push_back(tv_distance_to_tail(law, ode[i]));
      g.tv_limit.push_back(tv_distance_to_tail(law, limit));
      std::vector<double> tail(law.extent());
      double acc = 0.0;
      for (std::size_t k = law.extent(); k-- > 0;) {
        acc += law[k];
        tail[k] = std::min(1.0, acc);
      }
      tail[0] = 1.0;
      g.weighted.push_back(
          weighted_tail_distance(make_tail_unchecked(std::move(tail)), lambda, d, ctx.config.theta, 30));
    }
    return g;
  });

  const std::size_t G = groups.size();
  std::vector<double> sup(G), last(G), first(G);
  for (std::size_t g = 0; g < G; ++g) {
    sup[g] = *std::max_element(groups[g].tv_mean_field.begin(), groups[g].tv_mean_field.end());
    first[g] = groups[g].tv_mean_field.front();
    last[g] = groups[g].tv_mean_field.back();
  }
  add(record, "sup_tv_mean_field", across_replications(sup));
  add(record, "tv_mean_field_initial", across_replications(first));
  add(record, "tv_mean_field_final", across_replications(last));
  add(record, "queues_per_group", exact(static_cast<double>(runs_per_group * n), G));

  auto column_mean = [&](auto member, bool want_se) {
    std::vector<double> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      std::vector<double> col(G);
      for (std::size_t g = 0; g < G; ++g) col[g] = (groups[g].*member)[i];
      const auto e = across_replications(col);
      out[i] = want_se ? e.std_error : e.value;
    }
    return out;
  };
  std::vector<double> ode_u1(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) ode_u1[i] = ode[i][1];
  add_series(record, "time", times);
  add_series(record, "tv_mean_field", column_mean(&Group::tv_mean_field, false));
  add_series(record, "tv_mean_field_se", column_mean(&Group::tv_mean_field, true));
  add_series(record, "tv_limit", column_mean(&Group::tv_limit, false));
  add_series(record, "weighted_tail_distance", column_mean(&Group::weighted, false));
  add_series(record, "ode_v1", std::move(ode_u1));
}

// --------------------------------------------------------------------- mixing

void mixing_diagnostic(const CellContext& ctx, CellRecord& record) {
  const ModelParams params = ctx.point.params();
  const std::size_t n = params.n();
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  const unsigned level = ctx.config.mixing_level;
  const double horizon = ctx.config.horizon.value_or(50.0 * (level + log_n));
  const QueueState empty = QueueState::empty(n);
  const QueueState loaded(std::vector<QueueLength>(n, level));

  const auto times = per_replication<double>(ctx, [&](std::uint64_t seed) {
    return coalescence_time(params, empty, loaded, seed, horizon).value_or(horizon);
  });
  std::vector<double> censored(times.size()), scaled(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    censored[i] = times[i] >= horizon ? 1.0 : 0.0;
    scaled[i] = times[i] / log_n;
  }
  const EstimateWithError mean = across_replications(times);
  add(record, "coalescence_time", mean);
  add(record, "coalescence_over_log_n", across_replications(scaled));
  add(record, "censored_fraction", across_replications(censored));
  add(record, "default_burn_in", exact(default_burn_in(loaded), times.size()));
  add(record, "burn_in_margin", exact(default_burn_in(loaded) / mean.value, times.size()));
}

// ------------------------------------------------------------------ max queue

void max_queue_concentration(const CellContext& ctx, CellRecord& record) {
  const ModelParams params = ctx.point.params();
  const double burn_in = ctx.config.burn_in_for(ctx.point);
  const std::size_t samples = ctx.config.samples_for(ctx.point);
  const std::size_t R = ctx.seeds.size();

  const auto reports = per_replication<MaxQueueReport>(ctx, [&](std::uint64_t seed) {
    auto run = run_equilibrium(params, burn_in, ctx.config.spacing, samples, seed, true);
    return max_queue_stats(run.snapshots, params);
  });

  std::size_t extent = 1;
  for (const auto& rep : reports) extent = std::max(extent, rep.law.extent());
  std::vector<double> law(extent, 0.0), mass(R), mean_max(R);
  for (std::size_t i = 0; i < R; ++i) {
    double m = 0.0;
    for (std::size_t k = 0; k < reports[i].law.extent(); ++k) {
      law[k] += reports[i].law[k] / static_cast<double>(R);
      m += static_cast<double>(k) * reports[i].law[k];
    }
    mass[i] = reports[i].window_mass;
    mean_max[i] = m;
  }

  // Tail bound Pr(M >= j) <= n lambda^j per (j, replication) cell: a violation is an
  // exceedance frequency above the bound by more than three binomial sigmas.
  const std::size_t J = extent;  // j = 1..extent covers every observed maximum plus one
  const double S = static_cast<double>(samples);
  std::vector<double> exceed(J, 0.0), bound(J, 0.0);
  std::size_t violations = 0;
  for (std::size_t j = 1; j <= J; ++j) {
    const double b = std::min(1.0, static_cast<double>(params.n()) *
                                       std::pow(params.lambda(), static_cast<double>(j)));
    bound[j - 1] = b;
    for (const auto& rep : reports) {
      const double f = j - 1 < rep.exceedance.size() ? rep.exceedance[j - 1] : 0.0;
      exceed[j - 1] += f / static_cast<double>(R);
      if (f > b + 3.0 * std::sqrt(b * (1.0 - b) / S)) ++violations;
    }
  }

  add(record, "window_mass", across_replications(mass));
  add(record, "mean_max", across_replications(mean_max));
  if (reports.front().istar) {
    add(record, "istar", exact(*reports.front().istar, R));
    add(record, "window_low", exact(reports.front().window_low, R));
    add(record, "window_high", exact(reports.front().window_high, R));
  }
  add(record, "bound_violations", exact(static_cast<double>(violations), R));
  add(record, "bound_cells", exact(static_cast<double>(J * R), R));
  add_series(record, "max_law", std::move(law));
  add_series(record, "exceedance", std::move(exceed));
  add_series(record, "bound", std::move(bound));
}

// ------------------------------------------------------------------- variance

void variance_study(const CellContext& ctx, CellRecord& record) {
  const ModelParams params = ctx.point.params();
  const std::size_t n = params.n();
  const double dn = static_cast<double>(n);
  const double burn_in = ctx.config.burn_in_for(ctx.point);
  const std::size_t samples = ctx.config.samples_for(ctx.point);

  struct Rep {
    TailAverages averages;
    double snapshot_variance = 0.0;
  };
  const auto reps = per_replication<Rep>(ctx, [&](std::uint64_t seed) {
    const auto run = run_equilibrium(params, burn_in, ctx.config.spacing, samples, seed, false);
    Rep rep{tail_averages(run.occupation, n), 0.0};
    const auto& x = run.nonempty;
    if (x.size() > 1) {
      const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
      double ss = 0.0;
      for (double v : x) ss += (v - mean) * (v - mean);
      rep.snapshot_variance = ss / static_cast<double>(x.size() - 1);
    }
    return rep;
  });

  std::vector<TailAverages> averages;
  std::vector<double> var_time, var_snap, n_excess;
  const double base = std::pow(params.lambda(), static_cast<double>(params.d() + 1));
  for (const Rep& rep : reps) {
    averages.push_back(rep.averages);
    const double mean_count = dn * rep.averages.mean_u(1);
    var_time.push_back((rep.averages.mean_count_sq(1) - mean_count * mean_count) / dn);
    var_snap.push_back(rep.snapshot_variance / dn);
    n_excess.push_back(dn * (rep.averages.mean_u(2) - base));
  }
  const U2Excess excess = u2_excess(std::span<const TailAverages>(averages), params);
  add(record, "variance_nonempty_over_n", across_replications(var_time));
  add(record, "variance_nonempty_snapshots_over_n", across_replications(var_snap));
  add(record, "u2_excess", excess.excess);
  add(record, "u2_identity_gap", excess.identity_gap);
  add(record, "n_u2_excess", across_replications(n_excess));
}

// --------------------------------------------------------------------- oracle

void oracle_validation(const CellContext& ctx, CellRecord& record) {
  const ModelParams params = ctx.point.params();
  const std::size_t n = params.n();
  const std::size_t R = ctx.seeds.size();
  const double burn_in = ctx.config.burn_in_for(ctx.point);
  const std::size_t samples = ctx.config.samples_for(ctx.point);

  const unsigned cap = ctx.config.cap.value_or(default_cap(params));
  const TruncatedChain chain = build_chain(params, cap);
  const std::vector<double> pi = stationary(chain);
  const EmpiricalLaw marginal = exact_marginal(chain, pi);
  const TailAverages exact_avg = exact_tail_averages(chain, pi);
  double gen_residual = 0.0;
  for (std::size_t k = 1; k + 1 <= cap; ++k) {
    gen_residual = std::max(gen_residual, std::fabs(generator_residual(exact_avg, k, params.lambda())));
  }

  struct Rep {
    std::vector<std::uint64_t> histogram;
    std::vector<std::uint64_t> joint;  // (x0, x1) counts on a box of side `side`
    std::size_t side = 0;
  };
  const auto reps = per_replication<Rep>(ctx, [&](std::uint64_t seed) {
    auto run = run_equilibrium(params, burn_in, ctx.config.spacing, samples, seed, n >= 2);
    Rep rep{std::move(run.histogram), {}, 0};
    if (n >= 2) {
      for (const auto& x : run.snapshots) rep.side = std::max<std::size_t>(rep.side, std::max(x[0], x[1]) + 1);
      rep.joint.assign(rep.side * rep.side, 0);
      for (const auto& x : run.snapshots) ++rep.joint[x[0] * rep.side + x[1]];
    }
    return rep;
  });

  std::vector<std::uint64_t> pooled;
  for (const Rep& r : reps) accumulate(pooled, r.histogram);
  add(record, "tv_marginal", jackknife(R, [&](std::size_t drop) {
        const auto counts = drop < R ? minus(pooled, reps[drop].histogram) : pooled;
        return tv_distance(EmpiricalLaw::from_counts(counts), marginal);
      }));

  if (n >= 2) {
    const EmpiricalLaw joint_exact = exact_joint(chain, pi);
    std::size_t side = 1;
    for (const Rep& r : reps) side = std::max(side, r.side);
    std::vector<std::uint64_t> total(side * side, 0);
    auto widen = [&](const Rep& r, std::vector<std::uint64_t>& into, int sign) {
      for (std::size_t a = 0; a < r.side; ++a) {
        for (std::size_t b = 0; b < r.side; ++b) {
          const auto c = r.joint[a * r.side + b];
          if (sign > 0) into[a * side + b] += c; else into[a * side + b] -= c;
        }
      }
    };
    for (const Rep& r : reps) widen(r, total, +1);
    add(record, "tv_joint01", jackknife(R, [&](std::size_t drop) {
          std::vector<std::uint64_t> counts = total;
          if (drop < R) widen(reps[drop], counts, -1);
          return tv_distance(EmpiricalLaw::from_counts(2, side, counts), joint_exact);
        }));
  }

  std::vector<double> u1(R);
  for (std::size_t i = 0; i < R; ++i) {
    const auto& h = reps[i].histogram;
    const double total = static_cast<double>(std::accumulate(h.begin(), h.end(), std::uint64_t{0}));
    u1[i] = 1.0 - static_cast<double>(h[0]) / total;
  }
  add(record, "u_1_simulated", across_replications(u1));
  add(record, "u_1_exact", exact(1.0 - marginal[0], R));
  add(record, "oracle_generator_residual", exact(gen_residual, R));
  add(record, "oracle_stationary_residual", exact(stationary_residual(chain, pi), R));
  add(record, "oracle_cap", exact(cap, R));
  add(record, "oracle_states", exact(static_cast<double>(chain.state_count()), R));
  add_series(record, "exact_marginal",
             std::vector<double>(marginal.masses().begin(), marginal.masses().end()));
}

}  // namespace

void run_cell(const CellContext& ctx, CellRecord& record) {
  switch (ctx.config.scenario) {
    case Scenario::EquilibriumMarginal:
    case Scenario::MarginalScaling:
      return equilibrium_marginal(ctx, record);
    case Scenario::ChaosScaling:
      return chaos_scaling(ctx, record);
    case Scenario::NonequilibriumTracking:
      return nonequilibrium_tracking(ctx, record);
    case Scenario::MixingDiagnostic:
      return mixing_diagnostic(ctx, record);
    case Scenario::MaxQueueConcentration:
      return max_queue_concentration(ctx, record);
    case Scenario::VarianceStudy:
      return variance_study(ctx, record);
    case Scenario::OracleValidation:
      return oracle_validation(ctx, record);
  }
  throw std::logic_error("unhandled scenario");
}

void summarize(ResultSet& results) {
  auto slope_of = [&](const std::string& estimate, const std::string& name) {
    std::vector<double> x, y;
    for (const CellRecord& r : results.records) {
      if (!r.ok || !r.has_estimate(estimate)) continue;
      const double v = r.estimate(estimate).value;
      if (!(v > 0.0)) continue;
      x.push_back(std::log(static_cast<double>(r.point.n)));
      y.push_back(std::log(v));
    }
    if (x.size() >= 2) results.summary.emplace_back(name, ols_slope(x, y));
  };
  switch (results.config.scenario) {
    case Scenario::MarginalScaling:
      slope_of("sup_tail_deviation", "slope_sup_tail_deviation");
      slope_of("tv_time_average", "slope_tv_time_average");
      slope_of("tv_snapshots", "slope_tv_snapshots");
      break;
    case Scenario::ChaosScaling:
      slope_of("chaos_gap_raw", "slope_chaos_gap_raw");
      break;
    case Scenario::NonequilibriumTracking:
      slope_of("sup_tv_mean_field", "slope_sup_tv_mean_field");
      break;
    case Scenario::VarianceStudy:
      slope_of("u2_excess", "slope_u2_excess");
      break;
    default:
      break;
  }
}

}  // namespace supermarket::scenarios
