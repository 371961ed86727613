#include "supermarket/meanfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "supermarket/kernels.hpp"

namespace supermarket {

void OdeConfig::validate() const {
  if (truncation < 1) throw ValidationError("truncation", "K must be at least 1");
  if (!(step_tol > 0.0)) throw ValidationError("step_tol", "must be positive");
  if (!(max_step > 0.0)) throw ValidationError("max_step", "must be positive");
}

std::uint64_t tail_exponent(unsigned d, std::size_t k) noexcept {
  if (d == 1) return k;
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (e > (kMax - 1) / d) return kMax;
    e = e * d + 1;
  }
  return e;
}

TailVector limit_law(double lambda, unsigned d, std::size_t K) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda", "must lie in (0, 1)");
  if (d < 1) throw ValidationError("d", "must be at least 1");
  const double log_lambda = std::log(lambda);
  std::vector<double> v(K + 1, 0.0);
  for (std::size_t k = 0; k <= K; ++k) {
    const std::uint64_t e = tail_exponent(d, k);
    if (e == std::numeric_limits<std::uint64_t>::max()) break;
    v[k] = std::exp(static_cast<double>(e) * log_lambda);
    if (v[k] == 0.0) break;
  }
  return make_tail_unchecked(std::move(v));
}

std::size_t default_truncation(double lambda, unsigned d) {
  const double log_lambda = std::log(lambda);
  const double target = std::log(1e-16);
  std::size_t K = 0;
  while (static_cast<double>(tail_exponent(d, K)) * log_lambda >= target) ++K;
  return std::max<std::size_t>(K, 30);
}

OdeConfig default_ode_config(const ModelParams& params, const TailVector& v0) {
  OdeConfig cfg;
  std::size_t support = 0;
  for (std::size_t k = 0; k <= v0.truncation(); ++k) {
    if (v0[k] > 0.0) support = k;
  }
  cfg.truncation = std::max(default_truncation(params.lambda(), params.d()), support + 30);
  return cfg;
}

std::vector<double> drift(const TailVector& v, const ModelParams& params) {
  std::vector<double> out(v.values().size());
  kernels::tail_drift(v.values(), params.lambda(), params.d(), out);
  return out;
}

double fixed_point_residual(const TailVector& v, const ModelParams& params) {
  const auto a = drift(v, params);
  const std::vector<double> zero(a.size(), 0.0);
  return kernels::max_abs_diff(a, zero);
}

unsigned istar(std::size_t n, double lambda, unsigned d) {
  if (d < 2) throw ValidationError("d", "i* is defined for d >= 2");
  if (n < 2) throw ValidationError("n", "i* is defined for n >= 2");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda", "must lie in (0, 1)");
  const double ln_n = std::log(static_cast<double>(n));
  const double log_threshold = -0.5 * ln_n + 2.0 * std::log(ln_n);
  const double log_lambda = std::log(lambda);
  for (unsigned i = 1;; ++i) {
    if (static_cast<double>(tail_exponent(d, i)) * log_lambda < log_threshold) return i;
  }
}

EmpiricalLaw tail_to_law(const TailVector& v) {
  const std::size_t K = v.truncation();
  std::vector<double> p(K + 1);
  for (std::size_t k = 0; k < K; ++k) p[k] = v[k] - v[k + 1];
  p[K] = v[K];
  return EmpiricalLaw(1, K + 1, std::move(p));
}

double weighted_tail_distance(const TailVector& v, double lambda, unsigned d, double theta,
                              std::size_t K_min) {
  if (!(theta > 1.0)) throw ValidationError("theta", "must exceed 1");
  const std::size_t K = std::max(v.truncation(), K_min);
  const TailVector limit = limit_law(lambda, d, K);
  const TailVector padded = v.resized(K);
  std::vector<double> weights(K);
  double w = 1.0;
  for (std::size_t k = 0; k < K; ++k) {
    w *= theta;
    weights[k] = w;
  }
  const double s2 = kernels::weighted_sq_diff_sum(padded.values().subspan(1),
                                                  limit.values().subspan(1), weights);
  return std::sqrt(s2);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class DormandPrince {
 public:
  DormandPrince(const ModelParams& params, const OdeConfig& cfg)
      : lambda_(params.lambda()), d_(params.d()), cfg_(cfg), size_(cfg.truncation + 1) {
    for (auto& k : k_) k.resize(size_);
    tmp_.resize(size_);
    next_.resize(size_);
  }

  // Advances y from t0 to t1 in place.
  void advance(std::vector<double>& y, double t0, double t1) {
    double t = t0;
    if (h_ <= 0.0) h_ = std::min(cfg_.max_step, 0.01);
    rhs(y, k_[0]);
    while (t < t1) {
      double h = std::min({h_, cfg_.max_step, t1 - t});
      const double floor = 1e-14 * std::max(1.0, std::fabs(t));
      if (h < floor) {
        if (t1 - t <= floor) break;
        throw IntegrationError("step size underflow at t = " + std::to_string(t));
      }
      const double err = trial(y, h);
      const bool keeps_positive = clamp(next_);
      if (err <= 1.0 && keeps_positive) {
        t = (h == t1 - t) ? t1 : t + h;
        y.swap(next_);
        // First-same-as-last: the last stage is the derivative at the new point,
        // but clamping may have moved y, so recompute.
        rhs(y, k_[0]);
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h_ = h * std::clamp(grow, 0.2, 5.0);
      } else {
        const double shrink = err > 0.0 ? 0.9 * std::pow(err, -0.25) : 0.5;
        h_ = h * std::clamp(shrink, 0.1, 0.5);
      }
    }
  }

 private:
  void rhs(const std::vector<double>& y, std::vector<double>& out) const {
    kernels::tail_drift(y, lambda_, d_, out);
  }

  // Computes the 5th-order candidate into next_ and returns the scaled error.
  double trial(const std::vector<double>& y, double h) {
    auto stage = [&](std::vector<double>& out, auto&& combine) {
      for (std::size_t i = 0; i < size_; ++i) tmp_[i] = y[i] + h * combine(i);
      tmp_[0] = 1.0;
      rhs(tmp_, out);
    };
    stage(k_[1], [&](std::size_t i) { return a21 * k_[0][i]; });
    stage(k_[2], [&](std::size_t i) { return a31 * k_[0][i] + a32 * k_[1][i]; });
    stage(k_[3], [&](std::size_t i) { return a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]; });
    stage(k_[4], [&](std::size_t i) {
      return a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] + a54 * k_[3][i];
    });
    stage(k_[5], [&](std::size_t i) {
      return a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] + a64 * k_[3][i] + a65 * k_[4][i];
    });
    for (std::size_t i = 0; i < size_; ++i) {
      next_[i] = y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] +
                             b6 * k_[5][i]);
    }
    next_[0] = 1.0;
    rhs(next_, k_[6]);
    double err = 0.0;
    for (std::size_t i = 0; i < size_; ++i) {
      const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                            e6 * k_[5][i] + e7 * k_[6][i]);
      err = std::max(err, std::fabs(e));
    }
    return err / cfg_.step_tol;
  }

  // Clamps into [0, 1] and restores monotonicity; false when a value fell
  // further below zero than the tolerance allows.
  bool clamp(std::vector<double>& y) const {
    y[0] = 1.0;
    for (std::size_t i = 1; i < size_; ++i) {
      if (y[i] < -cfg_.step_tol) return false;
      y[i] = std::clamp(y[i], 0.0, y[i - 1]);
    }
    return true;
  }

  double lambda_;
  unsigned d_;
  OdeConfig cfg_;
  std::size_t size_;
  double h_ = 0.0;
  std::array<std::vector<double>, 7> k_;
  std::vector<double> tmp_;
  std::vector<double> next_;
};

}  // namespace

std::vector<TailVector> integrate_trajectory(const TailVector& v0, std::span<const double> times,
                                             const ModelParams& params, const OdeConfig& cfg) {
  cfg.validate();
  const TailVector start = v0.resized(cfg.truncation);
  std::vector<double> y(start.values().begin(), start.values().end());
  DormandPrince solver(params, cfg);
  std::vector<TailVector> out;
  out.reserve(times.size());
  double t = 0.0;
  for (double target : times) {
    if (!(target >= t)) throw ValidationError("t", "output times must be non-decreasing and >= 0");
    if (target > t) solver.advance(y, t, target);
    t = target;
    out.push_back(make_tail_unchecked(y));
  }
  return out;
}

TailVector integrate(const TailVector& v0, double t, const ModelParams& params,
                     const OdeConfig& cfg) {
  if (!(t >= 0.0)) throw ValidationError("t", "must be non-negative");
  if (t == 0.0) return v0;
  const double times[] = {t};
  return integrate_trajectory(v0, times, params, cfg).front();
}

void write_trajectory_csv(std::ostream& out, std::span<const double> times,
                          std::span<const TailVector> trajectory) {
  const std::size_t K = trajectory.empty() ? 0 : trajectory.front().truncation();
  out << 't';
  for (std::size_t k = 1; k <= K; ++k) out << ",v" << k;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    out << times[i];
    for (std::size_t k = 1; k <= K; ++k) out << ',' << trajectory[i][k];
    out << '\n';
  }
}

}  // namespace supermarket
