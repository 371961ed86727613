#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"

namespace supermarket::kernels::detail {
namespace {

inline double int_pow(double x, unsigned d) {
  double p = x;
  for (unsigned i = 1; i < d; ++i) p *= x;
  return p;
}

void tail_drift_scalar(const double* v, std::size_t size, double lambda, unsigned d, double* out) {
  if (size == 0) return;
  out[0] = 0.0;
  double prev_pow = int_pow(v[0], d);
  for (std::size_t k = 1; k < size; ++k) {
    const double cur_pow = int_pow(v[k], d);
    const double next = k + 1 < size ? v[k + 1] : 0.0;
    out[k] = lambda * (prev_pow - cur_pow) - (v[k] - next);
    prev_pow = cur_pow;
  }
}

double abs_diff_sum_scalar(const double* a, const double* b, std::size_t size) {
  double s = 0.0;
  for (std::size_t i = 0; i < size; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t size) {
  double m = 0.0;
  for (std::size_t i = 0; i < size; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double weighted_sq_diff_sum_scalar(const double* a, const double* b, const double* w,
                                   std::size_t size) {
  double s = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double diff = a[i] - b[i];
    s += w[i] * (diff * diff);
  }
  return s;
}

std::uint64_t count_at_least_scalar(const std::uint32_t* x, std::size_t size, std::uint32_t k) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < size; ++i) c += x[i] >= k ? 1u : 0u;
  return c;
}

std::uint32_t max_value_scalar(const std::uint32_t* x, std::size_t size) {
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < size; ++i) m = std::max(m, x[i]);
  return m;
}

}  // namespace

const KernelTable kScalarTable{
    "scalar",
    &tail_drift_scalar,
    &abs_diff_sum_scalar,
    &max_abs_diff_scalar,
    &weighted_sq_diff_sum_scalar,
    &count_at_least_scalar,
    &max_value_scalar,
};

}  // namespace supermarket::kernels::detail
