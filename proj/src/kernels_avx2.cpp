// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"

namespace supermarket::kernels::detail {
namespace {

inline __m256d int_pow4(__m256d x, unsigned d) {
  __m256d p = x;
  for (unsigned i = 1; i < d; ++i) p = _mm256_mul_pd(p, x);
  return p;
}

inline double int_pow(double x, unsigned d) {
  double p = x;
  for (unsigned i = 1; i < d; ++i) p *= x;
  return p;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs4(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

void tail_drift_avx2(const double* v, std::size_t size, double lambda, unsigned d, double* out) {
  if (size == 0) return;
  out[0] = 0.0;
  const __m256d lam = _mm256_set1_pd(lambda);
  std::size_t k = 1;
  // Vector body needs v[k+4] to exist, i.e. k + 4 < size.
  for (; k + 4 < size; k += 4) {
    const __m256d prev = _mm256_loadu_pd(v + k - 1);
    const __m256d cur = _mm256_loadu_pd(v + k);
    const __m256d next = _mm256_loadu_pd(v + k + 1);
    const __m256d arrivals = _mm256_mul_pd(lam, _mm256_sub_pd(int_pow4(prev, d), int_pow4(cur, d)));
    _mm256_storeu_pd(out + k, _mm256_sub_pd(arrivals, _mm256_sub_pd(cur, next)));
  }
  for (; k < size; ++k) {
    const double next = k + 1 < size ? v[k + 1] : 0.0;
    out[k] = lambda * (int_pow(v[k - 1], d) - int_pow(v[k], d)) - (v[k] - next);
  }
}

double abs_diff_sum_avx2(const double* a, const double* b, std::size_t size) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    acc = _mm256_add_pd(acc, abs4(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  }
  double s = hsum(acc);
  for (; i < size; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t size) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    acc = _mm256_max_pd(acc, abs4(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < size; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double weighted_sq_diff_sum_avx2(const double* a, const double* b, const double* w,
                                 std::size_t size) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(diff, diff)));
  }
  double s = hsum(acc);
  for (; i < size; ++i) {
    const double diff = a[i] - b[i];
    s += w[i] * (diff * diff);
  }
  return s;
}

std::uint64_t count_at_least_avx2(const std::uint32_t* x, std::size_t size, std::uint32_t k) {
  const __m256i threshold = _mm256_set1_epi32(static_cast<int>(k));
  std::uint64_t total = 0;
  std::size_t i = 0;
  // 32-bit lane counters are flushed before they can overflow.
  constexpr std::size_t kBlock = std::size_t{1} << 20;
  while (i + 8 <= size) {
    const std::size_t stop = std::min(size - (size - i) % 8, i + kBlock * 8);
    __m256i acc = _mm256_setzero_si256();
    for (; i < stop; i += 8) {
      const __m256i xs = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i));
      const __m256i ge = _mm256_cmpeq_epi32(_mm256_max_epu32(xs, threshold), xs);
      acc = _mm256_sub_epi32(acc, ge);
    }
    alignas(32) std::uint32_t lanes[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    for (std::uint32_t lane : lanes) total += lane;
  }
  for (; i < size; ++i) total += x[i] >= k ? 1u : 0u;
  return total;
}

std::uint32_t max_value_avx2(const std::uint32_t* x, std::size_t size) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 8 <= size; i += 8) {
    acc = _mm256_max_epu32(acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i)));
  }
  alignas(32) std::uint32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint32_t m = *std::max_element(lanes, lanes + 8);
  for (; i < size; ++i) m = std::max(m, x[i]);
  return m;
}

}  // namespace

const KernelTable kAvx2Table{
    "avx2",
    &tail_drift_avx2,
    &abs_diff_sum_avx2,
    &max_abs_diff_avx2,
    &weighted_sq_diff_sum_avx2,
    &count_at_least_avx2,
    &max_value_avx2,
};

}  // namespace supermarket::kernels::detail
