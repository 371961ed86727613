#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64 builds, an AVX2 version; the active table is picked once at
// startup from CPU features and can be pinned with SUPERMARKET_SIMD=scalar
// (or =avx2). Elementwise kernels are bit-identical across variants;
// reductions agree up to floating-point reassociation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace supermarket::kernels {

struct KernelTable {
  const char* name;

  // out[k] = lambda * (v[k-1]^d - v[k]^d) - (v[k] - v[k+1]) for k = 1..K,
  // with v[K+1] := 0 and out[0] = 0. v and out both hold K+1 entries.
  void (*tail_drift)(const double* v, std::size_t size, double lambda, unsigned d, double* out);

  double (*abs_diff_sum)(const double* a, const double* b, std::size_t size);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t size);
  // sum_i w[i] * (a[i] - b[i])^2
  double (*weighted_sq_diff_sum)(const double* a, const double* b, const double* w,
                                 std::size_t size);

  std::uint64_t (*count_at_least)(const std::uint32_t* x, std::size_t size, std::uint32_t k);
  std::uint32_t (*max_value)(const std::uint32_t* x, std::size_t size);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the build has no AVX2 variant or the CPU lacks AVX2.
const KernelTable* avx2_table() noexcept;
/// Table used by the library entry points below.
const KernelTable& active_table() noexcept;
/// Force a variant by name ("scalar", "avx2"); returns false if unavailable.
bool select_table(std::string_view name) noexcept;

void tail_drift(std::span<const double> v, double lambda, unsigned d, std::span<double> out);
double abs_diff_sum(std::span<const double> a, std::span<const double> b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double weighted_sq_diff_sum(std::span<const double> a, std::span<const double> b,
                            std::span<const double> w);
std::uint64_t count_at_least(std::span<const std::uint32_t> x, std::uint32_t k);
std::uint32_t max_value(std::span<const std::uint32_t> x);

}  // namespace supermarket::kernels
