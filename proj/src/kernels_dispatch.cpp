#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace supermarket::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SUPERMARKET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  const KernelTable* best = avx2_table();
  if (best == nullptr) best = &scalar_table();
  if (const char* env = std::getenv("SUPERMARKET_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && avx2_table() != nullptr) return avx2_table();
  }
  return best;
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return detail::kScalarTable; }

const KernelTable* avx2_table() noexcept {
#if defined(SUPERMARKET_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_table() noexcept {
  return *active_slot().load(std::memory_order_relaxed);
}

bool select_table(std::string_view name) noexcept {
  if (name == "scalar") {
    active_slot().store(&scalar_table());
    return true;
  }
  if (name == "avx2" && avx2_table() != nullptr) {
    active_slot().store(avx2_table());
    return true;
  }
  return false;
}

namespace {

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

void tail_drift(std::span<const double> v, double lambda, unsigned d, std::span<double> out) {
  require_same_size(v.size(), out.size());
  active_table().tail_drift(v.data(), v.size(), lambda, d, out.data());
}

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  return active_table().abs_diff_sum(a.data(), b.data(), a.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  return active_table().max_abs_diff(a.data(), b.data(), a.size());
}

double weighted_sq_diff_sum(std::span<const double> a, std::span<const double> b,
                            std::span<const double> w) {
  require_same_size(a.size(), b.size());
  require_same_size(a.size(), w.size());
  return active_table().weighted_sq_diff_sum(a.data(), b.data(), w.data(), a.size());
}

std::uint64_t count_at_least(std::span<const std::uint32_t> x, std::uint32_t k) {
  return active_table().count_at_least(x.data(), x.size(), k);
}

std::uint32_t max_value(std::span<const std::uint32_t> x) {
  return active_table().max_value(x.data(), x.size());
}

}  // namespace supermarket::kernels
