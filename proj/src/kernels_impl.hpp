#pragma once

#include "supermarket/kernels.hpp"

namespace supermarket::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(SUPERMARKET_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace supermarket::kernels::detail
