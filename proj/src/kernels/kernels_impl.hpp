#pragma once

#include "splitflow/kernels.hpp"

namespace splitflow::kernels::detail {

// Defined in kernels_avx2.cpp, which is only built on x86-64.
const KernelTable& avx2_table_unchecked();

}  // namespace splitflow::kernels::detail
