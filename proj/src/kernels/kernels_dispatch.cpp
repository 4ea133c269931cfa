#include "kernels_impl.hpp"

#include <cstdlib>
#include <string_view>

namespace splitflow::kernels {

const KernelTable* avx2_table() {
#if defined(SPLITFLOW_HAVE_AVX2)
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    if (supported) return &detail::avx2_table_unchecked();
#endif
    return nullptr;
}

const KernelTable& active() {
    static const KernelTable& table = []() -> const KernelTable& {
        const char* env = std::getenv("SPLITFLOW_KERNELS");
        const std::string_view request = env ? env : "";
        if (request == "scalar") return scalar_table();
        if (const KernelTable* fast = avx2_table()) return *fast;
        return scalar_table();
    }();
    return table;
}

}  // namespace splitflow::kernels
