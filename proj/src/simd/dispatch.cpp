#include "qgpr/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace qgpr::simd {
namespace {

Isa detect() {
    Isa best = supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
    if (const char* env = std::getenv("QGPR_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return Isa::Scalar;
        if (want == "avx2" && supported(Isa::Avx2)) return Isa::Avx2;
    }
    return best;
}

std::atomic<const Kernels*>& slot() {
    static std::atomic<const Kernels*> current{&table(detect())};
    return current;
}

}  // namespace

bool supported(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(QGPR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const Kernels& table(Isa isa) {
#if defined(QGPR_HAVE_AVX2)
    if (isa == Isa::Avx2) {
        if (!supported(Isa::Avx2)) throw std::runtime_error("AVX2 not supported on this CPU");
        return detail::avx2_table;
    }
#else
    if (isa == Isa::Avx2) throw std::runtime_error("built without AVX2 support");
#endif
    return detail::scalar_table;
}

const Kernels& active() { return *slot().load(std::memory_order_relaxed); }

void set_active(Isa isa) { slot().store(&table(isa), std::memory_order_relaxed); }

std::string_view name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

}  // namespace qgpr::simd
