#pragma once

// Data-parallel inner loops shared by the kernel and statevector code.
// Every primitive has a scalar reference implementation and, where the
// CPU supports it, an AVX2/FMA variant. The active table is chosen once at
// startup (override with QGPR_SIMD=scalar|avx2) and both tables are
// equivalence-tested against each other.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace qgpr::simd {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

struct Kernels {
    Isa isa;
    double (*sq_distance)(const double* a, const double* b, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);

    // Statevector updates on `n` amplitudes; `stride` = 1 << target qubit.
    void (*hadamard)(cplx* amp, std::size_t n, std::size_t stride);
    void (*rotate_y)(cplx* amp, std::size_t n, std::size_t stride, double c, double s);
    /// amp[i] *= c - i*s when popcount(i & mask) is even, c + i*s when odd.
    void (*parity_phase)(cplx* amp, std::size_t n, std::uint64_t mask, double c, double s);

    /// sum_i conj(a[i]) * b[i]
    cplx (*inner)(const cplx* a, const cplx* b, std::size_t n);
    double (*norm2)(const cplx* a, std::size_t n);
};

bool supported(Isa isa);
const Kernels& table(Isa isa);

/// Table in use by the library. Defaults to the widest supported ISA.
const Kernels& active();
void set_active(Isa isa);

std::string_view name(Isa isa);

namespace detail {
extern const Kernels scalar_table;
#if defined(QGPR_HAVE_AVX2)
extern const Kernels avx2_table;
#endif
}  // namespace detail

}  // namespace qgpr::simd
