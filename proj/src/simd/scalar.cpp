#include "qgpr/simd/kernels.hpp"

#include <bit>
#include <cmath>

namespace qgpr::simd {
namespace {

double sq_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void hadamard(cplx* amp, std::size_t n, std::size_t stride) {
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cplx a = amp[i];
            const cplx b = amp[i + stride];
            amp[i] = (a + b) * r;
            amp[i + stride] = (a - b) * r;
        }
    }
}

void rotate_y(cplx* amp, std::size_t n, std::size_t stride, double c, double s) {
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cplx a = amp[i];
            const cplx b = amp[i + stride];
            amp[i] = c * a - s * b;
            amp[i + stride] = s * a + c * b;
        }
    }
}

void parity_phase(cplx* amp, std::size_t n, std::uint64_t mask, double c, double s) {
    const cplx even(c, -s);
    const cplx odd(c, s);
    for (std::size_t i = 0; i < n; ++i) {
        amp[i] *= (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1U) ? odd : even;
    }
}

cplx inner(const cplx* a, const cplx* b, std::size_t n) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

double norm2(const cplx* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::norm(a[i]);
    return s;
}

}  // namespace

namespace detail {
const Kernels scalar_table{Isa::Scalar, sq_distance, dot,   hadamard,
                           rotate_y,    parity_phase, inner, norm2};
}

}  // namespace qgpr::simd
