// Compiled with -mavx2 -mfma; only reached when the CPU reports both.
#include "qgpr/simd/kernels.hpp"

#include <immintrin.h>

#include <bit>
#include <cmath>

namespace qgpr::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double* dptr(cplx* p) { return reinterpret_cast<double*>(p); }
inline const double* dptr(const cplx* p) { return reinterpret_cast<const double*>(p); }

double sq_distance(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void hadamard(cplx* amp, std::size_t n, std::size_t stride) {
    const __m256d r = _mm256_set1_pd(1.0 / std::sqrt(2.0));
    double* p = dptr(amp);
    if (stride == 1) {
        // Pair (a, b) sits in one register as [a.re a.im b.re b.im].
        const __m256d sgn = _mm256_set_pd(-1.0, -1.0, 1.0, 1.0);
        for (std::size_t i = 0; i < n; i += 2) {
            const __m256d v = _mm256_loadu_pd(p + 2 * i);
            const __m256d w = _mm256_permute2f128_pd(v, v, 0x01);
            _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(_mm256_fmadd_pd(v, sgn, w), r));
        }
        return;
    }
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; i += 2) {
            const __m256d lo = _mm256_loadu_pd(p + 2 * i);
            const __m256d hi = _mm256_loadu_pd(p + 2 * (i + stride));
            _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(_mm256_add_pd(lo, hi), r));
            _mm256_storeu_pd(p + 2 * (i + stride), _mm256_mul_pd(_mm256_sub_pd(lo, hi), r));
        }
    }
}

void rotate_y(cplx* amp, std::size_t n, std::size_t stride, double c, double s) {
    double* p = dptr(amp);
    const __m256d vc = _mm256_set1_pd(c);
    if (stride == 1) {
        const __m256d vs = _mm256_set_pd(s, s, -s, -s);
        for (std::size_t i = 0; i < n; i += 2) {
            const __m256d v = _mm256_loadu_pd(p + 2 * i);
            const __m256d w = _mm256_permute2f128_pd(v, v, 0x01);
            _mm256_storeu_pd(p + 2 * i, _mm256_fmadd_pd(w, vs, _mm256_mul_pd(v, vc)));
        }
        return;
    }
    const __m256d vs = _mm256_set1_pd(s);
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; i += 2) {
            const __m256d lo = _mm256_loadu_pd(p + 2 * i);
            const __m256d hi = _mm256_loadu_pd(p + 2 * (i + stride));
            _mm256_storeu_pd(p + 2 * i, _mm256_fnmadd_pd(vs, hi, _mm256_mul_pd(vc, lo)));
            _mm256_storeu_pd(p + 2 * (i + stride), _mm256_fmadd_pd(vs, lo, _mm256_mul_pd(vc, hi)));
        }
    }
}

void parity_phase(cplx* amp, std::size_t n, std::uint64_t mask, double c, double s) {
    double* p = dptr(amp);
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const double t0 = (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1U) ? -s : s;
        const double t1 = (std::popcount(static_cast<std::uint64_t>(i + 1) & mask) & 1U) ? -s : s;
        const __m256d v = _mm256_loadu_pd(p + 2 * i);
        const __m256d sw = _mm256_permute_pd(v, 0b0101);
        const __m256d vt = _mm256_set_pd(-t1, t1, -t0, t0);
        _mm256_storeu_pd(p + 2 * i, _mm256_fmadd_pd(sw, vt, _mm256_mul_pd(v, vc)));
    }
    for (; i < n; ++i) {
        const bool odd = std::popcount(static_cast<std::uint64_t>(i) & mask) & 1U;
        amp[i] *= cplx(c, odd ? s : -s);
    }
}

cplx inner(const cplx* a, const cplx* b, std::size_t n) {
    const double* pa = dptr(a);
    const double* pb = dptr(b);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        acc_re = _mm256_fmadd_pd(va, vb, acc_re);
        acc_im = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), acc_im);
    }
    double re = hsum(acc_re);
    alignas(32) double t[4];
    _mm256_store_pd(t, acc_im);
    double im = (t[0] + t[2]) - (t[1] + t[3]);
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

double norm2(const cplx* a, std::size_t n) {
    const double* pa = dptr(a);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(pa + 2 * i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::norm(a[i]);
    return s;
}

}  // namespace

namespace detail {
const Kernels avx2_table{Isa::Avx2, sq_distance, dot,   hadamard,
                         rotate_y,  parity_phase, inner, norm2};
}

}  // namespace qgpr::simd
