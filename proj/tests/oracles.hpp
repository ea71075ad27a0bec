#pragma once

// Independent reference computations used by the tests: dense linear algebra,
// dense gate matrices built from Pauli generators, and small RNG helpers.

#include "qgpr/types.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline qgpr::PointMatrix random_points(std::mt19937_64& rng, int n, int d, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> U(lo, hi);
    qgpr::PointMatrix X(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) X(i, k) = U(rng);
    return X;
}

inline qgpr::Vector random_vector(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> U(lo, hi);
    qgpr::Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = U(rng);
    return v;
}

/// -1/2 y^T K^{-1} y - 1/2 log det K - n/2 log 2 pi through a dense inverse and LU determinant.
inline double dense_log_likelihood(const qgpr::Matrix& K, const qgpr::Vector& y) {
    const qgpr::Matrix Kinv = K.inverse();
    const double logdet = std::log(K.determinant());
    return -0.5 * y.dot(Kinv * y) - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

// Single-qubit matrices in the {|0>, |1>} basis.
inline CMatrix pauli_y() {
    CMatrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}
inline CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
inline CMatrix hadamard() {
    CMatrix m(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
}

/// Embeds single-qubit operators into the 2^m space; qubit q is bit q of the index,
/// so it sits at position (m - 1 - q) of the Kronecker chain.
inline CMatrix embed(int m, const std::vector<std::pair<int, CMatrix>>& ops) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (int pos = m - 1; pos >= 0; --pos) {
        CMatrix f = CMatrix::Identity(2, 2);
        for (const auto& [q, op] : ops)
            if (q == pos) f = op;
        CMatrix next = Eigen::kroneckerProduct(out, f).eval();
        out = next;
    }
    return out;
}

/// exp(-i phi/2 G) by the general matrix exponential.
inline CMatrix rotation(const CMatrix& G, double phi) {
    CMatrix A = cplx(0, -phi / 2.0) * G;
    return A.exp();
}

inline CMatrix dense_ry(int m, int q, double phi) { return rotation(embed(m, {{q, pauli_y()}}), phi); }
inline CMatrix dense_rz(int m, int q, double phi) { return rotation(embed(m, {{q, pauli_z()}}), phi); }
inline CMatrix dense_rzz(int m, int i, int j, double phi) {
    return rotation(embed(m, {{i, pauli_z()}, {j, pauli_z()}}), phi);
}
inline CMatrix dense_h(int m, int q) { return embed(m, {{q, hadamard()}}); }

inline CVector zero_state(int m) {
    CVector v = CVector::Zero(std::size_t{1} << m);
    v[0] = 1.0;
    return v;
}

}  // namespace oracle
