#include "qgpr/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qgpr {

Matrix KernelFn::gram(const PointMatrix& X, const ParamVector& params) const {
    const Eigen::Index n = X.rows();
    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) K(i, j) = eval(row(X, i), row(X, j), params);
    }
    return K;
}

Matrix KernelFn::cross(const PointMatrix& Xq, const PointMatrix& X, const ParamVector& params) const {
    Matrix K(Xq.rows(), X.rows());
    for (Eigen::Index i = 0; i < Xq.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.rows(); ++j) K(i, j) = eval(row(Xq, i), row(X, j), params);
    }
    return K;
}

Matrix build_kernel_matrix(const KernelFn& kernel, const ParamVector& params, const PointMatrix& X) {
    if (X.rows() < 1) throw std::invalid_argument("build_kernel_matrix: empty input set");
    if (!X.allFinite()) throw std::invalid_argument("build_kernel_matrix: non-finite input");
    Matrix K = kernel.gram(X, params);
    const Eigen::Index n = X.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            if (!std::isfinite(K(i, j))) {
                std::ostringstream msg;
                msg << "kernel value at (" << i << ", " << j << ") is not finite for "
                    << kernel.describe(params);
                throw EvaluationError(i, j, msg.str());
            }
            K(j, i) = K(i, j);
        }
    }
    return K;
}

Factorization factorize(const Matrix& K, const GPOptions& opts) {
    if (opts.sigma_n < 0.0 || opts.jitter < 0.0)
        throw std::invalid_argument("factorize: sigma_n and jitter must be non-negative");
    const Eigen::Index n = K.rows();
    const double noise = opts.sigma_n * opts.sigma_n;
    double jitter = opts.jitter;
    while (true) {
        Matrix A = K;
        A.diagonal().array() += noise + jitter;
        Eigen::LLT<Matrix> llt(A);
        if (llt.info() == Eigen::Success) {
            Matrix L = llt.matrixL();
            if (L.diagonal().allFinite() && (L.diagonal().array() > 0.0).all()) return {std::move(L), jitter};
        }
        if (jitter >= opts.jitter_cap) break;
        jitter = jitter > 0.0 ? std::min(jitter * 10.0, opts.jitter_cap) : std::min(1e-10, opts.jitter_cap);
        if (n == 0) break;
    }
    Matrix A = K;
    A.diagonal().array() += noise + jitter;
    const double min_eig = A.allFinite()
                               ? Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly).eigenvalues().minCoeff()
                               : std::numeric_limits<double>::quiet_NaN();
    std::ostringstream msg;
    msg << "kernel matrix not positive definite at jitter " << jitter << " (min eigenvalue " << min_eig << ")";
    throw NotPositiveDefinite(min_eig, jitter, msg.str());
}

namespace {

Vector solve_cholesky(const Matrix& L, const Vector& y) {
    Vector alpha = L.triangularView<Eigen::Lower>().solve(y);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha);
    return alpha;
}

double log_likelihood_from(const Matrix& L, const Vector& y, const Vector& alpha) {
    const double n = static_cast<double>(y.size());
    const double logdet_half = L.diagonal().array().log().sum();
    return -0.5 * y.dot(alpha) - logdet_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace

double log_marginal_likelihood(const Matrix& K, const Vector& y, const GPOptions& opts) {
    if (K.rows() != y.size()) throw std::invalid_argument("log_marginal_likelihood: size mismatch");
    const Factorization f = factorize(K, opts);
    return log_likelihood_from(f.lower, y, solve_cholesky(f.lower, y));
}

double log_marginal_likelihood(const KernelFn& kernel, const ParamVector& params, const PointMatrix& X,
                               const Vector& y, const GPOptions& opts) {
    return log_marginal_likelihood(build_kernel_matrix(kernel, params, X), y, opts);
}

TrainedGP::TrainedGP(std::shared_ptr<const KernelFn> kernel, ParamVector params, PointMatrix X, Vector y,
                     Factorization factor, Vector alpha, double log_likelihood)
    : kernel_(std::move(kernel)),
      params_(std::move(params)),
      X_(std::move(X)),
      y_(std::move(y)),
      factor_(std::move(factor)),
      alpha_(std::move(alpha)),
      log_likelihood_(log_likelihood) {}

Vector TrainedGP::predict(const PointMatrix& Xq) const {
    if (Xq.rows() < 1) throw std::invalid_argument("predict: no query points");
    if (Xq.cols() != X_.cols())
        throw std::invalid_argument("predict: query dimension " + std::to_string(Xq.cols()) +
                                    " does not match training dimension " + std::to_string(X_.cols()));
    return kernel_->cross(Xq, X_, params_) * alpha_;
}

TrainedGP fit(std::shared_ptr<const KernelFn> kernel, ParamVector params, PointMatrix X, Vector y,
              const GPOptions& opts) {
    if (!kernel) throw std::invalid_argument("fit: null kernel");
    if (X.rows() != y.size()) throw std::invalid_argument("fit: X and y sizes differ");
    if (!y.allFinite()) throw std::invalid_argument("fit: non-finite target");
    const Matrix K = build_kernel_matrix(*kernel, params, X);
    Factorization f = factorize(K, opts);
    Vector alpha = solve_cholesky(f.lower, y);
    const double logl = log_likelihood_from(f.lower, y, alpha);
    return TrainedGP(std::move(kernel), std::move(params), std::move(X), std::move(y), std::move(f),
                     std::move(alpha), logl);
}

double surrogate_objective(double log_likelihood, double d) {
    if (!(d > 0.0)) throw std::invalid_argument("surrogate_objective: d must be positive");
    if (std::isnan(log_likelihood)) return log_likelihood;
    const double log_d = std::log(d);
    if (log_likelihood == -std::numeric_limits<double>::infinity()) return log_d;
    const double hi = std::max(log_likelihood, log_d);
    const double lo = std::min(log_likelihood, log_d);
    return hi + std::log1p(std::exp(lo - hi));
}

double bic(double log_likelihood, std::size_t M, std::size_t N) {
    if (N < 1) throw std::invalid_argument("bic: N must be >= 1");
    return log_likelihood - 0.5 * static_cast<double>(M) * std::log(static_cast<double>(N));
}

double beta(double log_objective, std::size_t M, std::size_t N) { return bic(log_objective, M, N); }

double rmse(std::span<const double> predictions, std::span<const double> truth) {
    if (predictions.empty() || predictions.size() != truth.size())
        throw std::invalid_argument("rmse: vectors must be non-empty and of equal length");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - predictions[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(truth.size()));
}

ModelScore score_model(double log_likelihood, std::size_t M, std::size_t N, double d) {
    ModelScore s;
    s.logL = log_likelihood;
    s.logO = surrogate_objective(log_likelihood, d);
    s.bic = bic(s.logL, M, N);
    s.beta = beta(s.logO, M, N);
    s.M = M;
    s.N = N;
    return s;
}

}  // namespace qgpr
