#pragma once

#include "qgpr/types.hpp"

#include <memory>
#include <span>
#include <string>

namespace qgpr {

/// Covariance function k(x, x') with trainable parameters.
///
/// `gram` and `cross` default to pairwise `eval`; families that can share work
/// across pairs (cached statevectors, precomputed distances) override them.
class KernelFn {
public:
    virtual ~KernelFn() = default;

    virtual double eval(std::span<const double> x, std::span<const double> xp,
                        const ParamVector& params) const = 0;
    virtual std::size_t param_count() const = 0;
    virtual std::string describe(const ParamVector& params) const = 0;

    /// Upper triangle is authoritative; callers mirror it.
    virtual Matrix gram(const PointMatrix& X, const ParamVector& params) const;
    /// Q x N matrix of k(xq_i, x_j).
    virtual Matrix cross(const PointMatrix& Xq, const PointMatrix& X,
                         const ParamVector& params) const;
};

struct GPOptions {
    double sigma_n = 0.0;
    double jitter = 1e-10;
    double jitter_cap = 1e-4;
};

/// Lower Cholesky factor of K + sigma_n^2 I + jitter I, with the jitter that succeeded.
struct Factorization {
    Matrix lower;
    double jitter = 0.0;
};

/// Kernel matrix with exact symmetry; non-finite entries raise EvaluationError.
Matrix build_kernel_matrix(const KernelFn& kernel, const ParamVector& params, const PointMatrix& X);

/// Factorizes K + sigma_n^2 I, escalating jitter x10 on failure up to the cap.
Factorization factorize(const Matrix& K, const GPOptions& opts);

/// Log marginal likelihood of y given an already assembled kernel matrix.
double log_marginal_likelihood(const Matrix& K, const Vector& y, const GPOptions& opts);

double log_marginal_likelihood(const KernelFn& kernel, const ParamVector& params,
                               const PointMatrix& X, const Vector& y, const GPOptions& opts);

/// Immutable fitted model; safe for concurrent `predict`.
class TrainedGP {
public:
    TrainedGP(std::shared_ptr<const KernelFn> kernel, ParamVector params, PointMatrix X, Vector y,
              Factorization factor, Vector alpha, double log_likelihood);

    Vector predict(const PointMatrix& Xq) const;

    const KernelFn& kernel() const { return *kernel_; }
    const ParamVector& params() const { return params_; }
    const PointMatrix& inputs() const { return X_; }
    const Vector& targets() const { return y_; }
    const Matrix& factor() const { return factor_.lower; }
    const Vector& alpha() const { return alpha_; }
    double jitter() const { return factor_.jitter; }
    double log_likelihood() const { return log_likelihood_; }

private:
    std::shared_ptr<const KernelFn> kernel_;
    ParamVector params_;
    PointMatrix X_;
    Vector y_;
    Factorization factor_;
    Vector alpha_;
    double log_likelihood_;
};

TrainedGP fit(std::shared_ptr<const KernelFn> kernel, ParamVector params, PointMatrix X, Vector y,
              const GPOptions& opts = {});

inline Vector predict(const TrainedGP& gp, const PointMatrix& Xq) { return gp.predict(Xq); }

/// log(exp(logL) + d), evaluated without overflow or underflow of exp(logL).
double surrogate_objective(double log_likelihood, double d = 1.0);

/// score - M/2 log N; shared by BIC (on logL) and beta (on logO).
double bic(double log_likelihood, std::size_t M, std::size_t N);
double beta(double log_objective, std::size_t M, std::size_t N);

double rmse(std::span<const double> predictions, std::span<const double> truth);
inline double rmse(const Vector& predictions, const Vector& truth) {
    return rmse(std::span<const double>(predictions.data(), predictions.size()),
                std::span<const double>(truth.data(), truth.size()));
}

struct ModelScore {
    double logL = 0.0;
    double logO = 0.0;
    double bic = 0.0;
    double beta = 0.0;
    std::size_t M = 0;
    std::size_t N = 0;
};

ModelScore score_model(double log_likelihood, std::size_t M, std::size_t N, double d = 1.0);

}  // namespace qgpr
