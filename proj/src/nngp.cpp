#include "qgpr/nngp.hpp"

#include "qgpr/optimizer.hpp"
#include "qgpr/simd/kernels.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qgpr {

NNGPKernel NNGPKernel::uniform(int depth, double sigma_w, double sigma_b) {
    if (depth < 0) throw std::invalid_argument("NNGPKernel: negative depth");
    NNGPKernel k;
    k.sigma_w.assign(static_cast<std::size_t>(depth) + 1, sigma_w);
    k.sigma_b.assign(static_cast<std::size_t>(depth) + 1, sigma_b);
    return k;
}

double erf_expectation(double kxx, double kpp, double kxp) {
    const double denom = std::sqrt((1.0 + 2.0 * kxx) * (1.0 + 2.0 * kpp));
    double arg = 2.0 * kxp / denom;
    if (std::abs(arg) > 1.0 + 1e-12 || !std::isfinite(arg))
        throw ComputeError("nngp: arcsin argument " + std::to_string(arg) + " outside [-1, 1]");
    arg = std::clamp(arg, -1.0, 1.0);
    return 2.0 / std::numbers::pi * std::asin(arg);
}

double nngp_eval(const NNGPKernel& kernel, std::span<const double> x, std::span<const double> xp) {
    const auto& k = simd::active();
    const double D = static_cast<double>(x.size());
    const double sw0 = kernel.sigma_w[0] * kernel.sigma_w[0];
    const double sb0 = kernel.sigma_b[0] * kernel.sigma_b[0];
    double kxx = sb0 + sw0 * k.dot(x.data(), x.data(), x.size()) / D;
    double kpp = sb0 + sw0 * k.dot(xp.data(), xp.data(), xp.size()) / D;
    double kxp = sb0 + sw0 * k.dot(x.data(), xp.data(), x.size()) / D;
    for (std::size_t l = 1; l < kernel.sigma_w.size(); ++l) {
        const double sw = kernel.sigma_w[l] * kernel.sigma_w[l];
        const double sb = kernel.sigma_b[l] * kernel.sigma_b[l];
        const double nxp = sb + sw * erf_expectation(kxx, kpp, kxp);
        const double nxx = sb + sw * erf_expectation(kxx, kxx, kxx);
        const double npp = sb + sw * erf_expectation(kpp, kpp, kpp);
        kxx = nxx;
        kpp = npp;
        kxp = nxp;
    }
    return kxp;
}

ParamVector nngp_params(const NNGPKernel& kernel) {
    ParamVector p;
    for (std::size_t l = 0; l < kernel.sigma_w.size(); ++l) {
        p.push_back({"sigma_w" + std::to_string(l), kernel.sigma_w[l], 1e-2, 1e1, Scale::Log});
        p.push_back({"sigma_b" + std::to_string(l), kernel.sigma_b[l], 0.0, 1e1, Scale::Linear});
    }
    return p;
}

NNGPKernel nngp_from_params(std::span<const double> values) {
    if (values.size() < 2 || values.size() % 2 != 0)
        throw std::invalid_argument("nngp_from_params: expected an even number >= 2 of values");
    NNGPKernel k;
    for (std::size_t i = 0; i < values.size(); i += 2) {
        k.sigma_w.push_back(values[i]);
        k.sigma_b.push_back(values[i + 1]);
    }
    return k;
}

namespace {

NNGPKernel kernel_of(const ParamVector& params, int depth) {
    const auto v = params.values();
    NNGPKernel k = nngp_from_params(v);
    if (k.depth() != depth) throw std::invalid_argument("NNGPKernelFn: parameter count does not match depth");
    return k;
}

/// Runs the layer recursion elementwise on a cross-covariance block given both diagonals.
void recurse(const NNGPKernel& k, Eigen::ArrayXXd& cross, Vector& dq, Vector& dx) {
    for (std::size_t l = 1; l < k.sigma_w.size(); ++l) {
        const double sw = k.sigma_w[l] * k.sigma_w[l];
        const double sb = k.sigma_b[l] * k.sigma_b[l];
        for (Eigen::Index j = 0; j < cross.cols(); ++j)
            for (Eigen::Index i = 0; i < cross.rows(); ++i)
                cross(i, j) = sb + sw * erf_expectation(dq[i], dx[j], cross(i, j));
        for (Eigen::Index i = 0; i < dq.size(); ++i) dq[i] = sb + sw * erf_expectation(dq[i], dq[i], dq[i]);
        for (Eigen::Index j = 0; j < dx.size(); ++j) dx[j] = sb + sw * erf_expectation(dx[j], dx[j], dx[j]);
    }
}

Eigen::ArrayXXd base_layer(const NNGPKernel& k, const PointMatrix& A, const PointMatrix& B) {
    const auto& simd = simd::active();
    const double D = static_cast<double>(A.cols());
    const double sw = k.sigma_w[0] * k.sigma_w[0];
    const double sb = k.sigma_b[0] * k.sigma_b[0];
    Eigen::ArrayXXd out(A.rows(), B.rows());
    for (Eigen::Index j = 0; j < B.rows(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            out(i, j) = sb + sw * simd.dot(A.data() + i * A.cols(), B.data() + j * B.cols(),
                                           static_cast<std::size_t>(A.cols())) / D;
    return out;
}

Vector base_diag(const NNGPKernel& k, const PointMatrix& A) {
    const auto& simd = simd::active();
    const double D = static_cast<double>(A.cols());
    Vector d(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        d[i] = k.sigma_b[0] * k.sigma_b[0] + k.sigma_w[0] * k.sigma_w[0] *
                                                 simd.dot(A.data() + i * A.cols(), A.data() + i * A.cols(),
                                                          static_cast<std::size_t>(A.cols())) / D;
    return d;
}

}  // namespace

double NNGPKernelFn::eval(std::span<const double> x, std::span<const double> xp, const ParamVector& params) const {
    return nngp_eval(kernel_of(params, depth_), x, xp);
}

std::string NNGPKernelFn::describe(const ParamVector& params) const {
    std::ostringstream os;
    os << "NNGP[L=" << depth_;
    for (std::size_t i = 0; i < params.size(); ++i) os << "," << params[i].name << "=" << params[i].value;
    os << "]";
    return os.str();
}

Matrix NNGPKernelFn::gram(const PointMatrix& X, const ParamVector& params) const {
    const NNGPKernel k = kernel_of(params, depth_);
    Eigen::ArrayXXd K = base_layer(k, X, X);
    Vector d1 = K.matrix().diagonal();
    Vector d2 = d1;
    recurse(k, K, d1, d2);
    return K.matrix();
}

Matrix NNGPKernelFn::cross(const PointMatrix& Xq, const PointMatrix& X, const ParamVector& params) const {
    if (Xq.cols() != X.cols()) throw std::invalid_argument("NNGPKernelFn: dimension mismatch");
    const NNGPKernel k = kernel_of(params, depth_);
    Eigen::ArrayXXd K = base_layer(k, Xq, X);
    Vector dq = base_diag(k, Xq);
    Vector dx = base_diag(k, X);
    recurse(k, K, dq, dx);
    return K.matrix();
}

NNGPSearchResult search_depth(const PointMatrix& X, const Vector& y, const NNGPSearchConfig& config) {
    if (config.max_depth < 1) throw std::invalid_argument("search_depth: max_depth must be >= 1");
    NNGPSearchResult best;
    bool have_best = false;
    std::vector<double> warm;
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t N = static_cast<std::size_t>(X.rows());

    for (int L = 1; L <= config.max_depth; ++L) {
        const NNGPKernelFn fn(L);
        NNGPKernel start = NNGPKernel::uniform(L);
        if (!warm.empty()) {
            // Inherit the shallower model's layers; the new top layer copies the previous top.
            for (std::size_t i = 0; i + 1 < warm.size(); i += 2) {
                start.sigma_w[i / 2] = warm[i];
                start.sigma_b[i / 2] = warm[i + 1];
            }
            start.sigma_w.back() = warm[warm.size() - 2];
            start.sigma_b.back() = warm.back();
        }
        const ParamVector space = nngp_params(start);
        auto objective = [&](std::span<const double> v) {
            return log_marginal_likelihood(fn, space.with_values(v), X, y, config.gp);
        };
        MaximizeOptions opts;
        if (!warm.empty()) opts.warm_start = space.values();
        const OptResult r =
            maximize(objective, space, config.budget, config.seed + static_cast<std::uint64_t>(L) * 7919U, opts);
        if (r.best_value <= kFailedObjective) break;

        const ModelScore score = score_model(r.best_value, space.size(), N);
        best.trace.push_back({L, score.logL, score.bic, score.M,
                              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
        const double previous = have_best ? best.score.logL : 0.0;
        const bool improved = !have_best || score.logL > best.score.logL;
        if (improved) {
            best.kernel = nngp_from_params(r.best_point);
            best.score = score;
        }
        warm = improved ? r.best_point : nngp_params(best.kernel).values();
        if (have_best && score.logL - previous < config.tolerance) break;
        have_best = true;
    }
    if (!have_best && best.trace.empty()) throw ComputeError("search_depth: every depth failed to train");
    return best;
}

void write_nngp_trace_csv(std::ostream& os, const std::vector<NNGPTraceRow>& trace) {
    os << "depth,logL,bic,M,seconds\n";
    os.precision(12);
    for (const auto& r : trace) os << r.depth << ',' << r.logL << ',' << r.bic << ',' << r.M << ',' << r.seconds << '\n';
}

}  // namespace qgpr
