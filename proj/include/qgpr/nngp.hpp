#pragma once

// Infinite-width network kernel with erf activation and per-layer (sigma_w, sigma_b).

#include "qgpr/gp.hpp"
#include "qgpr/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace qgpr {

struct NNGPKernel {
    /// Layers 0..depth; layer 0 is the affine input layer.
    std::vector<double> sigma_w;
    std::vector<double> sigma_b;

    static NNGPKernel uniform(int depth, double sigma_w = 1.0, double sigma_b = 0.1);
    int depth() const { return static_cast<int>(sigma_w.size()) - 1; }
    std::size_t param_count() const { return 2 * sigma_w.size(); }
};

/// k^0 = sb0^2 + sw0^2 x.x'/D, then
/// k^l = sbl^2 + swl^2 (2/pi) asin(2 k(x,x') / sqrt((1 + 2 k(x,x)) (1 + 2 k(x',x')))).
double nngp_eval(const NNGPKernel& kernel, std::span<const double> x, std::span<const double> xp);

/// One step of the erf recursion applied to (k(x,x), k(x',x'), k(x,x')).
double erf_expectation(double kxx, double kpp, double kxp);

/// Parameters ordered [sw0, sb0, sw1, sb1, ...]; sw log-scale in [1e-2, 1e1], sb linear in [0, 1e1].
ParamVector nngp_params(const NNGPKernel& kernel);
NNGPKernel nngp_from_params(std::span<const double> values);

class NNGPKernelFn final : public KernelFn {
public:
    explicit NNGPKernelFn(int depth) : depth_(depth) {}

    double eval(std::span<const double> x, std::span<const double> xp, const ParamVector& params) const override;
    std::size_t param_count() const override { return 2 * static_cast<std::size_t>(depth_ + 1); }
    std::string describe(const ParamVector& params) const override;
    Matrix gram(const PointMatrix& X, const ParamVector& params) const override;
    Matrix cross(const PointMatrix& Xq, const PointMatrix& X, const ParamVector& params) const override;

    int depth() const { return depth_; }

private:
    int depth_;
};

struct NNGPSearchConfig {
    std::size_t budget = 50;
    int max_depth = 6;
    double tolerance = 0.5;  // nats of logL
    std::uint64_t seed = 0;
    GPOptions gp;
};

struct NNGPTraceRow {
    int depth = 0;
    double logL = 0.0;
    double bic = 0.0;
    std::size_t M = 0;
    double seconds = 0.0;
};

struct NNGPSearchResult {
    NNGPKernel kernel;
    ModelScore score;
    std::vector<NNGPTraceRow> trace;
};

/// Grows the depth L = 1, 2, ... until the optimized logL stops improving by `tolerance`.
NNGPSearchResult search_depth(const PointMatrix& X, const Vector& y, const NNGPSearchConfig& config);

void write_nngp_trace_csv(std::ostream& os, const std::vector<NNGPTraceRow>& trace);

}  // namespace qgpr
