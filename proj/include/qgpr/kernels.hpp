#pragma once

// Classical base kernels and their coefficient-weighted sum/product trees.

#include "qgpr/gp.hpp"
#include "qgpr/types.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qgpr {

double eval_rbf(std::span<const double> x, std::span<const double> xp, double theta);
double eval_dot(std::span<const double> x, std::span<const double> xp);
double eval_rq(std::span<const double> x, std::span<const double> xp, double alpha, double l);
double eval_periodic(std::span<const double> x, std::span<const double> xp, double p, double l);
/// nu must be 0.5, 1.5 or 2.5; r = d(x, x') / l.
double eval_matern(std::span<const double> x, std::span<const double> xp, double nu, double l);

// Same functions of the precomputed squared distance / inner product.
double rbf_from_sq(double d2, double theta);
double rq_from_sq(double d2, double alpha, double l);
double periodic_from_sq(double d2, double p, double l);
double matern_from_sq(double d2, double nu, double l);

/// Matern is split into its three closed-form smoothness variants.
enum class BaseKind { RBF, DOT, RQ, PER, MAT12, MAT32, MAT52 };

std::string_view kind_name(BaseKind kind);
std::size_t kind_param_count(BaseKind kind);
double matern_nu(BaseKind kind);

struct BaseKernel {
    BaseKind kind = BaseKind::RBF;
    /// Shape parameters in order: RBF{th}, DOT{}, RQ{a, l}, PER{p, l}, MAT*{l}.
    std::vector<double> shape;

    static BaseKernel make(BaseKind kind);  // unit defaults
    double eval(std::span<const double> x, std::span<const double> xp) const;
    double eval_sq(double d2, double inner) const;
};

/// The seven default bases: RBF, DOT, RQ, PER, MAT12, MAT32, MAT52.
std::vector<BaseKernel> default_bases();

/// Bounds applied when flattening an expression into a ParamVector.
struct KernelBounds {
    double coef_lower = 1e-3, coef_upper = 1e3;
    double shape_lower = 1e-2, shape_upper = 1e2;
    /// Periodicity bounds are [0.1, 10] times this (median pairwise distance).
    double period_scale = 1.0;
};

/// Immutable expression tree:
///   leaf                      BASE[...]
///   scaled    c * A           (root wrapper for a single base)
///   sum       c1 * A + c2 * B
///   product   c * A * B
class KernelExpr {
public:
    enum class Op { Leaf, Scaled, Sum, Product };

    static KernelExpr leaf(BaseKernel base);
    static KernelExpr scaled(double c, KernelExpr child);
    static KernelExpr sum(double c1, KernelExpr a, double c2, KernelExpr b);
    static KernelExpr product(double c, KernelExpr a, KernelExpr b);

    Op op() const { return node_->op; }
    const BaseKernel& base() const { return node_->base; }
    double coef(std::size_t i = 0) const { return node_->coef[i]; }
    const KernelExpr& left() const { return node_->children[0]; }
    const KernelExpr& right() const { return node_->children[1]; }
    const KernelExpr& child() const { return node_->children[0]; }

    double eval(std::span<const double> x, std::span<const double> xp) const;
    /// Elementwise evaluation from squared distances and inner products.
    Eigen::ArrayXXd eval_sq(const Eigen::ArrayXXd& d2, const Eigen::ArrayXXd& inner) const;

    std::size_t leaf_count() const;
    std::size_t param_count() const;
    std::string to_string() const;

private:
    struct Node {
        Op op = Op::Leaf;
        BaseKernel base;
        std::vector<double> coef;
        std::vector<KernelExpr> children;
    };
    explicit KernelExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

double eval_expr(const KernelExpr& expr, std::span<const double> x, std::span<const double> xp);

/// Pre-order flattening of coefficients and shape parameters.
ParamVector param_vector(const KernelExpr& expr, const KernelBounds& bounds = {});
KernelExpr with_params(const KernelExpr& expr, const ParamVector& params);
KernelExpr with_params(const KernelExpr& expr, std::span<const double> values);

/// Inverse of KernelExpr::to_string. Throws std::invalid_argument on bad input.
KernelExpr parse_kernel_expr(std::string_view text);

/// KernelFn adapter: params are the flattened expression parameters.
class ExprKernel final : public KernelFn {
public:
    explicit ExprKernel(KernelExpr structure) : structure_(std::move(structure)) {}

    double eval(std::span<const double> x, std::span<const double> xp,
                const ParamVector& params) const override;
    std::size_t param_count() const override { return structure_.param_count(); }
    std::string describe(const ParamVector& params) const override;
    Matrix gram(const PointMatrix& X, const ParamVector& params) const override;
    Matrix cross(const PointMatrix& Xq, const PointMatrix& X, const ParamVector& params) const override;

    const KernelExpr& structure() const { return structure_; }

private:
    KernelExpr structure_;
};

/// Pairwise squared distances and inner products via the active SIMD table.
void pair_stats(const PointMatrix& X, Eigen::ArrayXXd& d2, Eigen::ArrayXXd& inner);
void pair_stats(const PointMatrix& Xq, const PointMatrix& X, Eigen::ArrayXXd& d2,
                Eigen::ArrayXXd& inner);

double median_pairwise_distance(const PointMatrix& X);

}  // namespace qgpr
