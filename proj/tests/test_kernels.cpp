#include "doctest.h"
#include "oracles.hpp"

#include "qgpr/kernels.hpp"

#include <cmath>
#include <functional>
#include <numbers>

using namespace qgpr;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return v; }

/// Point at distance d from the origin along the first axis.
std::pair<std::vector<double>, std::vector<double>> at_distance(double d) { return {{0.0, 0.0}, {d, 0.0}}; }

/// Second evaluator: walks the tree and evaluates bases from textbook formulas.
double reference_eval(const KernelExpr& e, std::span<const double> x, std::span<const double> y) {
    switch (e.op()) {
        case KernelExpr::Op::Leaf: {
            double d2 = 0, dot = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                d2 += (x[i] - y[i]) * (x[i] - y[i]);
                dot += x[i] * y[i];
            }
            const double d = std::sqrt(d2);
            const auto& s = e.base().shape;
            switch (e.base().kind) {
                case BaseKind::RBF: return std::exp(-s[0] * d2);
                case BaseKind::DOT: return dot;
                case BaseKind::RQ: return std::pow(1 + d2 / (2 * s[0] * s[1] * s[1]), -s[0]);
                case BaseKind::PER: {
                    const double t = std::sin(std::numbers::pi * d / s[0]);
                    return std::exp(-2 * t * t / (s[1] * s[1]));
                }
                case BaseKind::MAT12: return std::exp(-d / s[0]);
                case BaseKind::MAT32: {
                    const double r = std::sqrt(3.0) * d / s[0];
                    return (1 + r) * std::exp(-r);
                }
                case BaseKind::MAT52: {
                    const double r = d / s[0];
                    return (1 + std::sqrt(5.0) * r + 5 * r * r / 3) * std::exp(-std::sqrt(5.0) * r);
                }
            }
            return 0;
        }
        case KernelExpr::Op::Scaled: return e.coef(0) * reference_eval(e.child(), x, y);
        case KernelExpr::Op::Sum:
            return e.coef(0) * reference_eval(e.left(), x, y) + e.coef(1) * reference_eval(e.right(), x, y);
        case KernelExpr::Op::Product:
            return e.coef(0) * reference_eval(e.left(), x, y) * reference_eval(e.right(), x, y);
    }
    return 0;
}

BaseKernel random_base(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> K(0, 6);
    std::uniform_real_distribution<double> S(0.3, 3.0);
    BaseKernel b = BaseKernel::make(static_cast<BaseKind>(K(rng)));
    for (auto& s : b.shape) s = S(rng);
    return b;
}

/// Random tree with `leaves` leaves built the way the search builds them.
KernelExpr random_tree(std::mt19937_64& rng, int leaves) {
    std::uniform_real_distribution<double> C(0.2, 4.0);
    std::bernoulli_distribution coin(0.5);
    KernelExpr e = KernelExpr::leaf(random_base(rng));
    for (int i = 1; i < leaves; ++i) {
        auto leaf = KernelExpr::leaf(random_base(rng));
        e = coin(rng) ? KernelExpr::sum(C(rng), e, C(rng), leaf) : KernelExpr::product(C(rng), e, leaf);
    }
    return e;
}

}  // namespace

TEST_CASE("RBF") {
    auto x = vec({0.3, -1.2});
    CHECK(eval_rbf(x, x, 2.0) == 1.0);
    auto [a, b] = at_distance(1.0);
    CHECK(eval_rbf(a, b, 1.0) == doctest::Approx(0.3678794).epsilon(1e-7));
    auto [c, d] = at_distance(std::sqrt(0.5));
    CHECK(eval_rbf(c, d, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("dot product") {
    CHECK(eval_dot(vec({1, 0, 0}), vec({0, 1, 0})) == 0.0);
    CHECK(eval_dot(vec({1, 1, 1}), vec({1, 1, 1})) == 3.0);
    std::mt19937_64 rng(1);
    const PointMatrix X = oracle::random_points(rng, 2, 6, -1, 1);
    double ref = 0;
    for (int i = 0; i < 6; ++i) ref += X(0, i) * X(1, i);
    CHECK(eval_dot(row(X, 0), row(X, 1)) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("rational quadratic") {
    auto x = vec({1, 2});
    CHECK(eval_rq(x, x, 0.7, 1.3) == 1.0);
    auto [a, b] = at_distance(1.0);
    CHECK(std::abs(eval_rq(a, b, 1e6, 1.0) - std::exp(-0.5)) < 1e-5);
    auto [c, d] = at_distance(std::sqrt(2.0));
    CHECK(eval_rq(c, d, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("periodic") {
    auto x = vec({0.4, 0.1});
    CHECK(eval_periodic(x, x, 1.7, 0.9) == 1.0);
    auto [a, b] = at_distance(1.7);
    CHECK(eval_periodic(a, b, 1.7, 0.9) == doctest::Approx(1.0).epsilon(1e-14));
    auto [c, d] = at_distance(0.85);
    CHECK(eval_periodic(c, d, 1.7, 1.0) == doctest::Approx(0.1353353).epsilon(1e-7));
}

TEST_CASE("Matern closed forms") {
    auto x = vec({0.2, 0.2});
    for (double nu : {0.5, 1.5, 2.5}) CHECK(eval_matern(x, x, nu, 0.8) == 1.0);
    auto [a, b] = at_distance(1.0);
    CHECK(eval_matern(a, b, 0.5, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(eval_matern(a, b, 1.5, 1.0) == doctest::Approx(0.4833577).epsilon(1e-7));
    CHECK_THROWS(eval_matern(a, b, 1.0, 1.0));

    // General form with the modified Bessel function K_nu.
    auto general = [](double nu, double r) {
        const double z = std::sqrt(2 * nu) * r;
        return std::pow(2.0, 1 - nu) / std::tgamma(nu) * std::pow(z, nu) * std::cyl_bessel_k(nu, z);
    };
    for (double nu : {0.5, 1.5, 2.5})
        for (double r = 0.05; r <= 10.0; r += 0.05) {
            auto [p, q] = at_distance(r * 1.3);
            CHECK(std::abs(eval_matern(p, q, nu, 1.3) - general(nu, r)) < 1e-9);
        }
}

TEST_CASE("stationary bases peak at zero distance") {
    std::mt19937_64 rng(2);
    const PointMatrix X = oracle::random_points(rng, 1000, 3, -2, 2);
    const PointMatrix Y = oracle::random_points(rng, 1000, 3, -2, 2);
    for (auto kind : {BaseKind::RBF, BaseKind::RQ, BaseKind::PER, BaseKind::MAT12, BaseKind::MAT32, BaseKind::MAT52}) {
        const BaseKernel b = BaseKernel::make(kind);
        bool ok = true;
        for (int i = 0; i < 1000; ++i) {
            const double kxx = b.eval(row(X, i), row(X, i));
            ok = ok && kxx == 1.0 && b.eval(row(X, i), row(Y, i)) <= kxx;
        }
        CHECK_MESSAGE(ok, kind_name(kind));
    }
}

TEST_CASE("expression evaluation") {
    SUBCASE("scaled single leaf equals the base") {
        auto e = KernelExpr::scaled(1.0, KernelExpr::leaf({BaseKind::RBF, {0.7}}));
        auto [a, b] = at_distance(0.9);
        CHECK(eval_expr(e, a, b) == eval_rbf(a, b, 0.7));
    }
    SUBCASE("sum arithmetic") {
        auto e = KernelExpr::sum(2.0, KernelExpr::leaf({BaseKind::RBF, {1.0}}), 3.0, KernelExpr::leaf({BaseKind::DOT, {}}));
        auto x = vec({0.6, 0.8});
        CHECK(eval_expr(e, x, x) == doctest::Approx(5.0).epsilon(1e-14));
    }
    SUBCASE("random trees match the reference evaluator, are symmetric and PSD") {
        std::mt19937_64 rng(3);
        for (int rep = 0; rep < 25; ++rep) {
            const KernelExpr e = random_tree(rng, 4);
            CHECK(e.leaf_count() == 4);
            const PointMatrix X = oracle::random_points(rng, 10, 3, -1, 1);
            for (int i = 0; i < 10; ++i)
                for (int j = 0; j < 10; ++j) {
                    const double v = eval_expr(e, row(X, i), row(X, j));
                    CHECK(v == doctest::Approx(reference_eval(e, row(X, i), row(X, j))).epsilon(1e-12));
                    CHECK(std::abs(v - eval_expr(e, row(X, j), row(X, i))) <= 1e-12 * (1 + std::abs(v)));
                }
            const ExprKernel fn(e);
            const ParamVector p = param_vector(e);
            const Matrix K = build_kernel_matrix(fn, p, X);
            const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(K).eigenvalues().minCoeff();
            CHECK(lmin >= -1e-8 * std::max(1.0, K.cwiseAbs().maxCoeff()));
            // vectorised gram path agrees with pairwise evaluation
            for (int i = 0; i < 10; ++i)
                for (int j = 0; j < 10; ++j)
                    CHECK(K(i, j) == doctest::Approx(fn.eval(row(X, i), row(X, j), p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("parameter flattening") {
    auto rbf = KernelExpr::scaled(2.0, KernelExpr::leaf({BaseKind::RBF, {1.3}}));
    CHECK(param_vector(rbf).size() == 2);
    CHECK(param_vector(rbf)[0].value == 2.0);
    CHECK(param_vector(rbf)[1].value == 1.3);
    CHECK(param_vector(KernelExpr::scaled(1.0, KernelExpr::leaf(BaseKernel::make(BaseKind::DOT)))).size() == 1);

    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const KernelExpr e = random_tree(rng, 1 + rep % 5);
        const ParamVector p = param_vector(e);
        CHECK(p.size() == e.param_count());
        CHECK(with_params(e, p).to_string() == e.to_string());
        std::vector<double> v = p.values();
        for (auto& x : v) x *= 1.5;
        CHECK(param_vector(with_params(e, std::span<const double>(v))).values() == v);
    }
    CHECK_THROWS_AS(with_params(rbf, std::vector<double>{1.0}), std::invalid_argument);

    SUBCASE("bounds") {
        KernelBounds b;
        b.period_scale = 0.5;
        auto per = KernelExpr::scaled(1.0, KernelExpr::leaf(BaseKernel::make(BaseKind::PER)));
        const ParamVector p = param_vector(per, b);
        CHECK(p[0].lower == 1e-3);
        CHECK(p[0].upper == 1e3);
        CHECK(p[1].lower == doctest::Approx(0.05));
        CHECK(p[1].upper == doctest::Approx(5.0));
        CHECK(p[2].lower == 1e-2);
        CHECK(p[2].upper == 1e2);
        for (const auto& q : p) CHECK(q.scale == Scale::Log);
    }
}

TEST_CASE("serialization round trip") {
    const std::string text = "(2*RBF[th=1.3] + 0.5*(1.1*MAT52[l=0.7] * PER[p=2,l=1.1]))";
    const KernelExpr e = parse_kernel_expr(text);
    CHECK(e.to_string() == text);
    CHECK(e.leaf_count() == 3);
    CHECK(e.param_count() == 7);

    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        const KernelExpr r = random_tree(rng, 1 + rep % 6);
        const KernelExpr back = parse_kernel_expr(r.to_string());
        CHECK(back.to_string() == r.to_string());
        CHECK(param_vector(back).values() == param_vector(r).values());
    }
    CHECK_THROWS_AS(parse_kernel_expr("RBF[th=1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_kernel_expr("FOO[x=1]"), std::invalid_argument);
    CHECK_THROWS_AS(parse_kernel_expr("(1*RBF[th=1] + 2*DOT[]) junk"), std::invalid_argument);
}

TEST_CASE("median pairwise distance") {
    PointMatrix X(3, 1);
    X << 0, 1, 3;
    CHECK(median_pairwise_distance(X) == doctest::Approx(2.0));
}
