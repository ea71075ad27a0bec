#include "doctest.h"
#include "oracles.hpp"

#include "qgpr/gp.hpp"
#include "qgpr/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace qgpr;

namespace {

std::shared_ptr<const KernelFn> rbf_kernel(double theta, ParamVector& params) {
    const auto e = KernelExpr::scaled(1.0, KernelExpr::leaf({BaseKind::RBF, {theta}}));
    params = param_vector(e);
    return std::make_shared<ExprKernel>(e);
}

struct NanAt final : KernelFn {
    Eigen::Index bad_i, bad_j;
    NanAt(Eigen::Index i, Eigen::Index j) : bad_i(i), bad_j(j) {}
    double eval(std::span<const double> x, std::span<const double> xp, const ParamVector&) const override {
        // Row identity is carried in the first coordinate.
        const auto i = static_cast<Eigen::Index>(x[0]), j = static_cast<Eigen::Index>(xp[0]);
        if ((i == bad_i && j == bad_j) || (i == bad_j && j == bad_i)) return std::nan("");
        return i == j ? 1.0 : 0.0;
    }
    std::size_t param_count() const override { return 0; }
    std::string describe(const ParamVector&) const override { return "nan-probe"; }
};

Matrix matrix1(double v) {
    Matrix K(1, 1);
    K(0, 0) = v;
    return K;
}

}  // namespace

TEST_CASE("kernel matrix assembly") {
    std::mt19937_64 rng(1);
    ParamVector p;
    auto k = rbf_kernel(1.0, p);

    SUBCASE("single point gives a 1x1 matrix with k(x,x) = 1") {
        const PointMatrix X = oracle::random_points(rng, 1, 3);
        const Matrix K = build_kernel_matrix(*k, p, X);
        REQUIRE(K.rows() == 1);
        CHECK(K(0, 0) == 1.0);
    }
    SUBCASE("matches an independent scalar loop and is bitwise symmetric") {
        const PointMatrix X = oracle::random_points(rng, 3, 4);
        const Matrix K = build_kernel_matrix(*k, p, X);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double d2 = 0;
                for (int c = 0; c < 4; ++c) d2 += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
                CHECK(K(i, j) == doctest::Approx(std::exp(-d2)).epsilon(1e-14));
                CHECK(K(i, j) == K(j, i));
            }
        for (int i = 0; i < 3; ++i) CHECK(K(i, i) == 1.0);
    }
    SUBCASE("large theta drives off-diagonals to zero") {
        ParamVector q;
        auto sharp = rbf_kernel(99.0, q);
        const PointMatrix X = oracle::random_points(rng, 5, 2, 0.0, 10.0);
        const Matrix K = build_kernel_matrix(*sharp, q, X);
        CHECK((K - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-3);
    }
    SUBCASE("non-finite value names the offending pair") {
        PointMatrix X(4, 1);
        X << 0, 1, 2, 3;
        NanAt probe(1, 3);
        try {
            build_kernel_matrix(probe, {}, X);
            FAIL("expected EvaluationError");
        } catch (const EvaluationError& e) {
            CHECK(e.row == 1);
            CHECK(e.col == 3);
        }
    }
}

TEST_CASE("fit stores a consistent factorization") {
    std::mt19937_64 rng(2);

    SUBCASE("scalar case") {
        Vector y(1);
        y << 5.0;
        const Factorization f = factorize(matrix1(1.0), {});
        CHECK(f.lower(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
        ParamVector p;
        auto k = rbf_kernel(1.0, p);
        const TrainedGP gp = fit(k, p, oracle::random_points(rng, 1, 2), y);
        CHECK(gp.alpha()[0] == doctest::Approx(5.0).epsilon(1e-9));
    }
    SUBCASE("far apart points give alpha close to y") {
        ParamVector p;
        auto k = rbf_kernel(1.0, p);
        PointMatrix X(4, 1);
        X << 0, 100, 200, 300;
        const Vector y = oracle::random_vector(rng, 4);
        const TrainedGP gp = fit(k, p, X, y);
        CHECK((gp.alpha() - y).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("residual and reconstruction on a 10-point set") {
        ParamVector p;
        auto k = rbf_kernel(3.0, p);
        const PointMatrix X = oracle::random_points(rng, 10, 3);
        const Vector y = oracle::random_vector(rng, 10);
        const TrainedGP gp = fit(k, p, X, y);
        Matrix A = build_kernel_matrix(*k, p, X);
        A.diagonal().array() += gp.jitter();
        const Matrix LLt = gp.factor() * gp.factor().transpose();
        CHECK((LLt - A).norm() <= 1e-8 * A.norm());
        CHECK((A * gp.alpha() - y).norm() <= 1e-6 * y.norm());
    }
}

TEST_CASE("jitter escalation") {
    SUBCASE("slightly indefinite matrix succeeds after escalating") {
        Matrix K(2, 2);
        K << 1.0, 1.0 + 5e-8, 1.0 + 5e-8, 1.0;  // eigenvalues 2 + 5e-8 and -5e-8
        const Factorization f = factorize(K, {});
        CHECK(f.jitter > 1e-10);
        CHECK(f.jitter <= 1e-6);
        CHECK(f.jitter > 5e-8);
    }
    SUBCASE("strongly indefinite matrix reports the smallest eigenvalue") {
        Matrix K(2, 2);
        K << 1.0, 2.0, 2.0, 1.0;
        try {
            factorize(K, {});
            FAIL("expected NotPositiveDefinite");
        } catch (const NotPositiveDefinite& e) {
            CHECK(e.final_jitter == doctest::Approx(1e-4));
            CHECK(e.min_eigenvalue == doctest::Approx(-1.0 + 1e-4).epsilon(1e-9));
        }
    }
    SUBCASE("noise variance is added to the diagonal") {
        GPOptions o;
        o.sigma_n = 0.5;
        o.jitter = 0.0;
        const Factorization f = factorize(matrix1(1.0), o);
        CHECK(f.lower(0, 0) == doctest::Approx(std::sqrt(1.25)));
    }
}

TEST_CASE("prediction") {
    std::mt19937_64 rng(4);
    ParamVector p;
    auto k = rbf_kernel(5.0, p);
    const PointMatrix X = oracle::random_points(rng, 5, 2);
    const Vector y = oracle::random_vector(rng, 5);
    GPOptions o;
    o.jitter = 0.0;
    const TrainedGP gp = fit(k, p, X, y, o);

    SUBCASE("reproduces the training targets") {
        const Vector f = gp.predict(X);
        for (int i = 0; i < 5; ++i) CHECK(f[i] == doctest::Approx(y[i]).epsilon(1e-6));
    }
    SUBCASE("reverts to the zero prior mean far away") {
        PointMatrix Q(1, 2);
        Q << 1e3, -1e3;
        CHECK(std::abs(gp.predict(Q)[0]) < 1e-12);
    }
    SUBCASE("matches the dense inverse formula") {
        const PointMatrix Q = oracle::random_points(rng, 1, 2);
        const Matrix K = build_kernel_matrix(*k, p, X);
        const Matrix kq = k->cross(Q, X, p);
        const double ref = (kq * K.inverse() * y)(0);
        CHECK(gp.predict(Q)[0] == doctest::Approx(ref).epsilon(1e-8));
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(gp.predict(oracle::random_points(rng, 2, 3)), std::invalid_argument);
    }
}

TEST_CASE("log marginal likelihood") {
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    Vector y0(1), y1(1);
    y0 << 0.0;
    y1 << 1.0;
    GPOptions exact;
    exact.jitter = 0.0;
    CHECK(log_marginal_likelihood(matrix1(1.0), y0, exact) == doctest::Approx(-0.9189385332).epsilon(1e-10));
    CHECK(log_marginal_likelihood(matrix1(1.0), y1, exact) == doctest::Approx(-1.4189385332).epsilon(1e-10));
    CHECK(log_marginal_likelihood(matrix1(1.0), y0, exact) == doctest::Approx(-half_log_2pi));

    std::mt19937_64 rng(5);
    for (int n : {6, 12, 20}) {
        ParamVector p;
        auto k = rbf_kernel(4.0, p);
        const PointMatrix X = oracle::random_points(rng, n, 3);
        const Vector y = oracle::random_vector(rng, n);
        const Matrix K = build_kernel_matrix(*k, p, X);
        const double got = log_marginal_likelihood(*k, p, X, y, exact);
        CHECK(std::abs(got - oracle::dense_log_likelihood(K, y)) < 1e-8);
    }
}

TEST_CASE("surrogate objective log(L + d)") {
    CHECK(surrogate_objective(-std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(surrogate_objective(std::log(std::numbers::e - 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(surrogate_objective(1e4) == doctest::Approx(1e4));
    CHECK_THROWS(surrogate_objective(0.0, 0.0));

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> U(-50.0, 2.0);
    double prev = -1;
    std::vector<double> xs(200);
    for (auto& x : xs) x = U(rng);
    std::sort(xs.begin(), xs.end());
    for (double x : xs) {
        const double o = surrogate_objective(x);
        CHECK(std::abs(o - std::log(std::exp(x) + 1.0)) < 1e-12);
        CHECK(o >= 0.0);
        CHECK(o >= prev);
        prev = o;
    }
    CHECK(surrogate_objective(-1e6, 2.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("information criteria") {
    CHECK(bic(-3.5, 0, 100) == -3.5);
    CHECK(beta(1.0, 2, 100) == doctest::Approx(-3.6051702).epsilon(1e-7));
    CHECK(bic(7.0, 9, 1) == 7.0);
    for (std::size_t M = 0; M < 10; ++M) CHECK(bic(0.0, M + 1, 3) < bic(0.0, M, 3));
    const ModelScore s = score_model(10.0, 3, 50);
    CHECK(s.bic == 10.0 - 0.5 * 3 * std::log(50.0));
    CHECK(s.beta == s.logO - 0.5 * 3 * std::log(50.0));
}

TEST_CASE("rmse") {
    const std::vector<double> a{1, 2, 3}, zero{0, 0}, t{3, 4};
    CHECK(rmse(a, a) == 0.0);
    CHECK(rmse(zero, t) == doctest::Approx(3.5355339).epsilon(1e-7));
    CHECK_THROWS(rmse(std::vector<double>{}, std::vector<double>{}));
    CHECK_THROWS(rmse(a, t));
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const Vector p = oracle::random_vector(rng, 100), q = oracle::random_vector(rng, 100);
        double s = 0;
        for (int i = 0; i < 100; ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
        CHECK(rmse(p, q) == doctest::Approx(std::sqrt(s / 100)).epsilon(1e-12));
    }
}
