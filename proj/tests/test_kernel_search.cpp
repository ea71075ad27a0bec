#include "doctest.h"
#include "oracles.hpp"

#include "qgpr/data.hpp"
#include "qgpr/kernel_search.hpp"
#include "qgpr/parallel.hpp"

#include <sstream>

using namespace qgpr;

namespace {

std::vector<BaseKernel> five_bases() {
    std::vector<BaseKernel> b;
    for (BaseKind k : {BaseKind::RBF, BaseKind::DOT, BaseKind::RQ, BaseKind::PER, BaseKind::MAT52})
        b.push_back(BaseKernel::make(k));
    return b;
}

KernelExpr scaled_base(BaseKind k) { return KernelExpr::scaled(1.0, KernelExpr::leaf(BaseKernel::make(k))); }

}  // namespace

TEST_CASE("expansion counts and shapes") {
    const KernelExpr inc = scaled_base(BaseKind::RBF);
    CHECK(expand(inc, five_bases()).size() == 11);
    CHECK(expand(inc, default_bases()).size() == 2 * default_bases().size() + 1);
    const auto one = expand(inc, {BaseKernel::make(BaseKind::DOT)});
    REQUIRE(one.size() == 3);
    CHECK(one[0].op() == KernelExpr::Op::Sum);
    CHECK(one[1].op() == KernelExpr::Op::Product);
    CHECK(one[2].to_string() == inc.to_string());
    for (std::size_t i = 0; i + 1 < one.size(); ++i) CHECK(one[i].leaf_count() == 2);

    // deeper incumbents grow by exactly one leaf
    const auto two = expand(one[0], five_bases());
    for (std::size_t i = 0; i + 1 < two.size(); ++i) CHECK(two[i].leaf_count() == 3);
}

TEST_CASE("selection order") {
    std::vector<ScoredKernel> s(3);
    s[0].expr = scaled_base(BaseKind::RQ);
    s[0].score.bic = 5.0;
    s[0].score.M = 3;
    s[1].expr = scaled_base(BaseKind::RBF);
    s[1].score.bic = 5.0;
    s[1].score.M = 2;
    s[2].expr = scaled_base(BaseKind::MAT52);
    s[2].score.bic = 5.0;
    s[2].score.M = 2;
    // equal BIC and M: smaller serialization wins
    const std::size_t w = s[1].expr.to_string() < s[2].expr.to_string() ? 1 : 2;
    CHECK(select_best(s) == w);
    s[0].score.bic = 5.5;
    CHECK(select_best(s) == 0);
}

TEST_CASE("linear data favours the dot-product kernel") {
    std::mt19937_64 rng(1);
    const auto X = oracle::random_points(rng, 60, 2, -1, 1);
    const Vector y = 1.5 * X.col(0) - 0.7 * X.col(1);
    GPOptions gp;
    gp.sigma_n = 1e-3;
    KernelBounds bounds;
    bounds.period_scale = median_pairwise_distance(X);
    double dot_bic = -1e300, other = -1e300;
    for (const auto& b : five_bases()) {
        const auto r = optimize_expr(scaled_base(b.kind), X, y, 30, 3, false, gp, bounds);
        (b.kind == BaseKind::DOT ? dot_bic : other) = std::max(b.kind == BaseKind::DOT ? dot_bic : other, r.score.bic);
    }
    CHECK(dot_bic > other);
}

TEST_CASE("depth cap 1 equals exhaustive base scoring") {
    const Dataset d = synth_pes(2, 80, 5);
    const Vector y = Standardizer::fit(d.y).apply(d.y);
    ClassicalSearchConfig cfg;
    cfg.bases = five_bases();
    cfg.budget = 15;
    cfg.final_budget = 0;
    cfg.max_depth = 1;
    cfg.seed = 4;
    cfg.gp.sigma_n = 1e-3;
    const auto r = search_classical(d.X, y, cfg);
    REQUIRE(r.trace.size() == 1);

    KernelBounds bounds;
    bounds.period_scale = median_pairwise_distance(d.X);
    std::vector<ScoredKernel> all;
    for (const auto& b : cfg.bases) {
        const KernelExpr e = scaled_base(b.kind);
        all.push_back(optimize_expr(e, d.X, y, cfg.budget, stable_hash(e.to_string(), cfg.seed + 1), false, cfg.gp, bounds));
    }
    const auto& best = all[select_best(all)];
    CHECK(r.best.expr.to_string() == best.expr.to_string());
    CHECK(r.best.score.bic == best.score.bic);
}

TEST_CASE("search trace is monotone and deterministic") {
    const Dataset d = synth_pes(2, 120, 8, SynthKind::MorseSum);
    const Vector y = Standardizer::fit(d.y).apply(d.y);
    ClassicalSearchConfig cfg;
    cfg.bases = five_bases();
    cfg.budget = 12;
    cfg.final_budget = 20;
    cfg.max_depth = 3;
    cfg.rel_tol = 0.0;
    cfg.abs_tol = -1.0;  // only a surviving incumbent or the depth cap stops it
    cfg.gp.sigma_n = 1e-3;
    const auto r = search_classical(d.X, y, cfg);
    REQUIRE(r.trace.size() >= 2);
    CHECK(r.trace.size() <= 3);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].bic >= r.trace[i - 1].bic);
    CHECK(r.best.score.bic >= r.trace.back().bic);
    CHECK(r.trace.front().candidates == 5);
    CHECK(r.trace[1].candidates == 11);

    cfg.threads = 3;
    const auto again = search_classical(d.X, y, cfg);
    CHECK(again.best.expr.to_string() == r.best.expr.to_string());
    CHECK(again.best.score.bic == r.best.score.bic);

    std::ostringstream os;
    write_search_trace_csv(os, r.trace);
    CHECK(os.str().rfind("iteration,candidates,bic,logL,M,seconds,kernel\n", 0) == 0);
}

TEST_CASE("search rejects an empty base set") {
    ClassicalSearchConfig cfg;
    cfg.bases.clear();
    std::mt19937_64 rng(0);
    CHECK_THROWS(search_classical(oracle::random_points(rng, 5, 1), Vector::Zero(5), cfg));
}
