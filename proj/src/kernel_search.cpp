#include "qgpr/kernel_search.hpp"

#include "qgpr/parallel.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <ostream>

namespace qgpr {

std::vector<KernelExpr> expand(const KernelExpr& incumbent, const std::vector<BaseKernel>& bases) {
    // A scaled root already carries the coefficient c_i; reuse it instead of stacking another.
    const bool scaled = incumbent.op() == KernelExpr::Op::Scaled;
    const double c = scaled ? incumbent.coef(0) : 1.0;
    const KernelExpr core = scaled ? incumbent.child() : incumbent;
    std::vector<KernelExpr> out;
    out.reserve(2 * bases.size() + 1);
    for (const auto& b : bases) {
        BaseKernel fresh = BaseKernel::make(b.kind);
        out.push_back(KernelExpr::sum(c, core, 1.0, KernelExpr::leaf(fresh)));
        out.push_back(KernelExpr::product(c, core, KernelExpr::leaf(fresh)));
    }
    out.push_back(incumbent);
    return out;
}

ScoredKernel optimize_expr(const KernelExpr& expr, const PointMatrix& X, const Vector& y, std::size_t budget,
                           std::uint64_t seed, bool warm, const GPOptions& gp, const KernelBounds& bounds) {
    const ParamVector space = param_vector(expr, bounds);
    const ExprKernel fn(expr);
    auto objective = [&](std::span<const double> v) {
        return log_marginal_likelihood(fn, space.with_values(v), X, y, gp);
    };
    MaximizeOptions opts;
    if (warm) opts.warm_start = space.values();
    const OptResult r = maximize(objective, space, budget, seed, opts);
    ScoredKernel out{with_params(expr, std::span<const double>(r.best_point)), {}, r.log.size()};
    out.score = score_model(r.best_value, space.size(), static_cast<std::size_t>(X.rows()));
    return out;
}

std::size_t select_best(const std::vector<ScoredKernel>& scored) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scored.size(); ++i) {
        const auto& a = scored[i].score;
        const auto& b = scored[best].score;
        if (a.bic > b.bic ||
            (a.bic == b.bic && (a.M < b.M || (a.M == b.M && scored[i].expr.to_string() < scored[best].expr.to_string()))))
            best = i;
    }
    return best;
}

namespace {

bool usable(const ScoredKernel& k) { return k.score.logL > kFailedObjective && std::isfinite(k.score.bic); }

}  // namespace

ClassicalSearchResult search_classical(const PointMatrix& X, const Vector& y, const ClassicalSearchConfig& config) {
    if (config.bases.empty()) throw std::invalid_argument("search_classical: empty base set");
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    KernelBounds bounds;
    bounds.period_scale = median_pairwise_distance(X);

    auto evaluate = [&](const std::vector<KernelExpr>& cands, bool warm) {
        std::vector<ScoredKernel> scored(cands.size());
        parallel_for(cands.size(), config.threads, [&](std::size_t i) {
            const std::string key = cands[i].to_string();
            scored[i] = optimize_expr(cands[i], X, y, config.budget, stable_hash(key, config.seed + 1), warm,
                                      config.gp, bounds);
        });
        std::vector<ScoredKernel> kept;
        for (std::size_t i = 0; i < scored.size(); ++i) {
            if (usable(scored[i])) kept.push_back(std::move(scored[i]));
            else std::clog << "warning: discarding candidate " << cands[i].to_string() << " (training failed)\n";
        }
        return kept;
    };

    std::vector<KernelExpr> initial;
    for (const auto& b : config.bases) initial.push_back(KernelExpr::scaled(1.0, KernelExpr::leaf(BaseKernel::make(b.kind))));
    auto pool = evaluate(initial, false);
    if (pool.empty()) throw ComputeError("search_classical: no base kernel could be trained");

    ClassicalSearchResult result;
    ScoredKernel incumbent = pool[select_best(pool)];
    result.trace.push_back({0, initial.size(), incumbent.expr.to_string(), incumbent.score.bic, incumbent.score.logL,
                            incumbent.score.M, elapsed()});

    for (std::size_t it = 1; incumbent.expr.leaf_count() < config.max_depth; ++it) {
        auto cands = expand(incumbent.expr, config.bases);
        cands.pop_back();  // the incumbent keeps its existing score
        auto scored = evaluate(cands, true);
        scored.push_back(incumbent);
        const std::size_t pick = select_best(scored);
        // A surviving incumbent means the next round would repeat this one exactly.
        const bool stalled = pick + 1 == scored.size();
        const ScoredKernel next = scored[pick];
        const double gain = next.score.bic - incumbent.score.bic;
        const double needed = std::max(config.rel_tol * std::abs(incumbent.score.bic), config.abs_tol);
        incumbent = next;
        result.trace.push_back({it, cands.size() + 1, incumbent.expr.to_string(), incumbent.score.bic,
                                incumbent.score.logL, incumbent.score.M, elapsed()});
        if (gain < needed || stalled) break;
    }

    if (config.final_budget > 0) {
        ScoredKernel final = optimize_expr(incumbent.expr, X, y, config.final_budget,
                                           stable_hash(incumbent.expr.to_string(), config.seed + 2), true, config.gp,
                                           bounds);
        if (usable(final) && final.score.bic >= incumbent.score.bic) incumbent = std::move(final);
    }
    result.best = std::move(incumbent);
    return result;
}

void write_search_trace_csv(std::ostream& os, const std::vector<SearchTraceRow>& trace) {
    os << "iteration,candidates,bic,logL,M,seconds,kernel\n";
    os.precision(12);
    for (const auto& r : trace)
        os << r.iteration << ',' << r.candidates << ',' << r.bic << ',' << r.logL << ',' << r.M << ',' << r.seconds
           << ",\"" << r.kernel << "\"\n";
}

}  // namespace qgpr
