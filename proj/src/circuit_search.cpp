#include "qgpr/circuit_search.hpp"

#include "qgpr/optimizer.hpp"
#include "qgpr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

namespace qgpr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void matchings(int m, int q, std::vector<bool>& used, Matching& cur, std::vector<Matching>& out) {
    while (q < m && used[q]) ++q;
    if (q >= m) {
        out.push_back(cur);
        return;
    }
    used[q] = true;
    matchings(m, q + 1, used, cur, out);  // q unpaired
    for (int j = q + 1; j < m; ++j) {
        if (used[j]) continue;
        used[j] = true;
        cur.emplace_back(q, j);
        matchings(m, q + 1, used, cur, out);
        cur.pop_back();
        used[j] = false;
    }
    used[q] = false;
}

ModelScore failed_score(std::size_t M, std::size_t N) {
    ModelScore s;
    s.logL = s.logO = s.bic = s.beta = kNegInf;
    s.M = M;
    s.N = N;
    return s;
}

}  // namespace

std::vector<Matching> layer_pool(int m) {
    if (m < 2) throw std::invalid_argument("layer_pool: need m >= 2");
    std::vector<Matching> all;
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    Matching cur;
    matchings(m, 0, used, cur, all);
    std::erase_if(all, [](const Matching& x) { return x.empty(); });
    std::sort(all.begin(), all.end());
    return all;
}

std::uint64_t involution_count(int m) {
    if (m < 0) throw std::invalid_argument("involution_count: negative m");
    std::uint64_t a = 1, b = 1;  // T(n-2), T(n-1)
    for (int n = 2; n <= m; ++n) {
        const std::uint64_t t = b + static_cast<std::uint64_t>(n - 1) * a;
        a = b;
        b = t;
    }
    return b;
}

ModelScore score_circuit(const std::vector<Matching>& layers, const ParamVector& theta, const PointMatrix& X,
                         const Vector& y, const GPOptions& gp, double d) {
    const int m = static_cast<int>(X.cols());
    const auto spec = quantum::build_variable_ansatz(m, layers);
    const quantum::QuantumKernel kernel(spec);
    const std::size_t N = static_cast<std::size_t>(X.rows());
    try {
        const double logl = log_marginal_likelihood(kernel, theta, X, y, gp);
        if (!std::isfinite(logl)) return failed_score(theta.size(), N);
        return score_model(logl, theta.size(), N, d);
    } catch (const ComputeError&) {
        return failed_score(theta.size(), N);
    }
}

std::uint64_t candidate_seed(std::uint64_t base, const std::vector<Matching>& layers) {
    return base ^ stable_hash(quantum::canonical_layers(layers));
}

BeamCandidate refine_candidate(const std::vector<Matching>& layers, const ParamVector& warm, const PointMatrix& X,
                               const Vector& y, std::size_t budget, std::uint64_t seed, const GPOptions& gp,
                               double d) {
    BeamCandidate c{layers, warm, score_circuit(layers, warm, X, y, gp, d), true};
    if (budget == 0) return c;
    // log(e^logL + d) is increasing in logL but rounds to log(d) once logL < -37, leaving the
    // optimizer a flat landscape. Same maximizers, so search on logL.
    auto objective = [&](std::span<const double> v) {
        const ModelScore s = score_circuit(layers, warm.with_values(v), X, y, gp, d);
        return std::isfinite(s.logL) ? s.logL : kFailedObjective;
    };
    MaximizeOptions opts;
    opts.warm_start = warm.values();
    // The warm start is the first evaluation, so budget - 1 new points are explored.
    const OptResult r = maximize(objective, warm, budget, seed, opts);
    if (r.best_value <= kFailedObjective) {
        std::clog << "warning: refinement failed for " << c.key() << ", keeping inherited parameters\n";
        return c;
    }
    if (!(r.best_value > c.score.logL)) return c;
    c.theta = warm.with_values(r.best_point);
    c.score = score_circuit(layers, c.theta, X, y, gp, d);
    return c;
}

bool beam_less(const BeamCandidate& a, const BeamCandidate& b) {
    if (a.score.beta != b.score.beta) return a.score.beta > b.score.beta;
    if (a.layers.size() != b.layers.size()) return a.layers.size() < b.layers.size();
    return a.key() < b.key();
}

std::vector<BeamCandidate> extend(const BeamState& beam, const std::vector<Matching>& pool) {
    std::vector<BeamCandidate> out;
    std::set<std::string> seen;
    for (const auto& parent : beam.candidates) {
        for (const auto& layer : pool) {
            BeamCandidate child;
            child.layers = parent.layers;
            child.layers.push_back(layer);
            child.theta = parent.theta;
            if (!seen.insert(child.key()).second) continue;
            out.push_back(std::move(child));
        }
    }
    return out;
}

BeamState screen(std::vector<BeamCandidate> candidates, const PointMatrix& X, const Vector& y,
                 const CircuitSearchConfig& config) {
    parallel_for(candidates.size(), config.threads, [&](std::size_t i) {
        auto& c = candidates[i];
        if (c.refined) return;  // incumbents keep their score
        if (config.screen_budget > 0) {
            c = refine_candidate(c.layers, c.theta, X, y, config.screen_budget,
                                 candidate_seed(config.seed ^ 0x5c5c5c5cULL, c.layers), config.gp, config.d);
            c.refined = false;
        } else {
            c.score = score_circuit(c.layers, c.theta, X, y, config.gp, config.d);
        }
    });
    std::sort(candidates.begin(), candidates.end(), beam_less);
    BeamState out;
    std::set<std::string> seen;
    for (auto& c : candidates) {
        if (out.candidates.size() >= config.beam_width) break;
        if (!seen.insert(c.key()).second) continue;
        out.candidates.push_back(std::move(c));
    }
    return out;
}

BeamState refine(BeamState beam, const PointMatrix& X, const Vector& y, const CircuitSearchConfig& config) {
    parallel_for(beam.candidates.size(), config.threads, [&](std::size_t i) {
        auto& c = beam.candidates[i];
        if (c.refined) return;
        BeamCandidate r = refine_candidate(c.layers, c.theta, X, y, config.refine_budget,
                                           candidate_seed(config.seed, c.layers), config.gp, config.d);
        // Never lose the screened score.
        if (r.score.logL >= c.score.logL || !std::isfinite(c.score.logL)) c = std::move(r);
        c.refined = true;
    });
    std::sort(beam.candidates.begin(), beam.candidates.end(), beam_less);
    return beam;
}

CircuitSearchResult search_circuit(const PointMatrix& X, const Vector& y, const CircuitSearchConfig& config) {
    if (config.beam_width < 1) throw std::invalid_argument("search_circuit: beam width must be >= 1");
    const int m = static_cast<int>(X.cols());
    const auto pool = layer_pool(m);
    CircuitSearchResult result;

    auto record = [&](const BeamState& beam) {
        const auto& best = beam.candidates.front();
        CircuitTraceRow row{beam.iteration, best.score.beta, best.score.logO, best.key(), std::nullopt};
        if (config.holdout_rmse) {
            auto spec = quantum::build_variable_ansatz(m, best.layers);
            spec.theta = best.theta;
            row.rmse_holdout = config.holdout_rmse(spec);
        }
        result.trace.push_back(std::move(row));
    };

    // Iteration 0 is the empty U_e; its optimized theta is what the first layer inherits.
    BeamState beam;
    beam.candidates.push_back(refine_candidate({}, quantum::default_theta(m), X, y, config.refine_budget,
                                               candidate_seed(config.seed, {}), config.gp, config.d));
    record(beam);

    for (std::size_t depth = 1; depth <= config.max_depth; ++depth) {
        const double previous = beam.candidates.front().score.beta;
        auto pool_now = extend(beam, pool);
        for (const auto& c : beam.candidates) pool_now.push_back(c);
        BeamState next = refine(screen(std::move(pool_now), X, y, config), X, y, config);
        next.iteration = depth;
        beam = std::move(next);
        record(beam);
        const double gain = beam.candidates.front().score.beta - previous;
        if (gain < config.eps_beta) {
            beam.converged = true;
            break;
        }
    }

    BeamCandidate winner = beam.candidates.front();
    if (config.final_budget > 0) {
        BeamCandidate r = refine_candidate(winner.layers, winner.theta, X, y, config.final_budget,
                                           candidate_seed(config.seed + 1, winner.layers), config.gp, config.d);
        if (r.score.logL >= winner.score.logL) winner = std::move(r);
    }
    result.winner = quantum::build_variable_ansatz(m, winner.layers);
    result.winner.theta = winner.theta;
    result.score = winner.score;
    return result;
}

void write_circuit_trace_csv(std::ostream& os, const std::vector<CircuitTraceRow>& trace) {
    os << "iteration,best_beta,best_logO,layers,rmse_holdout\n";
    os.precision(12);
    for (const auto& r : trace) {
        os << r.iteration << ',' << r.best_beta << ',' << r.best_logO << ",\"" << r.layers << "\",";
        if (r.rmse_holdout) os << *r.rmse_holdout;
        os << '\n';
    }
}

}  // namespace qgpr
