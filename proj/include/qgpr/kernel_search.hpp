#pragma once

// Greedy compositional kernel construction scored by BIC.

#include "qgpr/gp.hpp"
#include "qgpr/kernels.hpp"
#include "qgpr/optimizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qgpr {

struct ClassicalSearchConfig {
    std::vector<BaseKernel> bases = default_bases();
    std::size_t budget = 50;
    std::size_t final_budget = 200;
    std::size_t max_depth = 8;  // leaves
    /// Stop when the BIC gain falls below max(rel_tol * |BIC_prev|, abs_tol).
    double rel_tol = 0.01;
    double abs_tol = 0.5;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    GPOptions gp;
};

struct SearchTraceRow {
    std::size_t iteration = 0;
    std::size_t candidates = 0;
    std::string kernel;
    double bic = 0.0;
    double logL = 0.0;
    std::size_t M = 0;
    double seconds = 0.0;
};

/// A kernel with fitted parameters embedded in the tree.
struct ScoredKernel {
    KernelExpr expr = KernelExpr::leaf(BaseKernel::make(BaseKind::RBF));
    ModelScore score;
    std::size_t evaluations = 0;
};

struct ClassicalSearchResult {
    ScoredKernel best;
    std::vector<SearchTraceRow> trace;
};

/// Sum and product of the incumbent with each base, followed by the unmodified incumbent.
std::vector<KernelExpr> expand(const KernelExpr& incumbent, const std::vector<BaseKernel>& bases);

/// Maximizes logL over the expression's parameters, warm-started from the values in `expr`
/// when `warm` is set. Returns score.logL = kFailedObjective if every evaluation failed.
ScoredKernel optimize_expr(const KernelExpr& expr, const PointMatrix& X, const Vector& y, std::size_t budget,
                           std::uint64_t seed, bool warm, const GPOptions& gp, const KernelBounds& bounds);

/// argmax BIC; ties go to fewer parameters, then the lexicographically smaller serialization.
std::size_t select_best(const std::vector<ScoredKernel>& scored);

ClassicalSearchResult search_classical(const PointMatrix& X, const Vector& y, const ClassicalSearchConfig& config);

void write_search_trace_csv(std::ostream& os, const std::vector<SearchTraceRow>& trace);

}  // namespace qgpr
