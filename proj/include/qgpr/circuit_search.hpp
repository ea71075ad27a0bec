#pragma once

// Beam search over entangling-layer sequences U_e for the variable ansatz, scored by beta.

#include "qgpr/gp.hpp"
#include "qgpr/quantum.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qgpr {

using quantum::Matching;

/// Every nonempty matching of m qubits, pairs sorted, in a fixed order.
std::vector<Matching> layer_pool(int m);

/// Involution count T(m) with T(n) = T(n-1) + (n-1) T(n-2).
std::uint64_t involution_count(int m);

struct BeamCandidate {
    std::vector<Matching> layers;
    ParamVector theta;
    ModelScore score;
    bool refined = false;

    std::string key() const { return quantum::canonical_layers(layers); }
};

struct BeamState {
    std::vector<BeamCandidate> candidates;  // sorted best first
    std::size_t iteration = 0;
    bool converged = false;
};

struct CircuitSearchConfig {
    std::size_t beam_width = 3;
    std::size_t refine_budget = 40;
    std::size_t screen_budget = 0;
    std::size_t final_budget = 200;
    std::size_t max_depth = 8;
    double eps_beta = 0.5;
    double d = 1.0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    GPOptions gp;
    /// Optional holdout RMSE of the current best circuit, recorded in the trace.
    std::function<double(const quantum::QuantumKernelSpec&)> holdout_rmse;
};

struct CircuitTraceRow {
    std::size_t iteration = 0;
    double best_beta = 0.0;
    double best_logO = 0.0;
    std::string layers;
    std::optional<double> rmse_holdout;
};

struct CircuitSearchResult {
    quantum::QuantumKernelSpec winner;
    ModelScore score;
    std::vector<CircuitTraceRow> trace;
};

/// logO/beta of a variable-ansatz circuit at fixed theta; beta = -inf when the GP fails.
ModelScore score_circuit(const std::vector<Matching>& layers, const ParamVector& theta, const PointMatrix& X,
                         const Vector& y, const GPOptions& gp, double d = 1.0);

/// Maximizes logL (same argmax as logO, but not saturated) over theta starting from `warm`. Pure in its arguments.
BeamCandidate refine_candidate(const std::vector<Matching>& layers, const ParamVector& warm, const PointMatrix& X,
                               const Vector& y, std::size_t budget, std::uint64_t seed, const GPOptions& gp,
                               double d = 1.0);

/// Seed used for a candidate's optimizer run.
std::uint64_t candidate_seed(std::uint64_t base, const std::vector<Matching>& layers);

/// Children of every beam member, one pool layer appended, parents' theta inherited. Deduplicated.
std::vector<BeamCandidate> extend(const BeamState& beam, const std::vector<Matching>& pool);

/// Scores candidates at their current theta (or after `screen_budget` evaluations) and keeps the best `width`.
BeamState screen(std::vector<BeamCandidate> candidates, const PointMatrix& X, const Vector& y,
                 const CircuitSearchConfig& config);

/// Optimizes every not-yet-refined member.
BeamState refine(BeamState beam, const PointMatrix& X, const Vector& y, const CircuitSearchConfig& config);

/// Higher beta first, then fewer layers, then canonical order.
bool beam_less(const BeamCandidate& a, const BeamCandidate& b);

CircuitSearchResult search_circuit(const PointMatrix& X, const Vector& y, const CircuitSearchConfig& config);

void write_circuit_trace_csv(std::ostream& os, const std::vector<CircuitTraceRow>& trace);

}  // namespace qgpr
