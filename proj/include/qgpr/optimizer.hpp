#pragma once

// Derivative-free maximization by Bayesian optimization: a shifted Halton
// design followed by expected improvement on a Matern-5/2 surrogate.

#include "qgpr/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace qgpr {

/// Value recorded for failed or non-finite objective evaluations.
inline constexpr double kFailedObjective = -1e300;

using Objective = std::function<double(std::span<const double>)>;

struct Evaluation {
    std::vector<double> point;
    double value = 0.0;
    double seconds = 0.0;  // since the start of the call
};

struct OptResult {
    std::vector<double> best_point;
    double best_value = kFailedObjective;
    std::vector<Evaluation> log;
    std::uint64_t seed = 0;
};

struct MaximizeOptions {
    /// Evaluated first, so the result can never be worse than it.
    std::optional<std::vector<double>> warm_start;
    std::size_t random_starts = 64;
    std::size_t local_starts = 4;
    double xi = 0.01;
};

/// Maximizes `objective` over the box described by `space` (bounds + scale).
/// Deterministic for a fixed (objective, space, budget, seed, options).
OptResult maximize(const Objective& objective, const ParamVector& space, std::size_t budget,
                   std::uint64_t seed, const MaximizeOptions& options = {});

/// Number of space-filling points before the surrogate takes over.
std::size_t initial_design_size(std::size_t budget, std::size_t dims);

/// Shifted Halton point `index` (>= 1) in [0, 1)^dims.
std::vector<double> halton_point(std::size_t index, std::span<const double> shift);

double to_unit(const Param& p, double value);
double from_unit(const Param& p, double u);

void write_evaluation_log(std::ostream& os, const OptResult& result);

}  // namespace qgpr
