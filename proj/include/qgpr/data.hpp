#pragma once

// Datasets of distances and energies (cm^-1), coordinate transform, splits and a synthetic PES.

#include "qgpr/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qgpr {

struct Dataset {
    PointMatrix R;  // raw distances, empty when the data came pre-transformed
    PointMatrix X;  // exp(-r / a)
    Vector y;       // energies
    double a = 1.0;
    std::string tag;

    Eigen::Index size() const { return X.rows(); }
    Eigen::Index dims() const { return X.cols(); }
    double y_min() const { return y.minCoeff(); }
    double y_max() const { return y.maxCoeff(); }
};

/// 2.5 for data tagged as H3O+, 1.0 otherwise.
double default_transform_scale(const std::string& tag);

PointMatrix transform(const PointMatrix& R, double a);
PointMatrix inverse_transform(const PointMatrix& X, double a);

/// Builds a dataset from raw distances; `a` defaults from the tag.
Dataset make_dataset(PointMatrix R, Vector y, std::string tag, std::optional<double> a = std::nullopt);

/// CSV with header r1,...,rD,e; lines starting with '#' are skipped.
Dataset load_csv(const std::filesystem::path& path, std::optional<double> a = std::nullopt);
void write_csv(const std::filesystem::path& path, const Dataset& data);

enum class SplitKind { Random, EnergyThreshold };

struct Split {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    SplitKind kind = SplitKind::Random;
    std::uint64_t seed = 0;
    double fraction = 0.0;   // extrapolation only
    double threshold = 0.0;  // extrapolation only
};

Split split_random(const Dataset& data, std::size_t n_train, std::uint64_t seed);

/// Trains on n_train points with y <= y_min + fraction (y_max - y_min) and tests on every point above.
/// An empty test set is an error unless `allow_empty_test`.
Split split_energy_threshold(const Dataset& data, double fraction, std::size_t n_train, std::uint64_t seed,
                             bool allow_empty_test = false);

nlohmann::json to_json(const Split& split);

PointMatrix take_rows(const PointMatrix& X, const std::vector<Eigen::Index>& idx);
Vector take(const Vector& y, const std::vector<Eigen::Index>& idx);

/// Shift/scale of the training targets; models are trained on standardized energies.
struct Standardizer {
    double mean = 0.0;
    double scale = 1.0;

    static Standardizer fit(const Vector& y);
    Vector apply(const Vector& y) const { return (y.array() - mean) / scale; }
    Vector invert(const Vector& z) const { return z.array() * scale + mean; }
};

enum class SynthKind { MorseSum, CoupledMorse };

SynthKind synth_kind_from_string(const std::string& s);
std::string to_string(SynthKind kind);

/// Analytic Morse-type surface with its minimum (energy 0) at r_i = r_e for all i.
struct SynthPES {
    SynthKind kind = SynthKind::CoupledMorse;
    int dims = 3;
    double depth = 1.0;     // Morse well depth before scaling
    double alpha = 1.5;
    double r_e = 1.0;
    double r_lo = 0.7;
    double r_hi = 2.5;
    double coupling = 0.3;  // relative to depth; coupled-morse only
    double e_max = 20000.0;

    /// Unscaled energy.
    double raw_energy(std::span<const double> r) const;
    /// Scaled so the box maximum (all coordinates at r_lo or r_hi) maps to at most e_max.
    double energy(std::span<const double> r) const;
    double scale() const;
};

/// Uniform samples in [r_lo, r_hi]^dims; deterministic by seed.
Dataset synth_pes(int dims, std::size_t n_points, std::uint64_t seed, SynthKind kind = SynthKind::CoupledMorse);
Dataset synth_pes(const SynthPES& pes, std::size_t n_points, std::uint64_t seed);

}  // namespace qgpr
