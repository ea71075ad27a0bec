#pragma once

// Experiment configuration, interpolation/extrapolation protocols and report files.

#include "qgpr/circuit_search.hpp"
#include "qgpr/data.hpp"
#include "qgpr/gp.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qgpr {

enum class Family { Rbf, Composite, Nngp, QuantumFixed, QuantumVariable };

std::string family_name(Family f);
Family family_from_string(const std::string& s);

struct DatasetSource {
    std::optional<std::string> file;
    std::optional<double> a;
    SynthPES synth;
    std::size_t synth_points = 2000;
    std::uint64_t synth_seed = 0;
};

struct SearchSettings {
    std::size_t budget = 50;
    std::size_t final_budget = 200;
    std::size_t classical_max_depth = 8;
    double rel_tol = 0.01;
    double abs_tol = 0.5;
    int nngp_max_depth = 6;
    double nngp_tolerance = 0.5;
    std::size_t beam_width = 3;
    std::size_t refine_budget = 40;
    std::size_t screen_budget = 0;
    std::size_t circuit_max_depth = 8;
    double eps_beta = 0.5;
    /// Evaluate holdout RMSE at every beam iteration (costs one fit per iteration).
    bool holdout_trace = false;
};

struct ExperimentConfig {
    DatasetSource dataset;
    std::vector<Family> families{Family::Rbf};
    std::string split_kind = "interpolation";  // or "extrapolation"
    std::vector<std::size_t> n_train{100};
    std::vector<double> thresholds{0.5};
    std::size_t extrap_n_train = 1500;
    std::vector<std::uint64_t> seeds{0};
    SearchSettings search;
    GPOptions gp;
    std::string output = "out";
    std::size_t threads = 1;
    /// Only for `fit`: classical expression, {"nngp": {...}} or a quantum circuit document.
    std::optional<nlohmann::json> model;
};

/// Parses and validates a config document. Unknown keys raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

Dataset load_dataset(const DatasetSource& src);

struct ResultRow {
    std::string family;
    std::string cell;          // "n=<n_train>" or "t=<fraction>"
    std::size_t n_train = 0;
    double threshold = 0.0;    // fraction, extrapolation only
    std::uint64_t seed = 0;
    std::size_t n_test = 0;
    double rmse = 0.0;
    double log_objective = 0.0;  // logL (classical, nngp) or logO (quantum)
    double score = 0.0;          // BIC or beta
    std::size_t M = 0;
    double seconds = 0.0;
    std::string kernel;

    bool operator==(const ResultRow&) const = default;
};

/// One fitted model and everything needed to report it.
struct CellOutput {
    ResultRow row;
    std::string trace_header;
    std::vector<std::string> trace_lines;
    nlohmann::json winner;  // serialized model
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::vector<CellOutput> cells;  // parallel to rows
    std::vector<std::string> failures;
};

/// Searches (for adaptive families), fits on the training split and scores on the test split.
CellOutput run_cell(Family family, const Dataset& data, const Split& split, std::uint64_t seed,
                    const ExperimentConfig& config, const std::string& cell);

ResultTable run_interpolation(const ExperimentConfig& config, const Dataset& data);
ResultTable run_extrapolation(const ExperimentConfig& config, const Dataset& data);

/// Same split for every family at a given (n_train, seed).
Split interpolation_split(const Dataset& data, std::size_t n_train, std::uint64_t seed);

/// Writes results.csv, trace_<family>_<seed>.csv, winner_<family>.json|txt and summary.txt.
void emit_reports(const ResultTable& table, const std::filesystem::path& outdir);

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Lowest-RMSE row per family.
std::string summarize(const std::vector<ResultRow>& rows);

}  // namespace qgpr
