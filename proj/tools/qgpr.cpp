// qgpr command line: searches, fits and benchmark protocols driven by a JSON config.

#include "qgpr/bench.hpp"
#include "qgpr/kernels.hpp"
#include "qgpr/nngp.hpp"
#include "qgpr/quantum.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

using namespace qgpr;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
};

ExperimentConfig configure(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    ExperimentConfig c = load_config(o.config);
    if (o.seed) c.seeds = {*o.seed};
    if (o.out) c.output = *o.out;
    if (o.threads) {
        if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
        c.threads = *o.threads;
    }
    return c;
}

ResultTable run_protocol(const ExperimentConfig& c, const Dataset& data) {
    return c.split_kind == "extrapolation" ? run_extrapolation(c, data) : run_interpolation(c, data);
}

int finish(const ResultTable& t, const ExperimentConfig& c) {
    if (t.rows.empty()) {
        for (const auto& f : t.failures) std::cerr << "error: " << f << '\n';
        throw ComputeError("every cell failed");
    }
    emit_reports(t, c.output);
    std::cout << summarize(t.rows);
    std::cout << "wrote " << t.rows.size() << " rows to " << c.output << '\n';
    return 0;
}

int cmd_search(const Options& o, Family family) {
    ExperimentConfig c = configure(o);
    c.families = {family};
    const Dataset data = load_dataset(c.dataset);
    return finish(run_protocol(c, data), c);
}

int cmd_bench(const Options& o, const char* kind) {
    ExperimentConfig c = configure(o);
    c.split_kind = kind;
    const Dataset data = load_dataset(c.dataset);
    return finish(run_protocol(c, data), c);
}

/// Fits a given model without any search and reports holdout RMSE.
int cmd_fit(const Options& o) {
    const ExperimentConfig c = configure(o);
    if (!c.model) throw ConfigError("fit: config needs a 'model' entry");
    const Dataset data = load_dataset(c.dataset);
    const std::uint64_t seed = c.seeds.front();
    const Split split = c.split_kind == "extrapolation"
                            ? split_energy_threshold(data, c.thresholds.front(), c.extrap_n_train, seed)
                            : interpolation_split(data, c.n_train.front(), seed);
    const PointMatrix Xtr = take_rows(data.X, split.train), Xte = take_rows(data.X, split.test);
    const Vector ytr = take(data.y, split.train), yte = take(data.y, split.test);
    const Standardizer st = Standardizer::fit(ytr);

    std::shared_ptr<const KernelFn> kernel;
    ParamVector params;
    bool quantum_model = false;
    const auto& m = *c.model;
    try {
        if (m.is_string()) {
            const KernelExpr e = parse_kernel_expr(m.get<std::string>());
            kernel = std::make_shared<ExprKernel>(e);
            params = param_vector(e);
        } else if (m.contains("nngp")) {
            NNGPKernel k;
            k.sigma_w = m["nngp"].at("sigma_w").get<std::vector<double>>();
            k.sigma_b = m["nngp"].at("sigma_b").get<std::vector<double>>();
            if (k.sigma_w.empty() || k.sigma_w.size() != k.sigma_b.size())
                throw ConfigError("model.nngp: sigma_w and sigma_b must be nonempty and equal length");
            kernel = std::make_shared<NNGPKernelFn>(k.depth());
            params = nngp_params(k);
        } else {
            const auto spec = quantum::spec_from_json(m);
            kernel = std::make_shared<quantum::QuantumKernel>(spec);
            params = spec.theta;
            quantum_model = true;
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }

    const auto t0 = std::chrono::steady_clock::now();
    const TrainedGP gp = fit(kernel, params, Xtr, st.apply(ytr), c.gp);
    const ModelScore s = score_model(gp.log_likelihood(), params.size(), static_cast<std::size_t>(Xtr.rows()));
    ResultTable t;
    CellOutput cell;
    ResultRow& r = cell.row;
    r.family = quantum_model ? "quantum" : "fit";
    r.cell = "fit";
    r.n_train = split.train.size();
    r.threshold = split.fraction;
    r.seed = seed;
    r.n_test = split.test.size();
    r.rmse = Xte.rows() ? rmse(st.invert(gp.predict(Xte)), yte) : 0.0;
    r.log_objective = quantum_model ? s.logO : s.logL;
    r.score = quantum_model ? s.beta : s.bic;
    r.M = s.M;
    r.kernel = kernel->describe(params);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cell.winner = m;
    t.rows.push_back(r);
    t.cells.push_back(cell);
    return finish(t, c);
}

int cmd_report(const Options& o) {
    std::filesystem::path dir = o.out.value_or("");
    if (dir.empty()) dir = configure(o).output;
    const auto rows = read_results_csv(dir / "results.csv");
    if (rows.empty()) throw DataError("results.csv has no rows");
    const std::string s = summarize(rows);
    std::ofstream(dir / "summary.txt") << s;
    std::cout << s;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-process regression with classical, NNGP and quantum kernels"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment JSON");
        sub->add_option("--seed", o.seed, "run a single seed");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--threads", o.threads, "worker threads");
    };
    auto* fit_cmd = app.add_subcommand("fit", "fit a given model and report holdout RMSE");
    auto* sc = app.add_subcommand("search-classical", "compositional kernel search");
    auto* sq = app.add_subcommand("search-quantum", "beam search over entangling layers");
    auto* sn = app.add_subcommand("search-nngp", "NNGP depth search");
    auto* bi = app.add_subcommand("bench-interp", "interpolation protocol over families and seeds");
    auto* be = app.add_subcommand("bench-extrap", "energy-threshold extrapolation protocol");
    auto* rep = app.add_subcommand("report", "rebuild summary.txt from results.csv");
    for (auto* s : {fit_cmd, sc, sq, sn, bi, be, rep}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*fit_cmd) return cmd_fit(o);
        if (*sc) return cmd_search(o, Family::Composite);
        if (*sq) return cmd_search(o, Family::QuantumVariable);
        if (*sn) return cmd_search(o, Family::Nngp);
        if (*bi) return cmd_bench(o, "interpolation");
        if (*be) return cmd_bench(o, "extrapolation");
        if (*rep) return cmd_report(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "compute error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
