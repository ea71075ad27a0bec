#include "qgpr/bench.hpp"

#include "qgpr/kernel_search.hpp"
#include "qgpr/nngp.hpp"
#include "qgpr/optimizer.hpp"
#include "qgpr/parallel.hpp"
#include "qgpr/quantum.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace qgpr {

using nlohmann::json;

std::string family_name(Family f) {
    switch (f) {
        case Family::Rbf: return "rbf";
        case Family::Composite: return "composite";
        case Family::Nngp: return "nngp";
        case Family::QuantumFixed: return "quantum-fixed";
        case Family::QuantumVariable: return "quantum-variable";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    for (Family f : {Family::Rbf, Family::Composite, Family::Nngp, Family::QuantumFixed, Family::QuantumVariable})
        if (family_name(f) == s) return f;
    throw ConfigError("unknown kernel family '" + s + "'");
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <class T>
std::vector<T> read_list(const json& j, const std::string& where) {
    try {
        if (j.is_array()) return j.get<std::vector<T>>();
        return {j.get<T>()};
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    check_keys(j, {"dataset", "families", "split", "search", "gp", "output", "threads", "model"}, "config");
    ExperimentConfig c;

    if (!j.contains("dataset")) throw ConfigError("config: missing 'dataset'");
    const json& d = j["dataset"];
    check_keys(d, {"file", "a", "synthetic"}, "dataset");
    if (d.contains("file") == d.contains("synthetic"))
        throw ConfigError("dataset: give exactly one of 'file' or 'synthetic'");
    if (d.contains("file")) {
        std::string f;
        read(d, "file", f, "dataset");
        c.dataset.file = f;
    }
    if (d.contains("a")) {
        double a = 0;
        read(d, "a", a, "dataset");
        if (!(a > 0)) throw ConfigError("dataset.a must be positive");
        c.dataset.a = a;
    }
    if (d.contains("synthetic")) {
        const json& s = d["synthetic"];
        check_keys(s, {"kind", "dims", "n_points", "seed", "e_max", "coupling"}, "dataset.synthetic");
        std::string kind = "coupled-morse";
        read(s, "kind", kind, "dataset.synthetic");
        c.dataset.synth.kind = synth_kind_from_string(kind);
        read(s, "dims", c.dataset.synth.dims, "dataset.synthetic");
        read(s, "n_points", c.dataset.synth_points, "dataset.synthetic");
        read(s, "seed", c.dataset.synth_seed, "dataset.synthetic");
        read(s, "e_max", c.dataset.synth.e_max, "dataset.synthetic");
        read(s, "coupling", c.dataset.synth.coupling, "dataset.synthetic");
        if (c.dataset.synth.dims < 2 || c.dataset.synth.dims > 6)
            throw ConfigError("dataset.synthetic.dims must be in [2, 6]");
        if (c.dataset.synth_points < 2) throw ConfigError("dataset.synthetic.n_points must be >= 2");
    }

    if (j.contains("families")) {
        c.families.clear();
        for (const auto& f : read_list<std::string>(j["families"], "families")) c.families.push_back(family_from_string(f));
        if (c.families.empty()) throw ConfigError("families: empty");
    }

    if (j.contains("split")) {
        const json& s = j["split"];
        check_keys(s, {"kind", "n_train", "thresholds", "seeds"}, "split");
        read(s, "kind", c.split_kind, "split");
        if (c.split_kind != "interpolation" && c.split_kind != "extrapolation")
            throw ConfigError("split.kind must be 'interpolation' or 'extrapolation'");
        if (s.contains("n_train")) {
            c.n_train = read_list<std::size_t>(s["n_train"], "split.n_train");
            if (c.n_train.empty()) throw ConfigError("split.n_train: empty");
            c.extrap_n_train = c.n_train.front();
        }
        if (s.contains("thresholds")) c.thresholds = read_list<double>(s["thresholds"], "split.thresholds");
        if (s.contains("seeds")) c.seeds = read_list<std::uint64_t>(s["seeds"], "split.seeds");
        if (c.seeds.empty()) throw ConfigError("split.seeds: empty");
        if (c.split_kind == "extrapolation") {
            if (c.thresholds.empty()) throw ConfigError("split.thresholds: empty");
            for (double t : c.thresholds)
                if (!(t > 0 && t < 1)) throw ConfigError("split.thresholds must lie in (0, 1)");
        }
        for (auto n : c.n_train)
            if (n < 1) throw ConfigError("split.n_train must be >= 1");
    }

    if (j.contains("search")) {
        const json& s = j["search"];
        check_keys(s,
                   {"budget", "final_budget", "classical_max_depth", "rel_tol", "abs_tol", "nngp_max_depth",
                    "nngp_tolerance", "beam_width", "refine_budget", "screen_budget", "circuit_max_depth", "eps_beta",
                    "holdout_trace"},
                   "search");
        auto& t = c.search;
        read(s, "budget", t.budget, "search");
        read(s, "final_budget", t.final_budget, "search");
        read(s, "classical_max_depth", t.classical_max_depth, "search");
        read(s, "rel_tol", t.rel_tol, "search");
        read(s, "abs_tol", t.abs_tol, "search");
        read(s, "nngp_max_depth", t.nngp_max_depth, "search");
        read(s, "nngp_tolerance", t.nngp_tolerance, "search");
        read(s, "beam_width", t.beam_width, "search");
        read(s, "refine_budget", t.refine_budget, "search");
        read(s, "screen_budget", t.screen_budget, "search");
        read(s, "circuit_max_depth", t.circuit_max_depth, "search");
        read(s, "eps_beta", t.eps_beta, "search");
        read(s, "holdout_trace", t.holdout_trace, "search");
        if (t.budget < 1 || t.beam_width < 1 || t.nngp_max_depth < 1)
            throw ConfigError("search: budget, beam_width and nngp_max_depth must be >= 1");
    }

    if (j.contains("gp")) {
        const json& g = j["gp"];
        check_keys(g, {"sigma_n", "jitter", "jitter_cap"}, "gp");
        read(g, "sigma_n", c.gp.sigma_n, "gp");
        read(g, "jitter", c.gp.jitter, "gp");
        read(g, "jitter_cap", c.gp.jitter_cap, "gp");
        if (c.gp.sigma_n < 0 || c.gp.jitter < 0 || c.gp.jitter_cap < c.gp.jitter)
            throw ConfigError("gp: need sigma_n >= 0 and 0 <= jitter <= jitter_cap");
    }
    read(j, "output", c.output, "config");
    read(j, "threads", c.threads, "config");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    if (j.contains("model")) c.model = j["model"];
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j);
}

Dataset load_dataset(const DatasetSource& src) {
    if (src.file) return load_csv(*src.file, src.a);
    return synth_pes(src.synth, src.synth_points, src.synth_seed);
}

Split interpolation_split(const Dataset& data, std::size_t n_train, std::uint64_t seed) {
    // Independent sample per n_train; shared by every family.
    return split_random(data, n_train, stable_hash("n=" + std::to_string(n_train), seed));
}

namespace {

struct Fitted {
    std::shared_ptr<const KernelFn> kernel;
    ParamVector params;
    double log_objective = 0;
    double score = 0;
    std::size_t M = 0;
    std::string text;
    json winner;
};

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string l;
    while (std::getline(in, l))
        if (!l.empty()) out.push_back(l);
    return out;
}

void set_trace(CellOutput& out, const std::string& csv) {
    auto lines = lines_of(csv);
    if (lines.empty()) return;
    out.trace_header = lines.front();
    out.trace_lines.assign(lines.begin() + 1, lines.end());
}

Vector predict_energies(const Fitted& f, const PointMatrix& Xtr, const Vector& z, const Standardizer& st,
                        const PointMatrix& Xte, const GPOptions& gp) {
    const TrainedGP model = fit(f.kernel, f.params, Xtr, z, gp);
    return st.invert(model.predict(Xte));
}

Fitted optimize_quantum(const quantum::QuantumKernelSpec& start, const PointMatrix& X, const Vector& z,
                        std::size_t budget, std::uint64_t seed, const GPOptions& gp) {
    auto kernel = std::make_shared<quantum::QuantumKernel>(start);
    auto logo = [&](std::span<const double> v) {
        try {
            const double l = log_marginal_likelihood(*kernel, start.theta.with_values(v), X, z, gp);
            return std::isfinite(l) ? l : kFailedObjective;  // same maximizers as logO, no underflow
        } catch (const ComputeError&) {
            return kFailedObjective;
        }
    };
    const OptResult r = maximize(logo, start.theta, budget, seed);
    if (r.best_value <= kFailedObjective) throw ComputeError("quantum kernel training failed for every parameter");
    Fitted f;
    f.kernel = kernel;
    f.params = start.theta.with_values(r.best_point);
    const double logl = log_marginal_likelihood(*kernel, f.params, X, z, gp);
    const ModelScore s = score_model(logl, f.params.size(), static_cast<std::size_t>(X.rows()));
    f.log_objective = s.logO;
    f.score = s.beta;
    f.M = s.M;
    quantum::QuantumKernelSpec spec = start;
    spec.theta = f.params;
    f.winner = quantum::to_json(spec);
    f.text = kernel->describe(f.params);
    return f;
}

Fitted from_expr(const KernelExpr& expr, const KernelBounds& bounds, const ModelScore& s) {
    Fitted f;
    f.kernel = std::make_shared<ExprKernel>(expr);
    f.params = param_vector(expr, bounds);
    f.log_objective = s.logL;
    f.score = s.bic;
    f.M = s.M;
    f.text = expr.to_string();
    f.winner = {{"kernel", f.text}, {"logL", s.logL}, {"bic", s.bic}};
    return f;
}

}  // namespace

CellOutput run_cell(Family family, const Dataset& data, const Split& split, std::uint64_t seed,
                    const ExperimentConfig& config, const std::string& cell) {
    const auto t0 = std::chrono::steady_clock::now();
    const PointMatrix Xtr = take_rows(data.X, split.train);
    const PointMatrix Xte = take_rows(data.X, split.test);
    const Vector ytr = take(data.y, split.train);
    const Vector yte = take(data.y, split.test);
    const Standardizer st = Standardizer::fit(ytr);
    const Vector z = st.apply(ytr);
    const std::string fname = family_name(family);
    const std::uint64_t search_seed = stable_hash(fname + "/" + cell, seed);
    const auto& s = config.search;

    CellOutput out;
    Fitted f;
    KernelBounds bounds;
    bounds.period_scale = median_pairwise_distance(Xtr);

    switch (family) {
        case Family::Rbf: {
            const auto start = KernelExpr::scaled(1.0, KernelExpr::leaf(BaseKernel::make(BaseKind::RBF)));
            const ScoredKernel k =
                optimize_expr(start, Xtr, z, s.final_budget, search_seed, false, config.gp, bounds);
            if (k.score.logL <= kFailedObjective) throw ComputeError("rbf training failed");
            f = from_expr(k.expr, bounds, k.score);
            break;
        }
        case Family::Composite: {
            ClassicalSearchConfig cc;
            cc.budget = s.budget;
            cc.final_budget = s.final_budget;
            cc.max_depth = s.classical_max_depth;
            cc.rel_tol = s.rel_tol;
            cc.abs_tol = s.abs_tol;
            cc.seed = search_seed;
            cc.gp = config.gp;
            const auto r = search_classical(Xtr, z, cc);
            f = from_expr(r.best.expr, bounds, r.best.score);
            std::ostringstream os;
            write_search_trace_csv(os, r.trace);
            set_trace(out, os.str());
            break;
        }
        case Family::Nngp: {
            NNGPSearchConfig nc;
            nc.budget = s.final_budget;
            nc.max_depth = s.nngp_max_depth;
            nc.tolerance = s.nngp_tolerance;
            nc.seed = search_seed;
            nc.gp = config.gp;
            const auto r = search_depth(Xtr, z, nc);
            f.kernel = std::make_shared<NNGPKernelFn>(r.kernel.depth());
            f.params = nngp_params(r.kernel);
            f.log_objective = r.score.logL;
            f.score = r.score.bic;
            f.M = r.score.M;
            f.text = f.kernel->describe(f.params);
            f.winner = {{"depth", r.kernel.depth()}, {"sigma_w", r.kernel.sigma_w}, {"sigma_b", r.kernel.sigma_b},
                        {"logL", r.score.logL}, {"bic", r.score.bic}};
            std::ostringstream os;
            write_nngp_trace_csv(os, r.trace);
            set_trace(out, os.str());
            break;
        }
        case Family::QuantumFixed: {
            const int m = static_cast<int>(Xtr.cols());
            if (m > quantum::kMaxQubits) throw ConfigError("too many input dimensions for the simulator");
            f = optimize_quantum(quantum::build_fixed_ansatz(m), Xtr, z, s.final_budget, search_seed, config.gp);
            break;
        }
        case Family::QuantumVariable: {
            const int m = static_cast<int>(Xtr.cols());
            if (m < 2 || m > quantum::kMaxQubits) throw ConfigError("quantum-variable needs 2..16 input dimensions");
            CircuitSearchConfig qc;
            qc.beam_width = s.beam_width;
            qc.refine_budget = s.refine_budget;
            qc.screen_budget = s.screen_budget;
            qc.final_budget = s.final_budget;
            qc.max_depth = s.circuit_max_depth;
            qc.eps_beta = s.eps_beta;
            qc.seed = search_seed;
            qc.gp = config.gp;
            if (s.holdout_trace && Xte.rows() > 0)
                qc.holdout_rmse = [&](const quantum::QuantumKernelSpec& spec) {
                    const TrainedGP g = fit(std::make_shared<quantum::QuantumKernel>(spec), spec.theta, Xtr, z,
                                            config.gp);
                    return rmse(st.invert(g.predict(Xte)), yte);
                };
            const auto r = search_circuit(Xtr, z, qc);
            f.kernel = std::make_shared<quantum::QuantumKernel>(r.winner);
            f.params = r.winner.theta;
            f.log_objective = r.score.logO;
            f.score = r.score.beta;
            f.M = r.score.M;
            f.winner = quantum::to_json(r.winner);
            f.text = quantum::canonical_layers(r.winner.entangling);
            if (f.text.empty()) f.text = "[]";
            std::ostringstream os;
            write_circuit_trace_csv(os, r.trace);
            set_trace(out, os.str());
            break;
        }
    }

    ResultRow& row = out.row;
    row.family = fname;
    row.cell = cell;
    row.n_train = split.train.size();
    row.threshold = split.kind == SplitKind::EnergyThreshold ? split.fraction : 0.0;
    row.seed = seed;
    row.n_test = split.test.size();
    row.rmse = Xte.rows() > 0 ? rmse(predict_energies(f, Xtr, z, st, Xte, config.gp), yte) : 0.0;
    row.log_objective = f.log_objective;
    row.score = f.score;
    row.M = f.M;
    row.kernel = f.text;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.winner = std::move(f.winner);
    return out;
}

namespace {

struct Task {
    Family family;
    std::string cell;
    std::uint64_t seed;
    std::function<Split()> split;
};

ResultTable run_tasks(const std::vector<Task>& tasks, const Dataset& data, const ExperimentConfig& config) {
    std::vector<std::optional<CellOutput>> outs(tasks.size());
    std::vector<std::string> errors(tasks.size());
    parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
        const auto& t = tasks[i];
        try {
            outs[i] = run_cell(t.family, data, t.split(), t.seed, config, t.cell);
        } catch (const std::exception& e) {
            errors[i] = family_name(t.family) + " " + t.cell + " seed " + std::to_string(t.seed) + ": " + e.what();
        }
    });
    ResultTable table;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (outs[i]) table.cells.push_back(std::move(*outs[i]));
        else {
            std::clog << "warning: cell failed: " << errors[i] << '\n';
            table.failures.push_back(errors[i]);
        }
    }
    return table;
}

void finish(ResultTable& table, bool by_threshold) {
    std::stable_sort(table.cells.begin(), table.cells.end(), [&](const CellOutput& a, const CellOutput& b) {
        const auto& x = a.row;
        const auto& y = b.row;
        if (x.family != y.family) return x.family < y.family;
        if (by_threshold) {
            if (x.threshold != y.threshold) return x.threshold < y.threshold;
        } else if (x.n_train != y.n_train) {
            return x.n_train < y.n_train;
        }
        return x.seed < y.seed;
    });
    for (const auto& c : table.cells) table.rows.push_back(c.row);
}

std::string cell_label(const char* prefix, double v) {
    std::ostringstream os;
    os << prefix << v;
    return os.str();
}

}  // namespace

ResultTable run_interpolation(const ExperimentConfig& config, const Dataset& data) {
    std::vector<Task> tasks;
    for (Family f : config.families)
        for (std::size_t n : config.n_train)
            for (std::uint64_t seed : config.seeds)
                tasks.push_back({f, cell_label("n=", static_cast<double>(n)), seed,
                                 [&data, n, seed] { return interpolation_split(data, n, seed); }});
    ResultTable t = run_tasks(tasks, data, config);
    finish(t, false);
    return t;
}

ResultTable run_extrapolation(const ExperimentConfig& config, const Dataset& data) {
    if (config.thresholds.empty()) throw ConfigError("extrapolation needs at least one threshold");
    std::vector<Task> tasks;
    const std::size_t n = config.extrap_n_train;
    for (Family f : config.families)
        for (double frac : config.thresholds)
            for (std::uint64_t seed : config.seeds)
                tasks.push_back({f, cell_label("t=", frac), seed, [&data, frac, n, seed] {
                                     return split_energy_threshold(data, frac, n, seed);
                                 }});
    ResultTable t = run_tasks(tasks, data, config);
    finish(t, true);
    return t;
}

namespace {

std::string csv_quote(const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::vector<std::string> csv_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

const char* kResultsHeader = "family,cell,n_train,threshold,seed,n_test,rmse,log_objective,score,M,seconds,kernel";

template <class T>
T parse_num(const std::string& s, std::size_t line) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError("results.csv:" + std::to_string(line) + ": cannot parse '" + s + "'");
    return v;
}

}  // namespace

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << kResultsHeader << '\n';
    out.precision(17);
    for (const auto& r : rows)
        out << r.family << ',' << r.cell << ',' << r.n_train << ',' << r.threshold << ',' << r.seed << ','
            << r.n_test << ',' << r.rmse << ',' << r.log_objective << ',' << r.score << ',' << r.M << ','
            << r.seconds << ',' << csv_quote(r.kernel) << '\n';
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw DataError(path.string() + ": unexpected header");
    std::vector<ResultRow> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto f = csv_fields(line);
        if (f.size() != 12) throw DataError(path.string() + ":" + std::to_string(n) + ": expected 12 fields");
        ResultRow r;
        r.family = f[0];
        r.cell = f[1];
        r.n_train = parse_num<std::size_t>(f[2], n);
        r.threshold = parse_num<double>(f[3], n);
        r.seed = parse_num<std::uint64_t>(f[4], n);
        r.n_test = parse_num<std::size_t>(f[5], n);
        r.rmse = parse_num<double>(f[6], n);
        r.log_objective = parse_num<double>(f[7], n);
        r.score = parse_num<double>(f[8], n);
        r.M = parse_num<std::size_t>(f[9], n);
        r.seconds = parse_num<double>(f[10], n);
        r.kernel = f[11];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string summarize(const std::vector<ResultRow>& rows) {
    std::map<std::string, const ResultRow*> best;
    for (const auto& r : rows) {
        auto& b = best[r.family];
        if (!b || r.rmse < b->rmse) b = &r;
    }
    std::ostringstream os;
    os << "best RMSE per family (cm^-1)\n";
    os << "family,cell,seed,rmse,score,kernel\n";
    os.precision(6);
    for (const auto& [name, r] : best)
        os << name << ',' << r->cell << ',' << r->seed << ',' << r->rmse << ',' << r->score << ','
           << csv_quote(r->kernel) << '\n';
    return os.str();
}

void emit_reports(const ResultTable& table, const std::filesystem::path& outdir) {
    if (table.rows.empty()) throw ComputeError("emit_reports: empty result table");
    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);
    if (ec) throw DataError("cannot create " + outdir.string() + ": " + ec.message());
    write_results_csv(outdir / "results.csv", table.rows);

    std::map<std::pair<std::string, std::uint64_t>, std::vector<const CellOutput*>> traces;
    for (const auto& c : table.cells)
        if (!c.trace_header.empty()) traces[{c.row.family, c.row.seed}].push_back(&c);
    for (const auto& [key, cells] : traces) {
        std::ofstream out(outdir / ("trace_" + key.first + "_" + std::to_string(key.second) + ".csv"));
        if (!out) throw DataError("cannot write trace file in " + outdir.string());
        out << "cell," << cells.front()->trace_header << '\n';
        for (const auto* c : cells)
            for (const auto& l : c->trace_lines) out << c->row.cell << ',' << l << '\n';
    }

    std::map<std::string, const CellOutput*> winners;
    for (const auto& c : table.cells) {
        auto& w = winners[c.row.family];
        if (!w || c.row.rmse < w->row.rmse) w = &c;
    }
    for (const auto& [family, c] : winners) {
        const bool quantum = family.rfind("quantum", 0) == 0;
        std::ofstream out(outdir / ("winner_" + family + (quantum ? ".json" : ".txt")));
        if (!out) throw DataError("cannot write winner file in " + outdir.string());
        if (quantum) out << c->winner.dump(2) << '\n';
        else out << c->row.kernel << '\n' << c->winner.dump() << '\n';
    }

    std::ofstream summary(outdir / "summary.txt");
    if (!summary) throw DataError("cannot write summary in " + outdir.string());
    summary << summarize(table.rows);
    if (!table.failures.empty()) {
        summary << "failed cells\n";
        for (const auto& f : table.failures) summary << f << '\n';
    }
}

}  // namespace qgpr
