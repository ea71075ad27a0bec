#include "qgpr/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace qgpr {

double default_transform_scale(const std::string& tag) {
    std::string t;
    for (char c : tag) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return t.find("h3o") != std::string::npos ? 2.5 : 1.0;
}

PointMatrix transform(const PointMatrix& R, double a) {
    if (!(a > 0.0)) throw DataError("transform: a must be positive");
    if ((R.array() < 0.0).any()) throw DataError("transform: negative distance");
    return (-R.array() / a).exp().matrix();
}

PointMatrix inverse_transform(const PointMatrix& X, double a) { return (-a * X.array().log()).matrix(); }

Dataset make_dataset(PointMatrix R, Vector y, std::string tag, std::optional<double> a) {
    if (R.rows() != y.size()) throw DataError("dataset: distance and energy row counts differ");
    if (R.rows() < 2) throw DataError("dataset: need at least 2 points");
    if (!R.allFinite() || !y.allFinite()) throw DataError("dataset: non-finite values");
    Dataset d;
    d.a = a.value_or(default_transform_scale(tag));
    d.X = transform(R, d.a);
    d.R = std::move(R);
    d.y = std::move(y);
    d.tag = std::move(tag);
    return d;
}

namespace {

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(trim(f));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, std::optional<double> a) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        header = split_fields(t);
        break;
    }
    if (header.empty()) throw DataError(path.string() + ": missing header");

    // Column index of r1..rD and e.
    int e_col = -1;
    std::vector<int> r_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& h = header[c];
        if (h == "e") {
            e_col = static_cast<int>(c);
        } else if (h.size() > 1 && h[0] == 'r') {
            int k = 0;
            auto [p, ec] = std::from_chars(h.data() + 1, h.data() + h.size(), k);
            if (ec != std::errc{} || p != h.data() + h.size() || k < 1)
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": unknown column '" + h + "'");
            if (r_col.size() < static_cast<std::size_t>(k)) r_col.resize(static_cast<std::size_t>(k), -1);
            r_col[static_cast<std::size_t>(k - 1)] = static_cast<int>(c);
        } else {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": unknown column '" + h + "'");
        }
    }
    if (e_col < 0) throw DataError(path.string() + ": missing energy column 'e'");
    if (r_col.empty()) throw DataError(path.string() + ": no distance columns r1..rD");
    for (std::size_t k = 0; k < r_col.size(); ++k)
        if (r_col[k] < 0) throw DataError(path.string() + ": missing column r" + std::to_string(k + 1));

    const std::size_t D = r_col.size();
    std::vector<double> rv, ev;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto f = split_fields(t);
        auto fail = [&](const std::string& why) {
            return DataError(path.string() + ":" + std::to_string(lineno) + ": " + why);
        };
        if (f.size() != header.size())
            throw fail("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        auto num = [&](int c) {
            const auto& s = f[static_cast<std::size_t>(c)];
            double v = 0.0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size()) throw fail("cannot parse '" + s + "'");
            if (!std::isfinite(v)) throw fail("non-finite value '" + s + "'");
            return v;
        };
        for (std::size_t k = 0; k < D; ++k) rv.push_back(num(r_col[k]));
        ev.push_back(num(e_col));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(ev.size());
    PointMatrix R = Eigen::Map<PointMatrix>(rv.data(), n, static_cast<Eigen::Index>(D));
    Vector y = Eigen::Map<Vector>(ev.data(), n);
    return make_dataset(std::move(R), std::move(y), path.string(), a);
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    const PointMatrix R = data.R.size() ? data.R : inverse_transform(data.X, data.a);
    for (Eigen::Index k = 0; k < R.cols(); ++k) out << 'r' << (k + 1) << ',';
    out << "e\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
        for (Eigen::Index k = 0; k < R.cols(); ++k) out << R(i, k) << ',';
        out << data.y[i] << '\n';
    }
}

namespace {

std::vector<Eigen::Index> sample_indices(std::vector<Eigen::Index> pool, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(n);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<Eigen::Index> complement(Eigen::Index n, const std::vector<Eigen::Index>& sorted) {
    std::vector<Eigen::Index> out;
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (k < sorted.size() && sorted[k] == i) ++k;
        else out.push_back(i);
    }
    return out;
}

}  // namespace

Split split_random(const Dataset& data, std::size_t n_train, std::uint64_t seed) {
    const auto N = static_cast<std::size_t>(data.size());
    if (n_train < 1 || n_train >= N)
        throw DataError("split_random: n_train " + std::to_string(n_train) + " must be in [1, " +
                        std::to_string(N - 1) + "]");
    std::vector<Eigen::Index> all(N);
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    Split s;
    s.kind = SplitKind::Random;
    s.seed = seed;
    s.train = sample_indices(std::move(all), n_train, seed);
    s.test = complement(data.size(), s.train);
    return s;
}

Split split_energy_threshold(const Dataset& data, double fraction, std::size_t n_train, std::uint64_t seed,
                             bool allow_empty_test) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("split_energy_threshold: fraction must be in (0, 1)");
    if (n_train < 1) throw DataError("split_energy_threshold: n_train must be >= 1");
    const double lo = data.y_min(), hi = data.y_max();
    const double threshold = lo + fraction * (hi - lo);
    std::vector<Eigen::Index> below, above;
    for (Eigen::Index i = 0; i < data.size(); ++i) (data.y[i] <= threshold ? below : above).push_back(i);
    if (below.size() < n_train)
        throw DataError("split_energy_threshold: only " + std::to_string(below.size()) +
                        " points below threshold, need " + std::to_string(n_train));
    if (above.empty()) {
        if (!allow_empty_test) throw DataError("split_energy_threshold: no points above threshold");
        std::clog << "warning: empty test set at threshold fraction " << fraction << '\n';
    }
    Split s;
    s.kind = SplitKind::EnergyThreshold;
    s.seed = seed;
    s.fraction = fraction;
    s.threshold = threshold;
    s.train = sample_indices(std::move(below), n_train, seed);
    s.test = std::move(above);
    return s;
}

nlohmann::json to_json(const Split& split) {
    nlohmann::json j;
    j["kind"] = split.kind == SplitKind::Random ? "random-interpolation" : "energy-threshold-extrapolation";
    j["seed"] = split.seed;
    if (split.kind == SplitKind::EnergyThreshold) {
        j["fraction"] = split.fraction;
        j["threshold"] = split.threshold;
    }
    j["train"] = split.train;
    j["test"] = split.test;
    return j;
}

PointMatrix take_rows(const PointMatrix& X, const std::vector<Eigen::Index>& idx) {
    PointMatrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
    return out;
}

Vector take(const Vector& y, const std::vector<Eigen::Index>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[idx[i]];
    return out;
}

Standardizer Standardizer::fit(const Vector& y) {
    Standardizer s;
    if (y.size() == 0) return s;
    s.mean = y.mean();
    const double var = (y.array() - s.mean).square().mean();
    s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    return s;
}

SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "morse-sum") return SynthKind::MorseSum;
    if (s == "coupled-morse") return SynthKind::CoupledMorse;
    throw ConfigError("unknown synthetic PES kind '" + s + "'");
}

std::string to_string(SynthKind kind) { return kind == SynthKind::MorseSum ? "morse-sum" : "coupled-morse"; }

double SynthPES::raw_energy(std::span<const double> r) const {
    double e = 0.0;
    std::vector<double> u(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        u[i] = 1.0 - std::exp(-alpha * (r[i] - r_e));
        e += u[i] * u[i];
    }
    if (kind == SynthKind::CoupledMorse)
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t j = i + 1; j < r.size(); ++j) e += coupling * u[i] * u[j];
    return depth * e;
}

double SynthPES::scale() const {
    // Convex in u and u monotone in each r, so the box maximum sits at a corner.
    double best = 0.0;
    std::vector<double> r(static_cast<std::size_t>(dims));
    for (unsigned mask = 0; mask < (1u << dims); ++mask) {
        for (int i = 0; i < dims; ++i) r[static_cast<std::size_t>(i)] = (mask >> i) & 1u ? r_hi : r_lo;
        best = std::max(best, raw_energy(r));
    }
    return e_max / best;
}

double SynthPES::energy(std::span<const double> r) const { return scale() * raw_energy(r); }

Dataset synth_pes(const SynthPES& pes, std::size_t n_points, std::uint64_t seed) {
    if (pes.dims < 2 || pes.dims > 6) throw ConfigError("synth_pes: dims must be in [2, 6]");
    if (pes.kind == SynthKind::CoupledMorse && pes.coupling * (pes.dims - 1) >= 2.0)
        throw ConfigError("synth_pes: coupling too strong, minimum would not be at r_e");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(pes.r_lo, pes.r_hi);
    const auto n = static_cast<Eigen::Index>(n_points);
    PointMatrix R(n, pes.dims);
    Vector y(n);
    const double s = pes.scale();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < pes.dims; ++k) R(i, k) = U(rng);
        y[i] = s * pes.raw_energy(row(R, i));
    }
    return make_dataset(std::move(R), std::move(y),
                        "synthetic:" + to_string(pes.kind) + ":d" + std::to_string(pes.dims) + ":s" +
                            std::to_string(seed),
                        1.0);
}

Dataset synth_pes(int dims, std::size_t n_points, std::uint64_t seed, SynthKind kind) {
    SynthPES p;
    p.dims = dims;
    p.kind = kind;
    return synth_pes(p, n_points, seed);
}

}  // namespace qgpr
