#include "qgpr/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qgpr::quantum {

std::string_view gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::RZ: return "RZ";
        case GateKind::RY: return "RY";
        case GateKind::RZZ: return "RZZ";
        case GateKind::ID: return "I";
    }
    return "?";
}

void Circuit::validate() const {
    if (m < 1 || m > kMaxQubits) throw std::invalid_argument("circuit: qubit count out of range");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::vector<bool> used(static_cast<std::size_t>(m), false);
        auto touch = [&](int q) {
            if (q < 0 || q >= m)
                throw std::out_of_range("circuit: qubit " + std::to_string(q) + " out of range in layer " +
                                        std::to_string(l));
            if (used[static_cast<std::size_t>(q)])
                throw std::invalid_argument("circuit: qubit " + std::to_string(q) + " used twice in layer " +
                                            std::to_string(l));
            used[static_cast<std::size_t>(q)] = true;
        };
        for (const auto& g : layers[l]) {
            touch(g.q0);
            if (g.kind == GateKind::RZZ) {
                if (g.q1 == g.q0) throw std::invalid_argument("circuit: RZZ on a single qubit");
                touch(g.q1);
            }
        }
    }
}

std::size_t Circuit::gate_count(GateKind kind) const {
    std::size_t n = 0;
    for (const auto& l : layers)
        n += static_cast<std::size_t>(std::count_if(l.begin(), l.end(), [kind](const GateOp& g) { return g.kind == kind; }));
    return n;
}

StateVector::StateVector(int m) : m_(m) {
    if (m < 1 || m > kMaxQubits) throw std::invalid_argument("StateVector: qubit count out of range");
    amp_.assign(std::size_t{1} << m, cplx(0.0, 0.0));
    amp_[0] = 1.0;
}

double StateVector::norm2() const { return simd::active().norm2(amp_.data(), amp_.size()); }

void StateVector::apply(const GateOp& gate, double angle) {
    auto check = [this](int q) {
        if (q < 0 || q >= m_) throw std::out_of_range("apply: qubit " + std::to_string(q) + " out of range");
    };
    check(gate.q0);
    const auto& k = simd::active();
    const std::size_t stride = std::size_t{1} << gate.q0;
    switch (gate.kind) {
        case GateKind::ID: return;
        case GateKind::H: k.hadamard(amp_.data(), amp_.size(), stride); return;
        case GateKind::RY:
            k.rotate_y(amp_.data(), amp_.size(), stride, std::cos(angle / 2), std::sin(angle / 2));
            return;
        case GateKind::RZ:
            k.parity_phase(amp_.data(), amp_.size(), stride, std::cos(angle / 2), std::sin(angle / 2));
            return;
        case GateKind::RZZ: {
            check(gate.q1);
            if (gate.q1 == gate.q0) throw std::invalid_argument("apply: RZZ needs two distinct qubits");
            const std::uint64_t mask = (std::uint64_t{1} << gate.q0) | (std::uint64_t{1} << gate.q1);
            k.parity_phase(amp_.data(), amp_.size(), mask, std::cos(angle / 2), std::sin(angle / 2));
            return;
        }
    }
}

ParamVector default_theta(int m) {
    ParamVector p;
    for (int i = 0; i < m; ++i) p.push_back({"theta" + std::to_string(i + 1), 1.0, 1e-2, 1e2, Scale::Log});
    p.push_back({"Theta", 1.0, 1e-3, 1e2, Scale::Log});
    return p;
}

double encode(std::span<const double> x, std::span<const double> theta, const GateOp& gate) {
    if (gate.fixed_angle) return *gate.fixed_angle;
    switch (gate.kind) {
        case GateKind::H:
        case GateKind::ID: return 0.0;
        case GateKind::RY:
        case GateKind::RZ: {
            const auto i = static_cast<std::size_t>(gate.q0);
            if (i >= x.size() || i >= theta.size()) throw std::out_of_range("encode: missing theta slot");
            return x[i] / theta[i];
        }
        case GateKind::RZZ: {
            const auto i = static_cast<std::size_t>(gate.q0);
            const auto j = static_cast<std::size_t>(gate.q1);
            if (j >= x.size() || theta.empty()) throw std::out_of_range("encode: missing theta slot");
            const double d = x[i] - x[j];
            return std::exp(-d * d / theta.back());
        }
    }
    return 0.0;
}

namespace {

Layer full_layer(int m, GateOp (*make)(int)) {
    Layer l;
    for (int q = 0; q < m; ++q) l.push_back(make(q));
    return l;
}

/// Round-robin edge colouring of the complete graph: every pair once, one gate per qubit per layer.
std::vector<Layer> all_pairs_layers(int m) {
    const int n = m % 2 == 0 ? m : m + 1;
    std::vector<Layer> out;
    for (int r = 0; r < n - 1; ++r) {
        Layer l;
        for (int i = 0; i < n / 2; ++i) {
            const int a = i == 0 ? n - 1 : (r + i) % (n - 1);
            const int b = (r + n - 1 - i) % (n - 1);
            if (a < m && b < m) l.push_back(GateOp::rzz(a, b));
        }
        std::sort(l.begin(), l.end(), [](const GateOp& x, const GateOp& y) { return std::pair(x.q0, x.q1) < std::pair(y.q0, y.q1); });
        if (!l.empty()) out.push_back(std::move(l));
    }
    return out;
}

}  // namespace

QuantumKernelSpec build_fixed_ansatz(int m) {
    if (m < 2) throw std::invalid_argument("build_fixed_ansatz: need m >= 2");
    QuantumKernelSpec spec;
    spec.ansatz = Ansatz::Fixed;
    spec.theta = default_theta(m);
    spec.circuit.m = m;
    const auto pairs = all_pairs_layers(m);
    for (int rep = 0; rep < 2; ++rep) {
        spec.circuit.layers.push_back(full_layer(m, &GateOp::h));
        spec.circuit.layers.push_back(full_layer(m, &GateOp::rz));
        for (const auto& l : pairs) spec.circuit.layers.push_back(l);
    }
    spec.circuit.validate();
    return spec;
}

QuantumKernelSpec build_variable_ansatz(int m, const std::vector<Matching>& layers) {
    if (m < 1) throw std::invalid_argument("build_variable_ansatz: need m >= 1");
    QuantumKernelSpec spec;
    spec.ansatz = Ansatz::Variable;
    spec.theta = default_theta(m);
    spec.circuit.m = m;
    spec.circuit.layers.push_back(full_layer(m, &GateOp::h));
    for (const auto& match : layers) {
        Layer l;
        for (auto [i, j] : match) l.push_back(GateOp::rzz(i, j));
        spec.circuit.layers.push_back(std::move(l));
    }
    spec.circuit.layers.push_back(full_layer(m, &GateOp::ry));
    spec.entangling = layers;
    spec.circuit.validate();
    return spec;
}

StateVector statevector_for(const Circuit& circuit, std::span<const double> theta, std::span<const double> x) {
    if (x.size() < static_cast<std::size_t>(circuit.m))
        throw std::invalid_argument("statevector_for: input has fewer components than qubits");
    StateVector psi(circuit.m);
    for (const auto& layer : circuit.layers)
        for (const auto& g : layer) psi.apply(g, encode(x, theta, g));
    return psi;
}

StateVector statevector_for(const QuantumKernelSpec& spec, std::span<const double> x) {
    const auto th = spec.theta.values();
    return statevector_for(spec.circuit, th, x);
}

double fidelity(const StateVector& a, const StateVector& b) {
    const cplx ip = simd::active().inner(b.amplitudes().data(), a.amplitudes().data(), a.size());
    return std::norm(ip);
}

double fidelity_kernel(const QuantumKernelSpec& spec, std::span<const double> x, std::span<const double> xp) {
    return fidelity(statevector_for(spec, x), statevector_for(spec, xp));
}

QuantumKernel::QuantumKernel(Circuit circuit, Ansatz ansatz) : circuit_(std::move(circuit)), ansatz_(ansatz) {
    circuit_.validate();
}

double QuantumKernel::eval(std::span<const double> x, std::span<const double> xp, const ParamVector& params) const {
    const auto th = params.values();
    return fidelity(statevector_for(circuit_, th, x), statevector_for(circuit_, th, xp));
}

std::string QuantumKernel::describe(const ParamVector& params) const {
    std::ostringstream os;
    os << (ansatz_ == Ansatz::Fixed ? "quantum-fixed" : "quantum-variable") << "[m=" << circuit_.m
       << ", layers=" << circuit_.layers.size() << ", theta=";
    for (std::size_t i = 0; i < params.size(); ++i) os << (i ? "," : "") << params[i].value;
    os << "]";
    return os.str();
}

std::vector<StateVector> QuantumKernel::states(const PointMatrix& X, const std::vector<double>& theta) const {
    if (X.cols() != circuit_.m) throw std::invalid_argument("QuantumKernel: input dimension must equal qubit count");
    std::vector<StateVector> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(statevector_for(circuit_, theta, row(X, i)));
    return out;
}

Matrix QuantumKernel::gram(const PointMatrix& X, const ParamVector& params) const {
    const auto psi = states(X, params.values());
    const Eigen::Index n = X.rows();
    Matrix K(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        K(j, j) = fidelity(psi[static_cast<std::size_t>(j)], psi[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < j; ++i)
            K(i, j) = K(j, i) = fidelity(psi[static_cast<std::size_t>(i)], psi[static_cast<std::size_t>(j)]);
    }
    return K;
}

Matrix QuantumKernel::cross(const PointMatrix& Xq, const PointMatrix& X, const ParamVector& params) const {
    const auto th = params.values();
    const auto a = states(Xq, th);
    const auto b = states(X, th);
    Matrix K(Xq.rows(), X.rows());
    for (Eigen::Index j = 0; j < X.rows(); ++j)
        for (Eigen::Index i = 0; i < Xq.rows(); ++i)
            K(i, j) = fidelity(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
    return K;
}

nlohmann::json to_json(const QuantumKernelSpec& spec) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : spec.circuit.layers) {
        nlohmann::json jl = nlohmann::json::array();
        for (const auto& g : l) {
            nlohmann::json jg{{"gate", gate_name(g.kind)}};
            jg["qubits"] = g.kind == GateKind::RZZ ? nlohmann::json{g.q0, g.q1} : nlohmann::json{g.q0};
            if (g.fixed_angle) jg["angle"] = *g.fixed_angle;
            jl.push_back(std::move(jg));
        }
        layers.push_back(std::move(jl));
    }
    nlohmann::json theta = nlohmann::json::array();
    for (const auto& p : spec.theta) theta.push_back(p.value);
    nlohmann::json ent = nlohmann::json::array();
    for (const auto& match : spec.entangling) {
        nlohmann::json jm = nlohmann::json::array();
        for (auto [i, j] : match) jm.push_back({i, j});
        ent.push_back(std::move(jm));
    }
    return {{"m", spec.circuit.m},
            {"ansatz", spec.ansatz == Ansatz::Fixed ? "fixed" : "variable"},
            {"encoding", spec.ansatz == Ansatz::Fixed ? "fixed-ansatz" : "variable-ansatz"},
            {"theta", theta},
            {"entangling", ent},
            {"layers", layers}};
}

QuantumKernelSpec spec_from_json(const nlohmann::json& j) {
    QuantumKernelSpec spec;
    spec.circuit.m = j.at("m").get<int>();
    const std::string ansatz = j.value("ansatz", std::string("variable"));
    if (ansatz != "fixed" && ansatz != "variable") throw std::invalid_argument("circuit json: unknown ansatz " + ansatz);
    spec.ansatz = ansatz == "fixed" ? Ansatz::Fixed : Ansatz::Variable;
    for (const auto& jl : j.at("layers")) {
        Layer l;
        for (const auto& jg : jl) {
            const std::string name = jg.at("gate").get<std::string>();
            const auto& qs = jg.at("qubits");
            GateOp g;
            if (name == "H") g = GateOp::h(qs.at(0).get<int>());
            else if (name == "RZ") g = GateOp::rz(qs.at(0).get<int>());
            else if (name == "RY") g = GateOp::ry(qs.at(0).get<int>());
            else if (name == "I") g = GateOp::id(qs.at(0).get<int>());
            else if (name == "RZZ") g = GateOp::rzz(qs.at(0).get<int>(), qs.at(1).get<int>());
            else throw std::invalid_argument("circuit json: unknown gate " + name);
            if (jg.contains("angle")) g.fixed_angle = jg["angle"].get<double>();
            l.push_back(g);
        }
        spec.circuit.layers.push_back(std::move(l));
    }
    spec.circuit.validate();
    spec.theta = default_theta(spec.circuit.m);
    if (j.contains("theta")) {
        const auto v = j["theta"].get<std::vector<double>>();
        spec.theta = spec.theta.with_values(v);
    }
    if (j.contains("entangling"))
        for (const auto& jm : j["entangling"]) {
            Matching match;
            for (const auto& p : jm) match.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
            spec.entangling.push_back(std::move(match));
        }
    return spec;
}

std::string canonical_layers(const std::vector<Matching>& layers) {
    std::string s;
    for (const auto& match : layers) {
        Matching sorted = match;
        for (auto& [i, j] : sorted)
            if (i > j) std::swap(i, j);
        std::sort(sorted.begin(), sorted.end());
        s += '[';
        for (auto [i, j] : sorted) s += "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        s += ']';
    }
    return s;
}

}  // namespace qgpr::quantum
