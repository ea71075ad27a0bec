#pragma once

// Noise-free statevector simulation of data-encoding circuits and the
// fidelity kernel k(x, x') = |<psi(x')|psi(x)>|^2 built on it.

#include "qgpr/gp.hpp"
#include "qgpr/simd/kernels.hpp"
#include "qgpr/types.hpp"

#include "json.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qgpr::quantum {

using cplx = simd::cplx;

inline constexpr int kMaxQubits = 16;

enum class GateKind { H, RZ, RY, RZZ, ID };

std::string_view gate_name(GateKind kind);

struct GateOp {
    GateKind kind = GateKind::ID;
    int q0 = 0;
    int q1 = -1;  // RZZ only, q0 < q1
    /// When set the angle is this constant; otherwise it is data-encoded.
    std::optional<double> fixed_angle;

    static GateOp h(int q) { return {GateKind::H, q, -1, {}}; }
    static GateOp rz(int q) { return {GateKind::RZ, q, -1, {}}; }
    static GateOp ry(int q) { return {GateKind::RY, q, -1, {}}; }
    static GateOp rzz(int i, int j) { return {GateKind::RZZ, std::min(i, j), std::max(i, j), {}}; }
    static GateOp id(int q) { return {GateKind::ID, q, -1, {}}; }

    bool operator==(const GateOp&) const = default;
};

using Layer = std::vector<GateOp>;

/// Ordered layers; each qubit is touched at most once per layer.
struct Circuit {
    int m = 0;
    std::vector<Layer> layers;

    void validate() const;
    std::size_t gate_count(GateKind kind) const;
};

/// 2^m amplitudes, qubit q is bit q of the basis index.
class StateVector {
public:
    explicit StateVector(int m);

    int qubits() const { return m_; }
    std::size_t size() const { return amp_.size(); }
    std::span<const cplx> amplitudes() const { return amp_; }
    std::span<cplx> amplitudes() { return amp_; }
    double norm2() const;

    /// H and ID ignore `angle`.
    void apply(const GateOp& gate, double angle);

private:
    int m_;
    std::vector<cplx> amp_;
};

/// Pairs (i, j) of a single entangling layer.
using Matching = std::vector<std::pair<int, int>>;

enum class Ansatz { Fixed, Variable };

struct QuantumKernelSpec {
    Circuit circuit;
    /// [theta_1 .. theta_m, Theta]
    ParamVector theta;
    Ansatz ansatz = Ansatz::Variable;
    /// Variable ansatz only: the entangling layers U_e.
    std::vector<Matching> entangling;
};

/// Default bounds: theta_i in [1e-2, 1e2], Theta in [1e-3, 1e2], both log-scale.
ParamVector default_theta(int m);

/// Gate angle for input x: RY/RZ on qubit i -> x_i / theta_i, RZZ on (i, j) -> exp(-(x_i - x_j)^2 / Theta).
double encode(std::span<const double> x, std::span<const double> theta, const GateOp& gate);

/// U = U_b H U_b H with U_b = RZ on every qubit plus RZZ on every pair.
QuantumKernelSpec build_fixed_ansatz(int m);
/// U = RY^m U_e H^m.
QuantumKernelSpec build_variable_ansatz(int m, const std::vector<Matching>& layers);

StateVector statevector_for(const Circuit& circuit, std::span<const double> theta, std::span<const double> x);
StateVector statevector_for(const QuantumKernelSpec& spec, std::span<const double> x);

double fidelity(const StateVector& a, const StateVector& b);
double fidelity_kernel(const QuantumKernelSpec& spec, std::span<const double> x, std::span<const double> xp);

/// KernelFn over a fixed circuit; params are [theta_1 .. theta_m, Theta].
class QuantumKernel final : public KernelFn {
public:
    QuantumKernel(Circuit circuit, Ansatz ansatz);
    explicit QuantumKernel(const QuantumKernelSpec& spec) : QuantumKernel(spec.circuit, spec.ansatz) {}

    double eval(std::span<const double> x, std::span<const double> xp, const ParamVector& params) const override;
    std::size_t param_count() const override { return static_cast<std::size_t>(circuit_.m) + 1; }
    std::string describe(const ParamVector& params) const override;
    Matrix gram(const PointMatrix& X, const ParamVector& params) const override;
    Matrix cross(const PointMatrix& Xq, const PointMatrix& X, const ParamVector& params) const override;

    const Circuit& circuit() const { return circuit_; }

private:
    std::vector<StateVector> states(const PointMatrix& X, const std::vector<double>& theta) const;

    Circuit circuit_;
    Ansatz ansatz_;
};

nlohmann::json to_json(const QuantumKernelSpec& spec);
QuantumKernelSpec spec_from_json(const nlohmann::json& j);

/// Canonical text of a matching sequence, e.g. "[(0,1)(2,3)][(0,2)]".
std::string canonical_layers(const std::vector<Matching>& layers);

}  // namespace qgpr::quantum
