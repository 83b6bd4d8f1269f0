#pragma once

#include "braidlab/engine.hpp"
#include "braidlab/holonomy.hpp"

#include <cstdio>
#include <map>

namespace braidlab {

// idle -> equator at azimuth 0 -> along the equator by target_phi -> back to idle
inline ParamPath clock_path(double target_phi, int steps_per_segment = 1000, Arm arm = Arm::Left)
{
    if (std::abs(target_phi) > 2 * pi + 1e-12) throw std::invalid_argument("clock_path: |target_phi| must be <= 2 pi");
    if (steps_per_segment < 1) throw std::invalid_argument("clock_path: steps_per_segment >= 1");
    ParamPath p;
    p.arm = arm;
    p.segments = {{{0, 0}, {pi / 2, 0}, steps_per_segment},
                  {{pi / 2, 0}, {pi / 2, target_phi}, steps_per_segment},
                  {{pi / 2, target_phi}, {0, target_phi}, steps_per_segment}};
    return p;
}

struct TrotterSegment {
    PathPoint start, end;
    int steps = 0;
    std::vector<PathPoint> grid; // point reached after each step
};

struct TrotterPlan {
    Arm arm = Arm::Left;
    int n_qubits = 4;
    double target_phi = 0.0; // enclosed solid angle
    double delta_tilde = 0.0;
    int n_equator = 0;
    bool rounded = false; // a segment count was rounded up
    std::vector<TrotterSegment> segments;
    std::vector<GateOp> gates;

    int total_steps() const
    {
        int n = 0;
        for (const auto& s : segments) n += s.steps;
        return n;
    }
    std::vector<int> segment_steps() const
    {
        std::vector<int> out;
        for (const auto& s : segments) out.push_back(s.steps);
        return out;
    }
};

// coupling fractions below this are treated as zero and their gate is dropped
inline constexpr double zero_coupling = 1e-12;

// gates of one Trotter step at (polar, azimuth): R_zz then R_yy then R_xx in time order
inline std::vector<GateOp> trotter_step(Arm arm, const PathPoint& p, double delta_tilde)
{
    ClockArm unit{1.0, p.a, p.b};
    auto [fx, fy, fz] = unit.cartesian();
    ArmPairs pr = arm_pairs(arm);
    std::vector<GateOp> out;
    if (std::abs(fz) > zero_coupling) out.push_back(GateOp::rotation('Z', 'Z', pr.z.a, pr.z.b, delta_tilde * fz));
    if (std::abs(fy) > zero_coupling) out.push_back(GateOp::rotation('Y', 'Y', pr.y.a, pr.y.b, delta_tilde * fy));
    if (std::abs(fx) > zero_coupling) out.push_back(GateOp::rotation('X', 'X', pr.x.a, pr.x.b, delta_tilde * fx));
    return out;
}

// constant angular step delta = |Omega| / N_equator; each segment gets ceil(length / delta) steps
inline TrotterPlan trotterize(const ParamPath& path, double delta_tilde, int n_equator, const SystemSpec& system)
{
    if (!(delta_tilde > 0)) throw std::invalid_argument("trotterize: delta_tilde must be positive");
    if (n_equator < 1) throw std::invalid_argument("trotterize: N_equator must be >= 1");
    check_arm(system, path.arm);
    TrotterPlan plan;
    plan.arm = path.arm;
    plan.n_qubits = system.n_qubits();
    plan.target_phi = path.solid_angle();
    plan.delta_tilde = delta_tilde;
    plan.n_equator = n_equator;
    const double omega = std::abs(plan.target_phi);
    const double delta = (omega > 1e-12 ? omega : pi / 2) / n_equator;
    for (const auto& sg : path.segments) {
        double mid = 0.5 * (sg.start.a + sg.end.a);
        double len = std::max(std::abs(sg.end.a - sg.start.a), std::abs(sg.end.b - sg.start.b) * std::abs(std::sin(mid)));
        if (len < 1e-12) continue;
        double ratio = len / delta;
        int n = static_cast<int>(std::ceil(ratio - 1e-9));
        if (std::abs(ratio - n) > 1e-9) plan.rounded = true;
        TrotterSegment ts{sg.start, sg.end, n, {}};
        for (int k = 1; k <= n; ++k) {
            double t = static_cast<double>(k) / n;
            PathPoint p{sg.start.a + t * (sg.end.a - sg.start.a), sg.start.b + t * (sg.end.b - sg.start.b)};
            ts.grid.push_back(p);
            for (auto& g : trotter_step(path.arm, p, delta_tilde)) plan.gates.push_back(g);
        }
        plan.segments.push_back(std::move(ts));
    }
    return plan;
}

// convenience: clock loop for an arm
inline TrotterPlan clock_plan(double target_phi, double delta_tilde, int n_equator, const SystemSpec& system, Arm arm = Arm::Left)
{
    return trotterize(clock_path(target_phi, 1, arm), delta_tilde, n_equator, system);
}

inline TrotterPlan empty_plan(const SystemSpec& system, Arm arm = Arm::Left)
{
    TrotterPlan p;
    p.arm = arm;
    p.n_qubits = system.n_qubits();
    return p;
}

// exp(-i Omega G / 2) with G = Z_L (left arm, logical qubit 0), Z_L' (right arm), X_L X_L' (middle arm)
inline Mat ideal_gate(Arm arm, double omega, const SystemSpec& system)
{
    const int nl = system.n_logical();
    Mat g = arm == Arm::Left ? logical_pauli_matrix('Z', 0, nl)
          : arm == Arm::Right ? logical_pauli_matrix('Z', 1, nl)
                              : Mat(logical_pauli_matrix('X', 0, nl) * logical_pauli_matrix('X', 1, nl));
    return expm_hermitian(g, omega / 2);
}
inline Mat ideal_gate(const TrotterPlan& plan, const SystemSpec& system) { return ideal_gate(plan.arm, plan.target_phi, system); }

// ---- logical state preparation

enum class PrepMethod { ExplicitAmplitudes, CircuitReplay };

inline Vec logical_single(const std::string& label)
{
    const double r = 1.0 / std::sqrt(2.0);
    Vec v(2);
    if (label == "0") v << 1, 0;
    else if (label == "1") v << 0, 1;
    else if (label == "+") v << r, r;
    else if (label == "i+") v << r, cplx(0, r);
    else if (label == "-") v << r, -r;
    else if (label == "i-") v << r, cplx(0, -r);
    else throw std::invalid_argument("unknown logical state label '" + label + "'");
    return v;
}

inline Vec logical_coefficients(const std::vector<std::string>& labels)
{
    Mat v = Mat::Identity(1, 1);
    for (const auto& l : labels) v = kron(v, Mat(logical_single(l)));
    return v.col(0);
}

namespace circuits {
using G = GateOp;
// four-qubit code, wire k = qubit k
inline std::vector<GateOp> four_qubit(const std::string& label)
{
    if (label == "0")
        return {G::single("X", 0), G::single("Ry", 1, -pi / 2), G::single("Ry", 2, pi / 2), G::controlled("Y", 1, 0),
                G::controlled("X", 2, 0), G::controlled("X", 2, 1), G::controlled("X", 2, 3), G::single("X", 2)};
    if (label == "1")
        return {G::single("Rx", 0, pi / 2), G::single("X", 1), G::single("H", 2), G::controlled("X", 0, 3),
                G::controlled("X", 2, 0), G::controlled("X", 0, 1), G::controlled("X", 0, 3)};
    if (label == "+")
        return {G::single("Rx", 0, pi / 2), G::single("X", 1), G::single("H", 2), G::controlled("X", 0, 3),
                G::controlled("X", 2, 0), G::single("H", 3), G::controlled("X", 0, 1), G::controlled("Z", 1, 2)};
    if (label == "i+")
        return {G::single("Rx", 0, pi / 2), G::single("X", 1), G::single("H", 2), G::single("S", 1),
                G::controlled("X", 0, 3), G::controlled("X", 2, 0), G::single("H", 3), G::controlled("X", 0, 1),
                G::single("Sdg", 2), G::single("Sdg", 3), G::controlled("Z", 1, 2), G::controlled("Z", 2, 3)};
    throw std::invalid_argument("no initialization circuit for '" + label + "'");
}

// q0 block, wire indices (wire w acts on qubit 5 - w)
inline std::vector<GateOp> q0_wires(const std::string& label)
{
    if (label == "0")
        return {G::single("H", 0), G::single("X", 1), G::single("X", 2), G::single("H", 3), G::single("H", 4),
                G::controlled("X", 0, 1), G::single("Sdg", 2), G::controlled("Y", 3, 2), G::controlled("X", 4, 2),
                G::controlled("X", 4, 3), G::single("Z", 3), G::controlled("X", 4, 5), G::single("Y", 4)};
    if (label == "1")
        return {G::single("H", 0), G::single("X", 1), G::single("H", 3), G::single("H", 4), G::single("Z", 0),
                G::controlled("Y", 3, 2), G::controlled("X", 0, 1), G::controlled("X", 4, 2), G::controlled("X", 4, 3),
                G::single("Z", 3), G::controlled("X", 4, 5), G::single("Y", 4)};
    if (label == "+")
        return {G::single("H", 0), G::single("X", 1), G::single("H", 2), G::single("H", 3), G::single("H", 4),
                G::single("Z", 0), G::single("S", 2), G::controlled("X", 0, 1), G::controlled("Y", 3, 2),
                G::controlled("X", 4, 2), G::single("Z", 2), G::controlled("X", 4, 3), G::controlled("Z", 0, 2),
                G::controlled("X", 4, 5), G::controlled("Z", 0, 3), G::single("Y", 4)};
    if (label == "i+")
        return {G::single("H", 0), G::single("X", 1), G::single("H", 2), G::single("H", 3), G::single("H", 4),
                G::single("Z", 0), G::controlled("Y", 3, 2), G::controlled("X", 0, 1), G::controlled("X", 4, 2),
                G::single("Z", 2), G::controlled("X", 4, 3), G::controlled("Z", 0, 2), G::controlled("X", 4, 5),
                G::controlled("Z", 0, 3), G::single("Ry", 4, -pi)};
    throw std::invalid_argument("no initialization circuit for '" + label + "'");
}

// q1 block, wire indices (wires 0,1,2,3 act on 3',0',1',2')
inline std::vector<GateOp> q1_wires(const std::string& label)
{
    if (label == "0")
        return {G::single("SX", 0), G::single("H", 1), G::single("X", 2), G::single("X", 3), G::controlled("X", 0, 2),
                G::controlled("X", 1, 0), G::controlled("X", 0, 3), G::controlled("X", 0, 2)};
    if (label == "1")
        return {G::single("SX", 0), G::single("H", 1), G::single("X", 2), G::controlled("X", 0, 2), G::controlled("X", 1, 0),
                G::controlled("X", 0, 3), G::single("Z", 1), G::controlled("X", 0, 2)};
    if (label == "+")
        return {G::single("SX", 0), G::single("H", 1), G::single("X", 2), G::single("H", 3), G::controlled("X", 0, 2),
                G::controlled("Y", 1, 0), G::single("S", 1), G::controlled("X", 0, 3), G::controlled("X", 0, 2),
                G::controlled("Z", 1, 3), G::single("Z", 2)};
    if (label == "i+")
        return {G::single("SX", 0), G::single("H", 1), G::single("X", 2), G::single("H", 3), G::controlled("X", 0, 2),
                G::single("Sdg", 3), G::controlled("Y", 1, 0), G::single("S", 1), G::controlled("X", 0, 3),
                G::controlled("X", 0, 2), G::controlled("Z", 1, 3), G::single("Z", 2)};
    throw std::invalid_argument("no initialization circuit for '" + label + "'");
}

inline std::vector<GateOp> remap(std::vector<GateOp> gates, const std::function<int(int)>& wire_to_qubit)
{
    for (auto& g : gates) {
        g.qubit_a = wire_to_qubit(g.qubit_a);
        if (g.kind != GateKind::OneQubit) g.qubit_b = wire_to_qubit(g.qubit_b);
    }
    return gates;
}
} // namespace circuits

inline std::vector<GateOp> init_circuit(const std::vector<std::string>& labels, const SystemSpec& system)
{
    if (static_cast<int>(labels.size()) != system.n_logical()) throw std::invalid_argument("one label per logical qubit");
    if (system.kind != SystemKind::TenQubit) return circuits::four_qubit(labels[0]);
    auto out = circuits::remap(circuits::q0_wires(labels[0]), [](int w) { return 5 - w; });
    static const int q1_map[4] = {9, 6, 7, 8};
    auto b = circuits::remap(circuits::q1_wires(labels[1]), [](int w) { return q1_map[w]; });
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline QuantumState prepare_logical(const std::vector<std::string>& labels, const SystemSpec& system,
                                    PrepMethod method = PrepMethod::ExplicitAmplitudes, StateMode mode = StateMode::PureVector,
                                    double depolarizing = 0.0)
{
    if (static_cast<int>(labels.size()) != system.n_logical()) throw std::invalid_argument("one label per logical qubit");
    if (method == PrepMethod::ExplicitAmplitudes) {
        Vec c = logical_coefficients(labels);
        Vec v = code_matrix(system) * c;
        QuantumState s = QuantumState::from_vector(v);
        return mode == StateMode::DensityMatrix ? s.to_density() : s;
    }
    if (depolarizing > 0.0) mode = StateMode::DensityMatrix;
    QuantumState s = QuantumState::zero(system.n_qubits(), mode);
    run_circuit(s, init_circuit(labels, system), depolarizing);
    return s;
}

inline QuantumState execute_braid(const TrotterPlan& plan, QuantumState input, double depolarizing = 0.0)
{
    if (plan.n_qubits != input.n_qubits()) throw DimensionError("execute_braid: plan and state sizes differ");
    if (depolarizing > 0.0 && input.pure()) input = input.to_density();
    run_circuit(input, plan.gates, depolarizing);
    return input;
}

struct LogicalGate {
    Mat unitary;    // polar part of the code-space block
    Mat block;      // <L_i| U |L_j>
    double leakage; // mean population that left the code space
    bool valid;     // leakage <= 0.5
};

inline LogicalGate extract_logical_gate(const TrotterPlan& plan, const SystemSpec& system)
{
    Mat code = code_matrix(system);
    const Eigen::Index d = code.cols();
    Mat block(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        QuantumState out = execute_braid(plan, QuantumState::from_vector(code.col(j)));
        block.col(j) = code.adjoint() * out.vector();
    }
    double leak = 1.0 - block.squaredNorm() / static_cast<double>(d);
    leak = std::max(0.0, leak);
    return {polar_unitary(block), block, leak, leak <= 0.5};
}

// |Tr(U^dagger M)|^2 / d^2 for a (possibly non-unitary) code-space block M
inline double block_fidelity(const Mat& ideal, const Mat& block)
{
    const double d = static_cast<double>(ideal.rows());
    return std::norm((ideal.adjoint() * block).trace()) / (d * d);
}

// ---- circuit text formats

enum class CircuitFormat { Native, Qasm };

inline CircuitFormat parse_circuit_format(const std::string& s)
{
    if (s == "native") return CircuitFormat::Native;
    if (s == "qasm") return CircuitFormat::Qasm;
    throw std::invalid_argument("unknown circuit format '" + s + "'");
}

namespace detail {
inline std::string fixed12(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", x == 0.0 ? 0.0 : x);
    return buf;
}
} // namespace detail

inline std::string export_circuit(const TrotterPlan& plan, CircuitFormat fmt)
{
    std::ostringstream os;
    if (fmt == CircuitFormat::Native) {
        os << "# braidlab circuit\n# qubits " << plan.n_qubits << "\n";
        for (const auto& g : plan.gates) {
            if (g.kind != GateKind::TwoPauliRotation) throw std::logic_error("export_circuit: plans hold rotations only");
            os << 'R' << g.axis_a << g.axis_b << " q" << g.qubit_a << " q" << g.qubit_b << " " << detail::fixed12(g.angle) << "\n";
        }
        return os.str();
    }
    os << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" << plan.n_qubits << "];\n";
    for (const auto& g : plan.gates) {
        if (g.kind != GateKind::TwoPauliRotation || g.axis_a != g.axis_b) throw std::logic_error("export_circuit: qasm needs rxx/ryy/rzz");
        char ax = static_cast<char>(std::tolower(g.axis_a));
        os << 'r' << ax << ax << "(" << detail::fixed12(g.angle) << ") q[" << g.qubit_a << "],q[" << g.qubit_b << "];\n";
    }
    return os.str();
}

inline std::string export_circuit(const TrotterPlan& plan, const std::string& fmt)
{
    return export_circuit(plan, parse_circuit_format(fmt));
}

// parse the native format back into rotation gates
inline std::vector<GateOp> parse_native_circuit(const std::string& text, int* n_qubits = nullptr)
{
    std::istringstream is(text);
    std::string line;
    std::vector<GateOp> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            int n;
            if (hs >> key >> n && key == "qubits" && n_qubits) *n_qubits = n;
            continue;
        }
        std::istringstream ls(line);
        std::string op, qa, qb;
        double angle;
        if (!(ls >> op >> qa >> qb >> angle) || op.size() != 3 || op[0] != 'R' || qa[0] != 'q' || qb[0] != 'q')
            throw std::invalid_argument("bad circuit line: " + line);
        out.push_back(GateOp::rotation(op[1], op[2], std::stoi(qa.substr(1)), std::stoi(qb.substr(1)), angle));
    }
    return out;
}

// ---- named gates of the protocol

struct GateTarget {
    std::string name;
    Arm arm;
    double phi;
};

inline GateTarget named_gate(const std::string& name)
{
    static const std::map<std::string, GateTarget> table{
        {"I", {"I", Arm::Left, 0.0}},         {"S", {"S", Arm::Left, pi / 2}},
        {"Sdg", {"Sdg", Arm::Left, -pi / 2}}, {"T", {"T", Arm::Left, pi / 4}},
        {"Tdg", {"Tdg", Arm::Left, -pi / 4}}, {"S1", {"S1", Arm::Right, pi / 2}},
        {"Rxx", {"Rxx", Arm::Middle, pi / 2}}, {"Rxx_dg", {"Rxx_dg", Arm::Middle, -pi / 2}},
    };
    auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown gate '" + name + "'");
    return it->second;
}

// plan for a named gate; the identity runs no rotations
inline TrotterPlan gate_plan(const GateTarget& g, double delta_tilde, int n_equator, const SystemSpec& system)
{
    if (g.name == "I" || std::abs(g.phi) < 1e-15) return empty_plan(system, g.arm);
    return clock_plan(g.phi, delta_tilde, n_equator, system, g.arm);
}

} // namespace braidlab
