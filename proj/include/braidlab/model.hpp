#pragma once

#include "braidlab/pauli.hpp"

#include <array>
#include <string>
#include <vector>

namespace braidlab {

struct ClockArm {
    double magnitude = 1.0;
    double polar = 0.0;   // theta in [0, pi]
    double azimuth = 0.0; // phi

    // (x, y, z) components
    std::array<double, 3> cartesian() const
    {
        double s = std::sin(polar);
        return {magnitude * s * std::cos(azimuth), magnitude * s * std::sin(azimuth), magnitude * std::cos(polar)};
    }
    bool idle() const { return polar == 0.0; }
};

enum class SystemKind { FourQubit, TenQubit, TetradTorus };
enum class Arm { Left, Right, Middle };

inline std::string to_string(SystemKind k)
{
    switch (k) {
    case SystemKind::FourQubit: return "FourQubit";
    case SystemKind::TenQubit: return "TenQubit";
    case SystemKind::TetradTorus: return "TetradTorus";
    }
    return "?";
}
inline std::string to_string(Arm a)
{
    switch (a) {
    case Arm::Left: return "left";
    case Arm::Right: return "right";
    case Arm::Middle: return "middle";
    }
    return "?";
}

struct SystemSpec {
    SystemKind kind = SystemKind::FourQubit;
    ClockArm left;   // Delta (theta, phi)
    ClockArm right;  // Delta' (theta', phi'), TenQubit only
    ClockArm middle; // Lambda (alpha, beta), TenQubit only
    std::array<double, 3> tetrad{0.0, 0.0, 0.0}; // Delta-bar (x, y, z), TetradTorus only

    static SystemSpec four_qubit(double theta = 0, double phi = 0, double mag = 1.0)
    {
        SystemSpec s;
        s.left = {mag, theta, phi};
        return s;
    }
    static SystemSpec ten_qubit()
    {
        SystemSpec s;
        s.kind = SystemKind::TenQubit;
        return s;
    }

    int n_qubits() const { return kind == SystemKind::TenQubit ? 10 : 4; }
    int n_logical() const { return kind == SystemKind::TenQubit ? 2 : 1; }
    int logical_dim() const { return 1 << n_logical(); }

    bool idle() const
    {
        if (kind == SystemKind::TenQubit) return left.idle() && right.idle() && middle.idle();
        return left.idle();
    }

    const ClockArm& arm(Arm a) const { return a == Arm::Left ? left : a == Arm::Right ? right : middle; }
    ClockArm& arm(Arm a) { return a == Arm::Left ? left : a == Arm::Right ? right : middle; }

    SystemSpec with_arm(Arm a, double polar, double azimuth) const
    {
        SystemSpec s = *this;
        s.arm(a).polar = polar;
        s.arm(a).azimuth = azimuth;
        return s;
    }
};

struct QubitPair {
    int a, b;
};
// coupling pairs of one clock arm, in (x, y, z) order
struct ArmPairs {
    QubitPair x, y, z;
};

inline ArmPairs arm_pairs(Arm a)
{
    switch (a) {
    case Arm::Left: return {{0, 3}, {0, 2}, {0, 1}};
    case Arm::Right: return {{6, 9}, {6, 8}, {6, 7}};
    case Arm::Middle: return {{2, 4}, {4, 9}, {4, 5}};
    }
    throw std::invalid_argument("unknown arm");
}

inline void check_arm(const SystemSpec& s, Arm a)
{
    if (s.kind != SystemKind::TenQubit && a != Arm::Left)
        throw std::invalid_argument("only the left arm exists on the four-qubit systems");
}

namespace detail {
inline void add_arm(OperatorSum& h, int n, const ClockArm& arm, const ArmPairs& pr)
{
    auto [dx, dy, dz] = arm.cartesian();
    h.add(dz, PauliString::on(n, {{pr.z.a, 'Z'}, {pr.z.b, 'Z'}}));
    h.add(dy, PauliString::on(n, {{pr.y.a, 'Y'}, {pr.y.b, 'Y'}}));
    h.add(dx, PauliString::on(n, {{pr.x.a, 'X'}, {pr.x.b, 'X'}}));
}
} // namespace detail

inline OperatorSum hamiltonian(const SystemSpec& s)
{
    const int n = s.n_qubits();
    OperatorSum h(n);
    detail::add_arm(h, n, s.left, arm_pairs(Arm::Left));
    if (s.kind == SystemKind::TenQubit) {
        detail::add_arm(h, n, s.right, arm_pairs(Arm::Right));
        detail::add_arm(h, n, s.middle, arm_pairs(Arm::Middle));
    }
    if (s.kind == SystemKind::TetradTorus) {
        h.add(s.tetrad[2], PauliString::on(n, {{2, 'Z'}, {3, 'Z'}}));
        h.add(s.tetrad[1], PauliString::on(n, {{1, 'Y'}, {3, 'Y'}}));
        h.add(s.tetrad[0], PauliString::on(n, {{1, 'X'}, {2, 'X'}}));
    }
    // cos(pi/2) and friends leave ~1e-17 residues
    double scale = std::max({1.0, s.left.magnitude, s.right.magnitude, s.middle.magnitude});
    return h.pruned(1e-14 * scale);
}

// named operators of the two lattices; n selects 4 or 10 qubits
inline PauliString named_operator(const std::string& name, int n)
{
    auto need10 = [&] {
        if (n != 10) throw std::invalid_argument(name + " exists only on the ten-qubit system");
    };
    if (name == "W1") return PauliString::on(n, {{0, 'Z'}, {2, 'X'}, {3, 'Y'}});
    if (name == "W2") return PauliString::on(n, {{0, 'Y'}, {1, 'X'}, {3, 'Z'}});
    if (name == "W3") return PauliString::on(n, {{0, 'X'}, {1, 'Y'}, {2, 'Z'}});
    if (name == "h") return PauliString::on(n, {{0, 'Z'}, {1, 'Z'}});
    if (name == "n") return PauliString::on(n, {{2, 'Z'}, {3, 'Z'}});
    if (name == "W4") return need10(), PauliString::on(n, {{6, 'Z'}, {8, 'X'}, {9, 'Y'}});
    if (name == "W5") return need10(), PauliString::on(n, {{6, 'X'}, {7, 'Y'}, {8, 'Z'}});
    if (name == "W6") return need10(), PauliString::on(n, {{0, 'X'}, {1, 'Y'}, {2, 'Z'}, {4, 'Y'}, {5, 'Y'}});
    if (name == "W7") return need10(), PauliString::on(n, {{4, 'X'}, {5, 'X'}, {6, 'Y'}, {7, 'X'}, {9, 'Z'}});
    if (name == "h'") return need10(), PauliString::on(n, {{6, 'Z'}, {7, 'Z'}});
    if (name == "n'") return need10(), PauliString::on(n, {{8, 'Z'}, {9, 'Z'}});
    if (name == "ha") return need10(), PauliString::on(n, {{4, 'Z'}, {5, 'Z'}});
    throw std::invalid_argument("unknown operator name '" + name + "'");
}

struct NamedString {
    std::string name;
    PauliString op;
};

inline std::vector<NamedString> conserved_set(const SystemSpec& s)
{
    const int n = s.n_qubits();
    std::vector<std::string> names = s.kind == SystemKind::TenQubit
        ? std::vector<std::string>{"W1", "W2", "W4", "W5", "W6", "W7"}
        : std::vector<std::string>{"W1", "W2", "W3"};
    std::vector<NamedString> out;
    for (const auto& nm : names) out.push_back({nm, named_operator(nm, n)});
    return out;
}

inline std::vector<NamedString> energy_and_parity_operators(const SystemSpec& s)
{
    const int n = s.n_qubits();
    std::vector<std::string> names = s.kind == SystemKind::TenQubit
        ? std::vector<std::string>{"h", "n", "h'", "n'", "ha"}
        : std::vector<std::string>{"h", "n"};
    std::vector<NamedString> out;
    for (const auto& nm : names) out.push_back({nm, named_operator(nm, n)});
    return out;
}

namespace detail {
inline Vec ket_sum(int n, std::initializer_list<std::pair<const char*, cplx>> items)
{
    Vec v = Vec::Zero(Eigen::Index{1} << n);
    for (auto [bits, c] : items) v(std::stoul(bits, nullptr, 2)) += c;
    return v;
}
} // namespace detail

// explicit logical states of the four-qubit code
inline std::array<Vec, 2> four_qubit_code_states()
{
    const cplx h{0.5, 0}, ih{0, 0.5};
    Vec l0 = detail::ket_sum(4, {{"0101", h}, {"1010", h}, {"0110", ih}, {"1001", ih}});
    Vec l1 = detail::ket_sum(4, {{"0100", h}, {"1011", h}, {"0111", -ih}, {"1000", -ih}});
    return {l0, l1};
}

// q0 block (qubits 0..5) of the ten-qubit code
inline std::array<Vec, 2> q0_code_states()
{
    const double r = std::sqrt(2.0) / 4;
    const cplx a{r, 0}, b{0, r};
    Vec l0 = detail::ket_sum(6, {{"010101", a}, {"010110", a}, {"101001", a}, {"101010", a},
                                 {"011001", b}, {"011010", b}, {"100101", b}, {"100110", b}});
    Vec l1 = detail::ket_sum(6, {{"011101", -a}, {"011110", a}, {"100001", -a}, {"100010", a},
                                 {"010001", -b}, {"010010", b}, {"101101", -b}, {"101110", b}});
    return {l0, l1};
}

// q1 block (qubits 0'..3'). |1> is generated from |0> by the logical flip -sigma^y on 3',
// which keeps it in the W5 = -1 sector.
inline std::array<Vec, 2> q1_code_states()
{
    const double r = std::sqrt(2.0) / 4;
    const cplx p = r * cplx(1, 1), m = r * cplx(-1, 1);
    Vec l0 = detail::ket_sum(4, {{"0110", p}, {"1001", p}, {"0101", -m}, {"1010", -m}});
    Vec l1 = -apply_pauli(PauliString::on(4, {{3, 'Y'}}), l0);
    return {l0, l1};
}

// code basis in logical computational order (index = 2 a + b for two logical qubits)
inline std::vector<Vec> code_basis(const SystemSpec& s)
{
    if (s.kind != SystemKind::TenQubit) {
        auto l = four_qubit_code_states();
        return {l[0], l[1]};
    }
    auto a = q0_code_states();
    auto b = q1_code_states();
    std::vector<Vec> out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.push_back(kron(Mat(a[i]), Mat(b[j])).col(0));
    return out;
}

inline Mat code_matrix(const SystemSpec& s)
{
    auto basis = code_basis(s);
    Mat b(basis[0].size(), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = basis[i];
    return b;
}

// restriction B^dagger P B of a string to the code space
inline Mat restrict_to_code(const PauliString& p, const Mat& code)
{
    Mat out(code.cols(), code.cols());
    for (Eigen::Index j = 0; j < code.cols(); ++j) out.col(j) = code.adjoint() * apply_pauli(p, code.col(j));
    return out;
}

struct LogicalPaulis {
    PauliString x, y, z;
    const PauliString& operator[](char c) const { return c == 'X' ? x : c == 'Y' ? y : z; }
};

// Logical Pauli on qubit j of the code as a d x d matrix
inline Mat logical_pauli_matrix(char c, int j, int n_logical)
{
    Mat single = c == 'X' ? pauli_mat::x() : c == 'Y' ? pauli_mat::y() : c == 'Z' ? pauli_mat::z() : pauli_mat::id();
    Mat out = Mat::Identity(1, 1);
    for (int q = 0; q < n_logical; ++q) out = kron(out, q == j ? single : pauli_mat::id());
    return out;
}

namespace detail {
// choose the sign of a phase-free string so that it acts as the standard Pauli on the code
inline PauliString fix_phase(const PauliString& candidate, char which, int j, int n_logical, const Mat& code)
{
    PauliString p = candidate.stripped();
    Mat r = restrict_to_code(p, code);
    Mat target = logical_pauli_matrix(which, j, n_logical);
    if ((r - target).norm() < 1e-10) return p;
    if ((r + target).norm() < 1e-10) return p.with_phase(2);
    throw std::logic_error("logical operator candidate " + p.letters() + " does not act as a Pauli on the code");
}
} // namespace detail

// one triple per logical qubit
inline std::vector<LogicalPaulis> logical_operators(const SystemSpec& s)
{
    const Mat code = code_matrix(s);
    const int nl = s.n_logical();
    auto fix = [&](const PauliString& p, char c, int j) { return detail::fix_phase(p, c, j, nl, code); };
    if (s.kind != SystemKind::TenQubit) {
        const int n = 4;
        return {{fix(PauliString::on(n, {{2, 'Y'}, {3, 'Z'}}), 'X', 0), fix(PauliString::on(n, {{2, 'X'}}), 'Y', 0),
                 fix(PauliString::on(n, {{2, 'Z'}, {3, 'Z'}}), 'Z', 0)}};
    }
    const int n = 10;
    LogicalPaulis q0{fix(PauliString::on(n, {{2, 'X'}, {5, 'Z'}}), 'X', 0),
                     fix(PauliString::on(n, {{2, 'Y'}, {3, 'Z'}, {5, 'Z'}}), 'Y', 0),
                     fix(PauliString::on(n, {{2, 'Z'}, {3, 'Z'}}), 'Z', 0)};
    LogicalPaulis q1{fix(PauliString::on(n, {{9, 'Y'}}), 'X', 1), fix(PauliString::on(n, {{8, 'Z'}, {9, 'X'}}), 'Y', 1),
                     fix(PauliString::on(n, {{8, 'Z'}, {9, 'Z'}}), 'Z', 1)};
    return {q0, q1};
}

} // namespace braidlab
