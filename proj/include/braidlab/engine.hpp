#pragma once

#include "braidlab/pauli.hpp"

#include <optional>
#include <string>

namespace braidlab {

enum class StateMode { PureVector, DensityMatrix };

class QuantumState {
public:
    QuantumState() = default;

    static QuantumState zero(int n, StateMode mode = StateMode::PureVector)
    {
        Vec v = Vec::Zero(dim_of(n));
        v(0) = 1.0;
        QuantumState s = from_vector(v);
        return mode == StateMode::DensityMatrix ? s.to_density() : s;
    }
    static QuantumState from_vector(const Vec& v, double tol = 1e-10)
    {
        QuantumState s;
        s.n_ = qubits_of(v.size());
        if (std::abs(v.squaredNorm() - 1.0) > tol) throw std::invalid_argument("state vector is not normalized");
        s.mode_ = StateMode::PureVector;
        s.psi_ = v;
        return s;
    }
    static QuantumState from_density(const Mat& rho, double tol = 1e-10)
    {
        QuantumState s;
        s.n_ = qubits_of(rho.rows());
        if (rho.rows() != rho.cols() || !is_hermitian(rho, tol)) throw std::invalid_argument("density matrix is not Hermitian");
        if (std::abs(rho.trace() - 1.0) > tol) throw std::invalid_argument("density matrix trace is not 1");
        s.mode_ = StateMode::DensityMatrix;
        s.rho_ = rho;
        return s;
    }

    int n_qubits() const { return n_; }
    StateMode mode() const { return mode_; }
    bool pure() const { return mode_ == StateMode::PureVector; }
    const Vec& vector() const { require(StateMode::PureVector); return psi_; }
    const Mat& density() const { require(StateMode::DensityMatrix); return rho_; }
    Vec& vector_mut() { require(StateMode::PureVector); return psi_; }
    Mat& density_mut() { require(StateMode::DensityMatrix); return rho_; }

    QuantumState to_density() const
    {
        if (!pure()) return *this;
        QuantumState s;
        s.n_ = n_;
        s.mode_ = StateMode::DensityMatrix;
        s.rho_ = psi_ * psi_.adjoint();
        return s;
    }
    Mat density_matrix() const { return pure() ? Mat(psi_ * psi_.adjoint()) : rho_; }

    double trace() const { return pure() ? psi_.squaredNorm() : rho_.trace().real(); }

    static Eigen::Index dim_of(int n)
    {
        if (n < 1 || n > max_dense_qubits) throw DimensionError("state supports 1..10 qubits");
        return Eigen::Index{1} << n;
    }

private:
    static int qubits_of(Eigen::Index dim)
    {
        int n = 0;
        while ((Eigen::Index{1} << n) < dim) ++n;
        if ((Eigen::Index{1} << n) != dim || n < 1 || n > max_dense_qubits) throw DimensionError("dimension is not 2^n, n in 1..10");
        return n;
    }
    void require(StateMode m) const
    {
        if (mode_ != m) throw std::logic_error(m == StateMode::PureVector ? "state is not a pure vector" : "state is not a density matrix");
    }

    int n_ = 1;
    StateMode mode_ = StateMode::PureVector;
    Vec psi_;
    Mat rho_;
};

enum class GateKind { TwoPauliRotation, OneQubit, Controlled };

struct GateOp {
    GateKind kind = GateKind::OneQubit;
    std::string name;    // one-qubit gate / controlled base: X Y Z H S Sdg SX Rx Ry Rz
    char axis_a = 'Z', axis_b = 'Z';
    int qubit_a = 0, qubit_b = 0; // rotation qubits, or (control, target), or qubit_a alone
    double angle = 0.0;

    static GateOp rotation(char a, char b, int qa, int qb, double angle)
    {
        GateOp g;
        g.kind = GateKind::TwoPauliRotation;
        g.axis_a = a;
        g.axis_b = b;
        g.qubit_a = qa;
        g.qubit_b = qb;
        g.angle = angle;
        return g;
    }
    static GateOp single(const std::string& name, int q, double angle = 0.0)
    {
        GateOp g;
        g.kind = GateKind::OneQubit;
        g.name = name;
        g.qubit_a = q;
        g.angle = angle;
        return g;
    }
    static GateOp controlled(const std::string& base, int control, int target)
    {
        GateOp g;
        g.kind = GateKind::Controlled;
        g.name = base;
        g.qubit_a = control;
        g.qubit_b = target;
        return g;
    }

    bool two_qubit() const { return kind != GateKind::OneQubit; }
    int max_qubit() const { return kind == GateKind::OneQubit ? qubit_a : std::max(qubit_a, qubit_b); }

    // the Pauli string of a rotation gate
    PauliString pauli(int n) const
    {
        if (qubit_a == qubit_b) throw std::invalid_argument("rotation needs two distinct qubits");
        return PauliString::on(n, {{qubit_a, axis_a}, {qubit_b, axis_b}});
    }
};

inline Mat single_qubit_matrix(const std::string& name, double angle = 0.0)
{
    Mat m(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    if (name == "I") return pauli_mat::id();
    if (name == "X") return pauli_mat::x();
    if (name == "Y") return pauli_mat::y();
    if (name == "Z") return pauli_mat::z();
    if (name == "H") { m << r, r, r, -r; return m; }
    if (name == "S") { m << 1, 0, 0, I_unit; return m; }
    if (name == "Sdg") { m << 1, 0, 0, -I_unit; return m; }
    if (name == "T") { m << 1, 0, 0, std::polar(1.0, pi / 4); return m; }
    if (name == "SX") { m << cplx(1, 1), cplx(1, -1), cplx(1, -1), cplx(1, 1); return 0.5 * m; }
    double c = std::cos(angle / 2), s = std::sin(angle / 2);
    if (name == "Rx") return c * pauli_mat::id() - I_unit * s * pauli_mat::x();
    if (name == "Ry") return c * pauli_mat::id() - I_unit * s * pauli_mat::y();
    if (name == "Rz") return c * pauli_mat::id() - I_unit * s * pauli_mat::z();
    throw std::invalid_argument("unknown gate '" + name + "'");
}

// dense 2^n x 2^n unitary of a gate (test oracle and small-system use)
inline Mat gate_matrix(const GateOp& g, int n)
{
    if (g.kind == GateKind::TwoPauliRotation) {
        Mat p = to_dense(g.pauli(n));
        return std::cos(g.angle / 2) * Mat::Identity(p.rows(), p.cols()) - I_unit * std::sin(g.angle / 2) * p;
    }
    if (g.kind == GateKind::OneQubit) {
        Mat out = Mat::Identity(1, 1);
        for (int q = 0; q < n; ++q) out = kron(out, q == g.qubit_a ? single_qubit_matrix(g.name, g.angle) : pauli_mat::id());
        return out;
    }
    Mat p0(2, 2), p1(2, 2);
    p0 << 1, 0, 0, 0;
    p1 << 0, 0, 0, 1;
    Mat a = Mat::Identity(1, 1), b = Mat::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
        a = kron(a, q == g.qubit_a ? p0 : pauli_mat::id());
        b = kron(b, q == g.qubit_a ? p1 : q == g.qubit_b ? single_qubit_matrix(g.name) : pauli_mat::id());
    }
    return a + b;
}

namespace detail {

inline void check_gate(const GateOp& g, int n)
{
    if (g.qubit_a < 0 || g.max_qubit() >= n || (g.kind != GateKind::OneQubit && g.qubit_b < 0))
        throw std::out_of_range("gate qubit index out of range");
    if (g.kind != GateKind::OneQubit && g.qubit_a == g.qubit_b) throw std::invalid_argument("two-qubit gate on one qubit");
}

// a gate compiled to index pairs: new[b] = m00 v[b] + m01 v[b2], new[b2] = m10 v[b] + m11 v[b2].
// diagonal gates (ZZ rotations) keep one factor per index instead.
struct PairUpdate {
    std::uint64_t b, b2;
    cplx m00, m01, m10, m11;
};
struct CompiledGate {
    std::vector<PairUpdate> pairs;
    std::vector<cplx> diag; // nonempty only for diagonal gates
};

inline CompiledGate compile_gate(const GateOp& g, int n)
{
    const std::uint64_t dim = std::uint64_t{1} << n;
    CompiledGate out;
    if (g.kind == GateKind::TwoPauliRotation) {
        PauliString p = g.pauli(n);
        const std::uint64_t flip = p.index_flip_mask(), zm = p.index_z_mask();
        const cplx yph = PauliString(1).with_phase(p.y_count()).phase_value();
        const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
        auto sgn = [zm](std::uint64_t b) { return (std::popcount(b & zm) & 1) ? -1.0 : 1.0; };
        if (flip == 0) {
            out.diag.resize(dim);
            for (std::uint64_t b = 0; b < dim; ++b) out.diag[b] = cplx(c, -s * sgn(b));
            return out;
        }
        const std::uint64_t low = flip & (~flip + 1); // one representative per pair
        out.pairs.reserve(dim / 2);
        for (std::uint64_t b = 0; b < dim; ++b) {
            if (b & low) continue;
            std::uint64_t b2 = b ^ flip;
            cplx pb = yph * sgn(b), pb2 = yph * sgn(b2); // P|b> = pb |b2>, P|b2> = pb2 |b>
            out.pairs.push_back({b, b2, c, -I_unit * s * pb2, -I_unit * s * pb, c});
        }
        return out;
    }
    Mat m = single_qubit_matrix(g.name, g.kind == GateKind::OneQubit ? g.angle : 0.0);
    const int tq = g.kind == GateKind::OneQubit ? g.qubit_a : g.qubit_b;
    const std::uint64_t tbit = std::uint64_t{1} << (n - 1 - tq);
    const std::uint64_t cbit = g.kind == GateKind::Controlled ? std::uint64_t{1} << (n - 1 - g.qubit_a) : 0;
    for (std::uint64_t b = 0; b < dim; ++b) {
        if (b & tbit) continue;
        if (cbit && !(b & cbit)) continue;
        out.pairs.push_back({b, b | tbit, m(0, 0), m(0, 1), m(1, 0), m(1, 1)});
    }
    return out;
}

inline void apply_compiled(const CompiledGate& cg, cplx* v)
{
    if (!cg.diag.empty()) {
        for (std::size_t b = 0; b < cg.diag.size(); ++b) v[b] *= cg.diag[b];
        return;
    }
    for (const auto& p : cg.pairs) {
        cplx a0 = v[p.b], a1 = v[p.b2];
        v[p.b] = p.m00 * a0 + p.m01 * a1;
        v[p.b2] = p.m10 * a0 + p.m11 * a1;
    }
}

inline void apply_gate_raw(const GateOp& g, int n, cplx* v) { apply_compiled(compile_gate(g, n), v); }

// rho -> U rho U^dagger: U acts on every column, then U^dagger from the right mixes whole columns
inline void apply_gate_density(const GateOp& g, int n, Mat& rho)
{
    const CompiledGate cg = compile_gate(g, n);
    for (Eigen::Index j = 0; j < rho.cols(); ++j) apply_compiled(cg, rho.col(j).data());
    if (!cg.diag.empty()) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) rho.col(j) *= std::conj(cg.diag[j]);
        return;
    }
    const Eigen::Index rows = rho.rows();
    for (const auto& p : cg.pairs) {
        cplx* cb = rho.col(static_cast<Eigen::Index>(p.b)).data();
        cplx* cb2 = rho.col(static_cast<Eigen::Index>(p.b2)).data();
        const cplx a00 = std::conj(p.m00), a01 = std::conj(p.m01), a10 = std::conj(p.m10), a11 = std::conj(p.m11);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const cplx x = cb[i], y = cb2[i];
            cb[i] = a00 * x + a01 * y;
            cb2[i] = a10 * x + a11 * y;
        }
    }
}

} // namespace detail

// in-place variant; caller needs exclusive access
inline void apply_gate_inplace(QuantumState& s, const GateOp& g)
{
    detail::check_gate(g, s.n_qubits());
    if (s.pure())
        detail::apply_gate_raw(g, s.n_qubits(), s.vector_mut().data());
    else
        detail::apply_gate_density(g, s.n_qubits(), s.density_mut());
}

inline QuantumState apply_gate(QuantumState s, const GateOp& g)
{
    apply_gate_inplace(s, g);
    return s;
}

inline QuantumState evolve_exact(const QuantumState& s, const OperatorSum& h, double t)
{
    if (!h.is_hermitian()) throw std::invalid_argument("evolve_exact: Hamiltonian is not Hermitian");
    if (h.n_qubits() != s.n_qubits()) throw DimensionError("evolve_exact: qubit count mismatch");
    if (t == 0.0) return s;
    Mat u = expm_hermitian(h.to_dense(), t);
    QuantumState out = s;
    if (s.pure())
        out.vector_mut() = u * s.vector();
    else
        out.density_mut() = u * s.density() * u.adjoint();
    return out;
}

inline double expectation(const QuantumState& s, const OperatorSum& op)
{
    if (!op.is_hermitian()) throw std::invalid_argument("expectation: operator is not Hermitian");
    if (op.n_qubits() != s.n_qubits()) throw DimensionError("expectation: qubit count mismatch");
    if (s.pure()) return s.vector().dot(op.apply(s.vector())).real();
    // Tr(rho P) = sum_b amp(b) rho(b, b^flip) where P|b> = amp(b) |b^flip>
    const Mat& rho = s.density();
    cplx acc = 0;
    const std::uint64_t dim = std::uint64_t{1} << s.n_qubits();
    for (const auto& [c, p] : op.terms()) {
        std::uint64_t flip = p.index_flip_mask();
        cplx t = 0;
        for (std::uint64_t b = 0; b < dim; ++b) t += p.amplitude_on(b) * rho(b, b ^ flip);
        acc += c * t;
    }
    return acc.real();
}

inline double expectation(const QuantumState& s, const PauliString& p) { return expectation(s, OperatorSum(p)); }

// counter-based RNG: every draw is a pure function of (seed, stream, counter)
namespace rng {
inline std::uint64_t mix(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream) { return mix(seed ^ mix(stream)); }
inline double uniform(std::uint64_t key, std::uint64_t counter)
{
    return static_cast<double>(mix(key + counter) >> 11) * 0x1.0p-53;
}
} // namespace rng

// projective measurement of one Pauli string, shots samples; outcome of shot i
// depends only on (seed, stream, i)
inline double sample_expectation(const QuantumState& s, const PauliString& p, long shots, std::uint64_t seed,
                                 std::uint64_t stream = 0)
{
    if (!p.is_hermitian()) throw std::invalid_argument("sample_expectation: string is not Hermitian");
    if (shots <= 0) throw std::invalid_argument("sample_expectation: shots must be positive");
    double e = expectation(s, p);
    double p_plus = std::clamp((1.0 + e) / 2.0, 0.0, 1.0);
    const std::uint64_t k = rng::key(seed, stream);
    long plus = 0;
    for (long i = 0; i < shots; ++i)
        if (rng::uniform(k, static_cast<std::uint64_t>(i)) < p_plus) ++plus;
    return (2.0 * plus - shots) / static_cast<double>(shots);
}

inline double sample_expectation(const QuantumState& s, const OperatorSum& op, long shots, std::uint64_t seed,
                                 std::uint64_t stream = 0)
{
    if (op.size() != 1) throw std::invalid_argument("sample_expectation: measure multi-term operators term by term");
    const auto& [c, p] = op.terms().front();
    if (std::abs(c.imag()) > 1e-12) throw std::invalid_argument("sample_expectation: operator is not Hermitian");
    return c.real() * sample_expectation(s, p, shots, seed, stream);
}

// rho <- (1-p) rho + p (I/2^k (x) Tr_Q rho)  (uniform Pauli mixture on Q)
inline void apply_depolarizing_inplace(QuantumState& s, const std::vector<int>& qubits, double p)
{
    if (s.pure()) throw std::logic_error("apply_depolarizing needs a density matrix");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing probability outside [0,1]");
    if (p == 0.0 || qubits.empty()) return;
    const int n = s.n_qubits();
    std::uint64_t mask = 0;
    for (int q : qubits) {
        if (q < 0 || q >= n) throw std::out_of_range("depolarizing qubit out of range");
        mask |= std::uint64_t{1} << (n - 1 - q);
    }
    const int k = std::popcount(mask);
    std::vector<std::uint64_t> subsets; // all bit patterns inside mask
    for (std::uint64_t sub = mask;; sub = (sub - 1) & mask) {
        subsets.push_back(sub);
        if (sub == 0) break;
    }
    Mat& rho = s.density_mut();
    const std::uint64_t dim = std::uint64_t{1} << n;
    const double w = p / static_cast<double>(std::uint64_t{1} << k);
    Mat out = (1.0 - p) * rho;
    for (std::uint64_t c = 0; c < dim; ++c) {
        if (c & mask) continue;
        for (std::uint64_t r = 0; r < dim; ++r) {
            if (r & mask) continue;
            cplx t = 0;
            for (auto sub : subsets) t += rho(r | sub, c | sub);
            t *= w;
            for (auto sub : subsets) out(r | sub, c | sub) += t;
        }
    }
    rho = std::move(out);
}

inline QuantumState apply_depolarizing(QuantumState s, const std::vector<int>& qubits, double p)
{
    apply_depolarizing_inplace(s, qubits, p);
    return s;
}

// gate sequence with optional depolarizing after each two-qubit gate
inline void run_circuit(QuantumState& s, const std::vector<GateOp>& gates, double depolarizing = 0.0)
{
    for (const auto& g : gates) {
        apply_gate_inplace(s, g);
        if (depolarizing > 0.0 && g.two_qubit()) apply_depolarizing_inplace(s, {g.qubit_a, g.qubit_b}, depolarizing);
    }
}

} // namespace braidlab
