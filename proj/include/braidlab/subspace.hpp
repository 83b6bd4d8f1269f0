#pragma once

#include "braidlab/model.hpp"

#include <functional>
#include <queue>

namespace braidlab {

using Label = std::vector<int>; // eigenvalues +-1, one per operator

// gauge: largest-magnitude amplitude real and positive, ties to the lowest index
inline void fix_gauge(Vec& v)
{
    double best = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) >= best - 1e-12) {
            v *= std::conj(v(i)) / std::abs(v(i));
            v(i) = std::abs(v(i));
            return;
        }
}

struct LabeledBasis {
    std::vector<PauliString> operators;
    std::vector<Label> labels;
    std::vector<Vec> states;
    std::string gauge = "max-amplitude real positive, ties to lowest index";

    std::size_t size() const { return states.size(); }
    Mat matrix() const
    {
        Mat m(states.front().size(), static_cast<Eigen::Index>(states.size()));
        for (std::size_t i = 0; i < states.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = states[i];
        return m;
    }
    // subset in the given order
    LabeledBasis select(const std::function<bool(const Label&)>& keep) const
    {
        LabeledBasis out{operators, {}, {}, gauge};
        for (std::size_t i = 0; i < states.size(); ++i)
            if (keep(labels[i])) {
                out.labels.push_back(labels[i]);
                out.states.push_back(states[i]);
            }
        return out;
    }
};

inline void check_commuting(const std::vector<PauliString>& ops)
{
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.size(); ++j)
            if (!commutes(ops[i], ops[j]))
                throw std::invalid_argument("operators " + ops[i].letters() + " and " + ops[j].letters() + " do not commute");
}

// exact dimension of the joint eigenspace: Tr prod (I + m P)/2
inline long eigenspace_dimension(const std::vector<PauliString>& ops, const Label& label, int n)
{
    const std::size_t m = ops.size();
    cplx acc = 0;
    for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << m); ++sub) {
        PauliString prod(n);
        int sign = 1;
        for (std::size_t i = 0; i < m; ++i)
            if ((sub >> i) & 1) {
                prod = multiply(prod, ops[i].stripped());
                sign *= label[i];
            }
        if (prod.is_identity()) acc += static_cast<double>(sign) * prod.phase_value();
    }
    double dim = std::ldexp(acc.real(), n - static_cast<int>(m));
    return std::lround(dim);
}

// orthonormal basis of the joint eigenspace, built by projecting computational basis states
inline std::vector<Vec> joint_eigenspace(const std::vector<PauliString>& ops, const Label& label, int n)
{
    if (label.size() != ops.size()) throw std::invalid_argument("label length does not match operator count");
    for (const auto& p : ops)
        if (!p.is_hermitian()) throw std::invalid_argument("joint_eigenspace: operators must be Hermitian");
    const long want = eigenspace_dimension(ops, label, n);
    std::vector<Vec> found;
    const Eigen::Index dim = Eigen::Index{1} << n;
    for (Eigen::Index b = 0; b < dim && static_cast<long>(found.size()) < want; ++b) {
        Vec v = Vec::Zero(dim);
        v(b) = 1.0;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            v = 0.5 * (v + static_cast<double>(label[i]) * apply_pauli(ops[i], v));
            if (v.squaredNorm() < 1e-20) break;
        }
        for (const auto& f : found) v -= f * f.dot(v);
        double nv = v.norm();
        if (nv < 1e-8) continue;
        v /= nv;
        fix_gauge(v);
        found.push_back(v);
    }
    return found;
}

// labeled basis for explicit label tuples, in the given order
inline LabeledBasis labeled_basis(const std::vector<PauliString>& ops, const std::vector<Label>& tuples, int n)
{
    check_commuting(ops);
    LabeledBasis out{ops, {}, {}};
    for (const auto& t : tuples)
        for (auto& v : joint_eigenspace(ops, t, n)) {
            out.labels.push_back(t);
            out.states.push_back(std::move(v));
        }
    return out;
}

// complete basis; tuples enumerated with operator 0 fastest and -1 before +1
inline LabeledBasis simultaneous_eigenbasis(const std::vector<PauliString>& ops, int n)
{
    check_commuting(ops);
    std::vector<Label> tuples;
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << ops.size()); ++c) {
        Label t(ops.size());
        for (std::size_t i = 0; i < ops.size(); ++i) t[i] = ((c >> i) & 1) ? 1 : -1;
        tuples.push_back(t);
    }
    return labeled_basis(ops, tuples, n);
}

struct EffectiveHamiltonian {
    Mat matrix;
    std::vector<Label> basis_labels;
};

inline EffectiveHamiltonian effective_hamiltonian(const OperatorSum& h, const LabeledBasis& basis,
                                                  const std::function<bool(const Label&)>& selector = nullptr)
{
    if (!h.is_hermitian()) throw std::invalid_argument("effective_hamiltonian: H is not Hermitian");
    LabeledBasis sel = selector ? basis.select(selector) : basis;
    if (sel.states.empty()) throw std::invalid_argument("effective_hamiltonian: empty selection");
    const auto k = static_cast<Eigen::Index>(sel.states.size());
    Mat m(k, k);
    for (Eigen::Index b = 0; b < k; ++b) {
        Vec hb = h.apply(sel.states[b]);
        for (Eigen::Index a = 0; a < k; ++a) m(a, b) = sel.states[a].dot(hb);
    }
    return {0.5 * (m + m.adjoint()), sel.labels};
}

// ---- sectors and effective Hamiltonians

// operator order of the labels: (n, h, W1, W2) or (n, n', h, h', ha, W1, W2, W4, W5, W6)
inline std::vector<PauliString> sector_operators(const SystemSpec& s)
{
    const int n = s.n_qubits();
    std::vector<std::string> names = s.kind == SystemKind::TenQubit
        ? std::vector<std::string>{"n", "n'", "h", "h'", "ha", "W1", "W2", "W4", "W5", "W6"}
        : std::vector<std::string>{"n", "h", "W1", "W2"};
    std::vector<PauliString> out;
    for (const auto& nm : names) out.push_back(named_operator(nm, n));
    return out;
}

// basis of the single-arm effective Hamiltonian, all W = -1.
// left/right: index = bit(n) + 2 bit(h) (tau (x) eta), bit 0 meaning eigenvalue -1.
// middle: index = 4 bit(ha) + 2 bit(n) + bit(n') (chi (x) eta (x) eta').
inline LabeledBasis sector_basis(const SystemSpec& s, Arm arm)
{
    check_arm(s, arm);
    auto ops = sector_operators(s);
    std::vector<Label> tuples;
    auto sgn = [](int bit) { return bit ? 1 : -1; };
    if (s.kind != SystemKind::TenQubit) {
        for (int i = 0; i < 4; ++i) tuples.push_back({sgn(i & 1), sgn(i >> 1), -1, -1});
    } else if (arm == Arm::Middle) {
        for (int i = 0; i < 8; ++i) tuples.push_back({sgn((i >> 1) & 1), sgn(i & 1), -1, -1, sgn(i >> 2), -1, -1, -1, -1, -1});
    } else {
        for (int i = 0; i < 4; ++i) {
            Label t(10, -1);
            int a = sgn(i & 1), b = sgn(i >> 1);
            if (arm == Arm::Left) { t[0] = a; t[2] = b; }
            else { t[1] = a; t[3] = b; }
            tuples.push_back(t);
        }
    }
    return labeled_basis(ops, tuples, s.n_qubits());
}

// closed forms: -tau_z cos t - tau_x eta_x sin t cos p + tau_x eta_y sin t sin p (left/right),
// -chi_z cos a + chi_x eta_y sin a cos b + chi_y eta_x' sin a sin b (middle)
inline Mat analytic_effective(Arm arm, double a, double b)
{
    using namespace pauli_mat;
    if (arm == Arm::Middle)
        return -std::cos(a) * kron({z(), id(), id()}) + std::sin(a) * std::cos(b) * kron({x(), y(), id()}) +
               std::sin(a) * std::sin(b) * kron({y(), id(), x()});
    return -std::cos(a) * kron(z(), id()) - std::sin(a) * std::cos(b) * kron(x(), x()) +
           std::sin(a) * std::sin(b) * kron(x(), y());
}

inline Mat traceless(const Mat& m)
{
    const double k = static_cast<double>(m.rows());
    return m - (m.trace() / k) * Mat::Identity(m.rows(), m.cols());
}

struct GaugeAlignment {
    Mat d; // diagonal unitary
    double residual;
};

// diagonal unitary D minimizing || D^dagger M D - T ||_F: phases propagated along the
// coupling graph of T, then polished by coordinate ascent
inline GaugeAlignment gauge_align(const Mat& m, const Mat& target)
{
    if (m.rows() != target.rows() || m.cols() != target.cols() || m.rows() != m.cols())
        throw std::invalid_argument("gauge_align: dimension mismatch");
    const Eigen::Index k = m.rows();
    std::vector<cplx> d(k, 1.0);
    std::vector<bool> seen(k, false);
    const double tol = 1e-12;
    for (Eigen::Index root = 0; root < k; ++root) {
        if (seen[root]) continue;
        seen[root] = true;
        std::queue<Eigen::Index> q;
        q.push(root);
        while (!q.empty()) {
            Eigen::Index a = q.front();
            q.pop();
            for (Eigen::Index b = 0; b < k; ++b) {
                if (seen[b] || std::abs(target(a, b)) < tol || std::abs(m(a, b)) < tol) continue;
                // conj(d_a) M_ab d_b = T_ab
                cplx r = target(a, b) / m(a, b) * d[a];
                d[b] = r / std::abs(r);
                seen[b] = true;
                q.push(b);
            }
        }
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double change = 0;
        for (Eigen::Index a = 0; a < k; ++a) {
            cplx s = 0;
            for (Eigen::Index b = 0; b < k; ++b)
                if (b != a) s += std::conj(target(a, b)) * m(a, b) * d[b];
            if (std::abs(s) < 1e-14) continue;
            cplx nd = s / std::abs(s);
            change += std::abs(nd - d[a]);
            d[a] = nd;
        }
        if (change < 1e-15) break;
    }
    Mat dm = Mat::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) dm(i, i) = d[i];
    return {dm, (dm.adjoint() * m * dm - target).norm()};
}

} // namespace braidlab
