#pragma once

#include "braidlab/protocol.hpp"

namespace braidlab {

// logical Pauli frame: d^2 physical strings (identity first) and their logical matrices
struct LogicalFrame {
    int d = 2;
    std::vector<std::string> names;
    std::vector<PauliString> strings;
    std::vector<Mat> matrices;
};

inline LogicalFrame logical_frame(const SystemSpec& system)
{
    const auto ops = logical_operators(system);
    const int n = system.n_qubits();
    const int nl = system.n_logical();
    LogicalFrame f;
    f.d = 1 << nl;
    const std::string letters = "IXYZ";
    auto single = [&](int q, char c) { return c == 'I' ? PauliString(n) : ops[q][c]; };
    if (nl == 1) {
        for (char c : letters) {
            f.names.push_back(std::string(1, c));
            f.strings.push_back(single(0, c));
            f.matrices.push_back(logical_pauli_matrix(c, 0, 1));
        }
        return f;
    }
    for (char a : letters)
        for (char b : letters) {
            f.names.push_back(std::string{a, b});
            f.strings.push_back(multiply(single(0, a), single(1, b)));
            f.matrices.push_back(kron(logical_pauli_matrix(a, 0, 1), logical_pauli_matrix(b, 0, 1)));
        }
    return f;
}

struct Sampling {
    long shots = 8192;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0; // distinct per tomographed state
};

// rho = (1/d) sum_P <P> P with <I> = 1
inline Mat state_tomography(const QuantumState& s, const LogicalFrame& f, const std::optional<Sampling>& sampling = std::nullopt)
{
    Mat rho = f.matrices[0] / static_cast<double>(f.d);
    for (std::size_t i = 1; i < f.strings.size(); ++i) {
        double e = sampling ? sample_expectation(s, f.strings[i], sampling->shots, sampling->seed, sampling->stream * 64 + i)
                            : expectation(s, f.strings[i]);
        rho += (e / f.d) * f.matrices[i];
    }
    return rho;
}

// smallest eigenvalue (negative values flag unphysical reconstructions)
inline double min_eigenvalue(const Mat& h)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// fixed input sets: {0,1,+,i+} per logical qubit, qubit 0 outermost
inline std::vector<std::vector<std::string>> tomography_inputs(int d)
{
    static const std::vector<std::string> base{"0", "1", "+", "i+"};
    std::vector<std::vector<std::string>> out;
    if (d == 2) {
        for (const auto& a : base) out.push_back({a});
    } else if (d == 4) {
        for (const auto& a : base)
            for (const auto& b : base) out.push_back({a, b});
    } else {
        throw std::invalid_argument("tomography_inputs: d must be 2 or 4");
    }
    return out;
}

inline Mat input_density(const std::vector<std::string>& labels)
{
    Vec c = logical_coefficients(labels);
    return c * c.adjoint();
}

struct ChoiMatrix {
    int d = 2;
    Mat matrix; // d^2 x d^2, sum_ij |i><j| (x) E(|i><j|), trace d
};

inline ChoiMatrix unitary_choi(const Mat& u)
{
    const Eigen::Index d = u.rows();
    Vec v(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) v(i * d + k) = u(k, i);
    return {static_cast<int>(d), v * v.adjoint()};
}

// linear inversion from the outputs on tomography_inputs(d), same order
inline ChoiMatrix choi_from_outputs(const std::vector<Mat>& outputs, int d)
{
    auto inputs = tomography_inputs(d);
    if (outputs.size() != inputs.size()) throw std::invalid_argument("choi_from_outputs: need one output per input");
    const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
    Mat a(d2, d2);
    for (Eigen::Index j = 0; j < d2; ++j) a.col(j) = input_density(inputs[j]).reshaped();
    Eigen::FullPivLU<Mat> lu(a);
    if (lu.rank() != d2) throw std::logic_error("choi_from_outputs: input set is not informationally complete");
    Mat choi = Mat::Zero(d2, d2);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            Mat e = Mat::Zero(d, d);
            e(i, j) = 1.0;
            Vec coef = lu.solve(Vec(e.reshaped()));
            Mat out = Mat::Zero(d, d);
            for (Eigen::Index k = 0; k < d2; ++k) out += coef(k) * outputs[k];
            choi += kron(e, out);
        }
    return {d, choi};
}

using LogicalChannel = std::function<Mat(const std::vector<std::string>&)>;

inline ChoiMatrix choi_from_inputs(const LogicalChannel& channel, int d)
{
    std::vector<Mat> outs;
    for (const auto& in : tomography_inputs(d)) outs.push_back(channel(in));
    return choi_from_outputs(outs, d);
}

inline double process_fidelity(const ChoiMatrix& ideal, const ChoiMatrix& actual)
{
    if (ideal.d != actual.d || ideal.matrix.rows() != actual.matrix.rows()) throw DimensionError("process_fidelity: dimension mismatch");
    const double d = ideal.d;
    return (ideal.matrix.adjoint() * actual.matrix).trace().real() / (d * d);
}

struct PositivityProjection {
    ChoiMatrix choi;
    bool applied = false;
    double min_eigenvalue = 0.0; // before clipping
};

// clip negative eigenvalues and restore trace d; reports whether anything changed
inline PositivityProjection positivity_projection(const ChoiMatrix& c, double tol = 1e-12)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (c.matrix + c.matrix.adjoint()));
    Eigen::VectorXd ev = es.eigenvalues();
    PositivityProjection out{c, false, ev(0)};
    if (ev(0) >= -tol) return out;
    Eigen::VectorXd clipped = ev.cwiseMax(0.0);
    clipped *= c.d / clipped.sum();
    out.choi.matrix = es.eigenvectors() * clipped.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    out.applied = true;
    return out;
}

// state fidelity <psi|rho|psi> for a pure target
inline double state_fidelity(const Vec& target, const Mat& rho) { return target.dot(rho * target).real(); }

} // namespace braidlab
