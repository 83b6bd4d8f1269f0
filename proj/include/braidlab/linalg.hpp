#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace braidlab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I_unit{0.0, 1.0};

namespace pauli_mat {
inline Mat id() { return Mat::Identity(2, 2); }
inline Mat x() { Mat m(2, 2); m << 0, 1, 1, 0; return m; }
inline Mat y() { Mat m(2, 2); m << 0, -I_unit, I_unit, 0; return m; }
inline Mat z() { Mat m(2, 2); m << 1, 0, 0, -1; return m; }
} // namespace pauli_mat

inline Mat kron(const Mat& a, const Mat& b)
{
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Mat kron(std::initializer_list<Mat> ms)
{
    Mat out = Mat::Identity(1, 1);
    for (const auto& m : ms) out = kron(out, m);
    return out;
}

inline bool is_hermitian(const Mat& m, double tol = 1e-10)
{
    return m.rows() == m.cols() && (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
}

// exp(-i H t) for Hermitian H
inline Mat expm_hermitian(const Mat& h, double t)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec ph = (es.eigenvalues().cast<cplx>() * (-I_unit * t)).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// exp(A) for anti-Hermitian A
inline Mat expm_antihermitian(const Mat& a)
{
    Mat h = I_unit * a; // exp(A) = exp(-i (iA))
    h = 0.5 * (h + h.adjoint()).eval();
    return expm_hermitian(h, 1.0);
}

// unitary factor of the polar decomposition
inline Mat polar_unitary(const Mat& m)
{
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

// eigenphases of a unitary, sorted ascending
inline std::vector<double> eigenphases(const Mat& u)
{
    Eigen::ComplexEigenSolver<Mat> es(u);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < u.rows(); ++i) out.push_back(std::arg(es.eigenvalues()(i)));
    std::sort(out.begin(), out.end());
    return out;
}

// distance between unitaries modulo global phase: min_phi ||A - e^{i phi} B||_F
inline double phase_free_distance(const Mat& a, const Mat& b)
{
    cplx ov = (b.adjoint() * a).trace();
    double ph = std::abs(ov) > 0 ? std::arg(ov) : 0.0;
    return (a - std::polar(1.0, ph) * b).norm();
}

} // namespace braidlab
