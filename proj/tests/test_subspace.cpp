#include "braidlab/subspace.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace braidlab;

namespace {

// oracle: count eigenvectors of the dense joint projector by brute-force diagonalization
long brute_force_count(const std::vector<PauliString>& ops, const Label& label, int n)
{
    const Eigen::Index d = Eigen::Index{1} << n;
    Mat p = Mat::Identity(d, d);
    for (std::size_t i = 0; i < ops.size(); ++i) p = p * (0.5 * (Mat::Identity(d, d) + label[i] * to_dense(ops[i])));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (p + p.adjoint()), Eigen::EigenvaluesOnly);
    long c = 0;
    for (Eigen::Index i = 0; i < d; ++i) c += es.eigenvalues()(i) > 0.5;
    return c;
}

} // namespace

TEST(Subspace, DimensionsMatchBruteForce)
{
    SystemSpec s = SystemSpec::four_qubit();
    auto ops = sector_operators(s);
    std::vector<Label> labels{{-1, -1, -1, -1}, {1, -1, -1, -1}, {1, 1, 1, 1}, {-1, 1, -1, 1}};
    for (const auto& l : labels) {
        long want = brute_force_count(ops, l, 4);
        EXPECT_EQ(eigenspace_dimension(ops, l, 4), want);
        EXPECT_EQ(static_cast<long>(joint_eigenspace(ops, l, 4).size()), want);
    }
    // dependent operators: W2 W3 = h n on four qubits, so some labels are empty
    std::vector<PauliString> dep{named_operator("W2", 4), named_operator("W3", 4), named_operator("h", 4), named_operator("n", 4)};
    EXPECT_EQ(eigenspace_dimension(dep, {1, 1, -1, 1}, 4), brute_force_count(dep, {1, 1, -1, 1}, 4));
    EXPECT_EQ(eigenspace_dimension(dep, {1, 1, -1, 1}, 4), 0);
}

TEST(Subspace, EigenbasisIsLabeledAndOrthonormal)
{
    auto ops = std::vector<PauliString>{named_operator("W1", 4), named_operator("W2", 4), named_operator("h", 4)};
    LabeledBasis b = simultaneous_eigenbasis(ops, 4);
    ASSERT_EQ(b.size(), 16u);
    Mat m = b.matrix();
    EXPECT_LT((m.adjoint() * m - Mat::Identity(16, 16)).norm(), 1e-12);
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t k = 0; k < ops.size(); ++k)
            EXPECT_LT((apply_pauli(ops[k], b.states[i]) - static_cast<double>(b.labels[i][k]) * b.states[i]).norm(), 1e-12);
    // operator 0 varies fastest, -1 first
    EXPECT_EQ(b.labels.front(), (Label{-1, -1, -1}));
    EXPECT_EQ(b.labels.back(), (Label{1, 1, 1}));
}

TEST(Subspace, GaugeIsLargestAmplitudeRealPositive)
{
    Vec v(3);
    v << cplx(0.1, 0.2), cplx(0, -0.9), cplx(0.3, 0);
    fix_gauge(v);
    EXPECT_NEAR(v(1).imag(), 0.0, 1e-15);
    EXPECT_GT(v(1).real(), 0.0);
}

TEST(Subspace, RejectsNoncommutingOperators)
{
    std::vector<PauliString> ops{PauliString::parse("XI"), PauliString::parse("ZI")};
    EXPECT_THROW(simultaneous_eigenbasis(ops, 2), std::invalid_argument);
}

TEST(Subspace, GaugeAlignRecoversDiagonalPhases)
{
    std::mt19937_64 gen(40);
    std::uniform_real_distribution<double> ph(0, 2 * pi);
    Mat t = analytic_effective(Arm::Middle, 0.8, 1.3);
    Mat d = Mat::Zero(8, 8);
    for (int i = 0; i < 8; ++i) d(i, i) = std::polar(1.0, ph(gen));
    Mat m = d * t * d.adjoint();
    EXPECT_LT(gauge_align(m, t).residual, 1e-12);
    EXPECT_GT(gauge_align(m, analytic_effective(Arm::Middle, 0.8, 1.0)).residual, 1e-3);
}

TEST(Subspace, EffectiveHamiltoniansMatchClosedForms)
{
    std::vector<std::pair<SystemSpec, Arm>> cases{{SystemSpec::four_qubit(), Arm::Left},
                                                   {SystemSpec::ten_qubit(), Arm::Left},
                                                   {SystemSpec::ten_qubit(), Arm::Right},
                                                   {SystemSpec::ten_qubit(), Arm::Middle}};
    for (const auto& [base, arm] : cases) {
        LabeledBasis sb = sector_basis(base, arm);
        ASSERT_EQ(static_cast<int>(sb.size()), arm == Arm::Middle ? 8 : 4);
        for (int i = 0; i <= 6; ++i)
            for (int k = 0; k <= 6; ++k) {
                double a = pi * i / 6, b = 2 * pi * k / 6;
                Mat m = traceless(effective_hamiltonian(hamiltonian(base.with_arm(arm, a, b)), sb).matrix);
                EXPECT_LT(gauge_align(m, analytic_effective(arm, a, b)).residual, 1e-8) << to_string(arm) << " " << a << " " << b;
            }
    }
}

TEST(Subspace, EffectiveSelectorAndErrors)
{
    SystemSpec s = SystemSpec::four_qubit(0.4, 0.2);
    LabeledBasis sb = sector_basis(s, Arm::Left);
    auto eh = effective_hamiltonian(hamiltonian(s), sb, [](const Label& l) { return l[1] == -1; });
    EXPECT_EQ(eh.matrix.rows(), 2);
    EXPECT_THROW(effective_hamiltonian(hamiltonian(s), sb, [](const Label&) { return false; }), std::invalid_argument);
    EXPECT_THROW(sector_basis(s, Arm::Right), std::invalid_argument);
    Mat m = Mat::Identity(3, 3);
    EXPECT_LT(traceless(m).norm(), 1e-15);
}
