#include "braidlab/model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace braidlab;

namespace {

SystemSpec random_ten(std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> th(0, pi), ph(0, 2 * pi), mag(0.3, 2.0);
    SystemSpec s = SystemSpec::ten_qubit();
    for (Arm a : {Arm::Left, Arm::Right, Arm::Middle}) s.arm(a) = {mag(gen), th(gen), ph(gen)};
    return s;
}

} // namespace

TEST(Model, FourQubitSquareIsMagnitudeSquared)
{
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> th(0, pi), ph(0, 2 * pi), mag(0.2, 3.0);
    for (int i = 0; i < 20; ++i) {
        double m = mag(gen);
        Mat h = hamiltonian(SystemSpec::four_qubit(th(gen), ph(gen), m)).to_dense();
        EXPECT_TRUE(is_hermitian(h, 1e-14));
        EXPECT_LT((h * h - m * m * Mat::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Model, ConservedOperatorsCommuteDense)
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> th(0, pi), ph(0, 2 * pi);
    for (int i = 0; i < 20; ++i) {
        SystemSpec s = SystemSpec::four_qubit(th(gen), ph(gen));
        Mat h = hamiltonian(s).to_dense();
        for (const auto& w : conserved_set(s)) {
            Mat wd = to_dense(w.op);
            EXPECT_LT((wd * h - h * wd).cwiseAbs().maxCoeff(), 1e-12) << w.name;
        }
    }
}

TEST(Model, TenQubitConservedSetAndW3)
{
    std::mt19937_64 gen(12);
    SystemSpec s = random_ten(gen);
    OperatorSum h = hamiltonian(s);
    for (const auto& w : conserved_set(s)) {
        OperatorSum c = OperatorSum(w.op) * h + cplx(-1) * (h * OperatorSum(w.op));
        EXPECT_TRUE(c.pruned(1e-13).empty()) << w.name;
    }
    // W3 is conserved on four qubits but not once the middle arm couples qubit 2
    OperatorSum w3(named_operator("W3", 10));
    EXPECT_FALSE((w3 * h + cplx(-1) * (h * w3)).pruned(1e-13).empty());
}

TEST(Model, FourIdenticalBlocks)
{
    SystemSpec s = SystemSpec::four_qubit(0.7, 2.1);
    Mat h = hamiltonian(s).to_dense();
    Mat w1 = to_dense(named_operator("W1", 4)), w2 = to_dense(named_operator("W2", 4));
    std::optional<Eigen::VectorXd> ref;
    for (int a : {-1, 1})
        for (int b : {-1, 1}) {
            Mat p = 0.25 * (Mat::Identity(16, 16) + a * w1) * (Mat::Identity(16, 16) + b * w2);
            Eigen::SelfAdjointEigenSolver<Mat> ep(p);
            Mat basis = ep.eigenvectors().rightCols(4); // eigenvalue 1 block
            ASSERT_NEAR(ep.eigenvalues()(11), 0.0, 1e-12);
            Eigen::SelfAdjointEigenSolver<Mat> eb(basis.adjoint() * h * basis, Eigen::EigenvaluesOnly);
            if (!ref) ref = eb.eigenvalues();
            else EXPECT_LT((*ref - eb.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12);
        }
}

TEST(Model, HamiltonianTermsAndPruning)
{
    OperatorSum idle = hamiltonian(SystemSpec::four_qubit());
    ASSERT_EQ(idle.size(), 1u);
    EXPECT_EQ(idle.terms()[0].second.letters(), "ZZII");
    EXPECT_EQ(hamiltonian(SystemSpec::four_qubit(pi / 2, 0.3)).size(), 2u);
    SystemSpec t;
    t.kind = SystemKind::TetradTorus;
    t.tetrad = {0.1, 0.2, 0.3};
    EXPECT_EQ(hamiltonian(t).size(), 4u);
    EXPECT_THROW(check_arm(SystemSpec::four_qubit(), Arm::Middle), std::invalid_argument);
    EXPECT_THROW(named_operator("W4", 4), std::invalid_argument);
    EXPECT_THROW(named_operator("W9", 10), std::invalid_argument);
}

TEST(Model, CodeStatesAreOrthonormalAndInSector)
{
    for (SystemSpec s : {SystemSpec::four_qubit(), SystemSpec::ten_qubit()}) {
        Mat c = code_matrix(s);
        EXPECT_LT((c.adjoint() * c - Mat::Identity(c.cols(), c.cols())).norm(), 1e-12);
        Mat h = hamiltonian(s).to_dense();
        // degenerate ground space of the idle Hamiltonian
        Mat hc = c.adjoint() * h * c;
        EXPECT_LT((h * c - c * hc).norm(), 1e-12);
        EXPECT_LT((hc - hc(0, 0) * Mat::Identity(c.cols(), c.cols())).norm(), 1e-12);
        for (const auto& w : conserved_set(s)) {
            if (w.name == "W3" || w.name == "W7") continue;
            Mat r = restrict_to_code(w.op, c);
            EXPECT_LT((r + Mat::Identity(c.cols(), c.cols())).norm(), 1e-12) << w.name;
        }
    }
}

TEST(Model, W3AndW7ActAsLogicalZ)
{
    Mat c4 = code_matrix(SystemSpec::four_qubit());
    EXPECT_LT((restrict_to_code(named_operator("W3", 4), c4) + logical_pauli_matrix('Z', 0, 1)).norm(), 1e-12);
    Mat c10 = code_matrix(SystemSpec::ten_qubit());
    Mat zz = logical_pauli_matrix('Z', 0, 2) * logical_pauli_matrix('Z', 1, 2);
    EXPECT_LT((restrict_to_code(named_operator("W7", 10), c10) + zz).norm(), 1e-12);
}

TEST(Model, LogicalOperatorPhases)
{
    auto ops = logical_operators(SystemSpec::four_qubit());
    EXPECT_EQ(ops[0].x.str(), "+ IIYZ");
    EXPECT_EQ(ops[0].y.str(), "+ IIXI");
    EXPECT_EQ(ops[0].z.str(), "- IIZZ");
    auto ten = logical_operators(SystemSpec::ten_qubit());
    EXPECT_EQ(ten[0].x.str(), "+ IIXIIZIIII");
    EXPECT_EQ(ten[0].y.str(), "- IIYZIZIIII");
    EXPECT_EQ(ten[0].z.str(), "- IIZZIIIIII");
    EXPECT_EQ(ten[1].x.str(), "- IIIIIIIIIY");
    EXPECT_EQ(ten[1].y.str(), "- IIIIIIIIZX");
    EXPECT_EQ(ten[1].z.str(), "- IIIIIIIIZZ");
    for (SystemSpec s : {SystemSpec::four_qubit(), SystemSpec::ten_qubit()}) {
        Mat c = code_matrix(s);
        auto lo = logical_operators(s);
        for (int q = 0; q < s.n_logical(); ++q)
            for (char ch : {'X', 'Y', 'Z'})
                EXPECT_LT((restrict_to_code(lo[q][ch], c) - logical_pauli_matrix(ch, q, s.n_logical())).norm(), 1e-12);
    }
}

TEST(Model, ParityLabelsOfCodeStates)
{
    auto l = four_qubit_code_states();
    Mat c = code_matrix(SystemSpec::four_qubit());
    Mat n = restrict_to_code(named_operator("n", 4), c), h = restrict_to_code(named_operator("h", 4), c);
    EXPECT_NEAR(n(0, 0).real(), -1, 1e-12);
    EXPECT_NEAR(n(1, 1).real(), 1, 1e-12);
    EXPECT_NEAR(h(0, 0).real(), -1, 1e-12);
    EXPECT_NEAR(h(1, 1).real(), -1, 1e-12);
    EXPECT_NEAR(l[0].norm(), 1.0, 1e-15);
}
