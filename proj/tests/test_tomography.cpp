#include "braidlab/tomography.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace braidlab;

namespace {

Mat random_unitary(std::mt19937_64& gen, int d)
{
    std::normal_distribution<double> nd;
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = cplx(nd(gen), nd(gen));
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ();
}

ChoiMatrix choi_of_unitary_channel(const Mat& u)
{
    const int d = static_cast<int>(u.rows());
    return choi_from_inputs([&](const std::vector<std::string>& in) { return Mat(u * input_density(in) * u.adjoint()); }, d);
}

} // namespace

TEST(Tomography, ReferenceFidelities)
{
    ChoiMatrix id = unitary_choi(pauli_mat::id());
    EXPECT_NEAR(process_fidelity(id, id), 1.0, 1e-10);
    EXPECT_NEAR(process_fidelity(id, unitary_choi(pauli_mat::x())), 0.0, 1e-10);
    EXPECT_NEAR(process_fidelity(id, unitary_choi(single_qubit_matrix("S"))), 0.5, 1e-10);
    EXPECT_NEAR(id.matrix.trace().real(), 2.0, 1e-14);
}

TEST(Tomography, LinearInversionReproducesUnitaryOverlap)
{
    std::mt19937_64 gen(60);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = trial % 2 ? 4 : 2;
        Mat u = random_unitary(gen, d), v = random_unitary(gen, d);
        ChoiMatrix cv = choi_of_unitary_channel(v);
        EXPECT_LT((cv.matrix - unitary_choi(v).matrix).norm(), 1e-10);
        double want = std::norm((u.adjoint() * v).trace()) / (d * d);
        EXPECT_NEAR(process_fidelity(unitary_choi(u), cv), want, 1e-8);
    }
}

TEST(Tomography, LogicalFrameMatchesRestriction)
{
    for (SystemSpec s : {SystemSpec::four_qubit(), SystemSpec::ten_qubit()}) {
        LogicalFrame f = logical_frame(s);
        ASSERT_EQ(f.strings.size(), static_cast<std::size_t>(f.d * f.d));
        Mat code = code_matrix(s);
        for (std::size_t i = 0; i < f.strings.size(); ++i)
            EXPECT_LT((restrict_to_code(f.strings[i], code) - f.matrices[i]).norm(), 1e-12) << f.names[i];
    }
}

TEST(Tomography, ExactStateReconstruction)
{
    SystemSpec s = SystemSpec::ten_qubit();
    LogicalFrame f = logical_frame(s);
    for (const auto& in : tomography_inputs(4)) {
        QuantumState st = prepare_logical(in, s);
        EXPECT_LT((state_tomography(st, f) - input_density(in)).norm(), 1e-12);
    }
}

TEST(Tomography, SampledWithinFiveSigma)
{
    SystemSpec s = SystemSpec::four_qubit();
    LogicalFrame f = logical_frame(s);
    QuantumState st = execute_braid(clock_plan(pi / 4, 4.0, 3, s), prepare_logical({"+"}, s));
    const long shots = 8192;
    for (std::size_t i = 1; i < f.strings.size(); ++i) {
        double e = expectation(st, f.strings[i]);
        double m = sample_expectation(st, f.strings[i], shots, 99, i);
        double sigma = std::sqrt(std::max(1e-12, 1 - e * e) / shots);
        EXPECT_LE(std::abs(m - e), 5 * sigma) << f.names[i];
    }
    Mat a = state_tomography(st, f, Sampling{shots, 5, 0});
    Mat b = state_tomography(st, f, Sampling{shots, 5, 0});
    EXPECT_EQ((a - b).norm(), 0.0);
}

TEST(Tomography, PositivityProjectionIsReported)
{
    ChoiMatrix c = unitary_choi(pauli_mat::id());
    PositivityProjection clean = positivity_projection(c);
    EXPECT_FALSE(clean.applied);
    c.matrix(1, 1) = -0.05;
    c.matrix(2, 2) = 0.05;
    PositivityProjection pp = positivity_projection(c);
    EXPECT_TRUE(pp.applied);
    EXPECT_LT(pp.min_eigenvalue, 0.0);
    EXPECT_GE(min_eigenvalue(pp.choi.matrix), -1e-12);
    EXPECT_NEAR(pp.choi.matrix.trace().real(), 2.0, 1e-12);
}

TEST(Tomography, InputSetsAndErrors)
{
    EXPECT_EQ(tomography_inputs(2).size(), 4u);
    EXPECT_EQ(tomography_inputs(4).size(), 16u);
    EXPECT_THROW(tomography_inputs(3), std::invalid_argument);
    EXPECT_THROW(choi_from_outputs({Mat::Identity(2, 2)}, 2), std::invalid_argument);
    EXPECT_THROW(process_fidelity(unitary_choi(pauli_mat::id()), unitary_choi(Mat::Identity(4, 4))), DimensionError);
}
