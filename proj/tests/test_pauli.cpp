#include "braidlab/pauli.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace braidlab;

namespace {

// oracle: kron of 2x2 matrices, qubit 0 leftmost
Mat dense_letters(const std::string& s)
{
    Mat m = Mat::Identity(1, 1);
    for (char c : s) {
        Mat p = c == 'X' ? pauli_mat::x() : c == 'Y' ? pauli_mat::y() : c == 'Z' ? pauli_mat::z() : pauli_mat::id();
        m = kron(m, p);
    }
    return m;
}

std::string random_letters(std::mt19937_64& gen, int n)
{
    std::string s;
    for (int i = 0; i < n; ++i) s += "IXYZ"[gen() % 4];
    return s;
}

} // namespace

TEST(Pauli, SingleQubitProducts)
{
    auto p = [](const char* s) { return PauliString::parse(s); };
    EXPECT_EQ(p("X") * p("Y"), p("+i Z"));
    EXPECT_EQ(p("Y") * p("Z"), p("+i X"));
    EXPECT_EQ(p("Z") * p("X"), p("+i Y"));
    EXPECT_EQ(p("Y") * p("X"), p("-i Z"));
    EXPECT_EQ(p("X") * p("X"), p("I"));
}

TEST(Pauli, DenseMatchesKron)
{
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 1 + trial % 5;
        std::string s = random_letters(gen, n);
        int ph = static_cast<int>(gen() % 4);
        PauliString p = PauliString::from_letters(s, ph);
        Mat want = p.phase_value() * dense_letters(s);
        EXPECT_LT((to_dense(p) - want).norm(), 1e-14) << p;
    }
}

TEST(Pauli, ProductAndCommutationAgreeWithMatrices)
{
    std::mt19937_64 gen(2);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 4;
        PauliString a = PauliString::from_letters(random_letters(gen, n), static_cast<int>(gen() % 4));
        PauliString b = PauliString::from_letters(random_letters(gen, n), static_cast<int>(gen() % 4));
        Mat da = to_dense(a), db = to_dense(b);
        EXPECT_LT((to_dense(a * b) - da * db).norm(), 1e-13);
        bool dense_commute = (da * db - db * da).norm() < 1e-12;
        EXPECT_EQ(commutes(a, b), dense_commute);
    }
}

TEST(Pauli, QubitZeroIsMostSignificant)
{
    PauliString x0 = PauliString::on(3, {{0, 'X'}});
    EXPECT_EQ(x0.index_flip_mask(), 4u);
    Vec v = Vec::Zero(8);
    v(0) = 1;
    Vec w = apply_pauli(x0, v);
    EXPECT_NEAR(std::abs(w(4)), 1.0, 1e-15);
}

TEST(Pauli, TextRoundTrip)
{
    for (const char* s : {"+ XIZY", "+i XIZY", "- ZZ", "-i YYI"}) {
        PauliString p = PauliString::parse(s);
        EXPECT_EQ(p.str(), s);
        EXPECT_EQ(PauliString::parse(p.str()), p);
    }
    EXPECT_EQ(PauliString::parse("-ZZ"), PauliString::from_letters("ZZ", 2));
    EXPECT_THROW(PauliString::parse("+ XQ"), std::invalid_argument);
    EXPECT_THROW(PauliString::parse("+"), std::invalid_argument);
}

TEST(Pauli, HermiticityFollowsPhase)
{
    EXPECT_TRUE(PauliString::parse("- XY").is_hermitian());
    EXPECT_FALSE(PauliString::parse("+i XY").is_hermitian());
}

TEST(OperatorSum, ApplyMatchesDense)
{
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    const int n = 5;
    OperatorSum h(n);
    for (int k = 0; k < 8; ++k) h.add(nd(gen), PauliString::from_letters(random_letters(gen, n)));
    EXPECT_TRUE(h.is_hermitian());
    Vec v(1 << n);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(nd(gen), nd(gen));
    EXPECT_LT((h.apply(v) - h.to_dense() * v).norm(), 1e-12);
}

TEST(OperatorSum, CombinesLikeTermsAndFoldsPhase)
{
    OperatorSum s(2);
    s.add(1.0, PauliString::parse("+ XZ"));
    s.add(2.0, PauliString::parse("- XZ"));
    s.add(1.0, PauliString::parse("+i ZZ"));
    ASSERT_EQ(s.size(), 2u);
    EXPECT_FALSE(s.is_hermitian());
    OperatorSum z = s + cplx(-1) * s;
    EXPECT_TRUE(z.empty());
    OperatorSum small(2);
    small.add(1e-16, PauliString::parse("XX"));
    EXPECT_TRUE(small.pruned(1e-14).empty());
}

TEST(OperatorSum, ProductMatchesDense)
{
    OperatorSum a(3), b(3);
    a.add(0.5, PauliString::parse("XYZ"));
    a.add(-1.0, PauliString::parse("ZII"));
    b.add(2.0, PauliString::parse("YYI"));
    b.add(cplx(0, 1), PauliString::parse("IXZ"));
    EXPECT_LT(((a * b).to_dense() - a.to_dense() * b.to_dense()).norm(), 1e-13);
}

TEST(Pauli, DimensionGuards)
{
    EXPECT_THROW(PauliString(0), DimensionError);
    EXPECT_THROW(multiply(PauliString(2), PauliString(3)), DimensionError);
    EXPECT_THROW(to_dense(PauliString(11)), DimensionError);
    EXPECT_THROW(PauliString::on(3, {{3, 'X'}}), DimensionError);
    OperatorSum s(3);
    EXPECT_THROW(s.add(1.0, PauliString(4)), DimensionError);
    EXPECT_THROW(s.apply(Vec::Zero(4)), DimensionError);
}
