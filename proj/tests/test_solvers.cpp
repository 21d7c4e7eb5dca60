#include "webplate/plate.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace webplate;

namespace {

Eigen::MatrixXd random_spd(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = g(rng);
    return m * m.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

DiscreteSystem dense_system(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    DiscreteSystem s;
    s.A = SparseSym::from_dense(A);
    s.B = SparseSym::from_dense(B);
    return s;
}

}  // namespace

TEST(Factorization, TwoByTwo) {
    DiscreteSystem s;
    s.A = SparseSym::from_dense((Eigen::MatrixXd(2, 2) << 2, 0, 0, 3).finished());
    s.b = Eigen::Vector2d(2, 3);
    const BendingSolution r = solve_bending(s);
    EXPECT_NEAR(r.w[0], 1.0, 1e-15);
    EXPECT_NEAR(r.w[1], 1.0, 1e-15);
    EXPECT_LT(r.residual, 1e-15);
}

TEST(Factorization, ZeroRightHandSide) {
    DiscreteSystem s;
    s.A = SparseSym::from_dense(random_spd(20, 1));
    s.b = Eigen::VectorXd::Zero(20);
    EXPECT_EQ(solve_bending(s).w.norm(), 0.0);
}

TEST(Factorization, SingularMatrixReported) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
    a(3, 3) = 0.0;
    try {
        (void)factorize(SparseSym::from_dense(a));
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "matrix numerically singular (estimated rank deficiency 1)");
    }
    DiscreteSystem s;
    s.A = SparseSym::from_dense(a);
    s.b = Eigen::VectorXd::Ones(4);
    try {
        (void)solve_bending(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()).rfind("stiffness matrix singular (check boundary conditions)", 0), 0u);
    }
}

TEST(Factorization, RandomSpdResidual) {
    const Eigen::MatrixXd a = random_spd(60, 2);
    const Factorization f(SparseSym::from_dense(a));
    EXPECT_TRUE(f.positive_definite());
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(60, -1.0, 2.0);
    const Eigen::VectorXd x = f.solve(b);
    EXPECT_LT(f.relative_residual(x, b), 1e-14);
    EXPECT_LT((x - a.ldlt().solve(b)).norm(), 1e-12 * x.norm());
}

TEST(SparseSym, SymmetrizedIsExact) {
    Eigen::MatrixXd m = random_spd(10, 3);
    m(2, 7) += 1e-3;
    EXPECT_EQ(SparseSym::from_dense(m).asymmetry(), 0.0);
}

TEST(Buckling, IdentityPair) {
    const auto I = Eigen::MatrixXd::Identity(3, 3);
    EXPECT_NEAR(solve_buckling(dense_system(I, -I)).lambda, 1.0, 1e-14);
}

TEST(Buckling, DiagonalPair) {
    const Eigen::MatrixXd A = (Eigen::MatrixXd(2, 2) << 2, 0, 0, 3).finished();
    const BucklingSolution s = solve_buckling(dense_system(A, -Eigen::MatrixXd::Identity(2, 2)), 2);
    EXPECT_NEAR(s.lambda, 2.0, 1e-14);
    EXPECT_NEAR(std::abs(s.mode[0]), 1.0, 1e-14);
    EXPECT_NEAR(s.mode[1], 0.0, 1e-14);
    ASSERT_EQ(s.higher.size(), 1);
    EXPECT_NEAR(s.higher[0], 3.0, 1e-13);
}

TEST(Buckling, TensionOnlyHasNoBuckling) {
    const auto I = Eigen::MatrixXd::Identity(3, 3);
    try {
        (void)solve_buckling(dense_system(I, I));
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "loading produces no buckling (tension-dominated)");
    }
}

TEST(Buckling, MatchesInverseIterationOracle) {
    const int n = 50;
    const Eigen::MatrixXd A = random_spd(n, 4);
    // indefinite geometric matrix: compression dominates one direction
    Eigen::MatrixXd B = random_spd(n, 5);
    std::mt19937 rng(6);
    std::normal_distribution<double> g;
    Eigen::MatrixXd S(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) S(i, j) = g(rng);
    B = -(B - 0.8 * (S + S.transpose()));
    const BucklingSolution s = solve_buckling(dense_system(A, B));
    // shifted power iteration on A^{-1}(-B) for the largest positive mu
    const Eigen::LDLT<Eigen::MatrixXd> la(A);
    const Eigen::MatrixXd Op = la.solve(-B);
    const double shift = 100.0;
    const Eigen::MatrixXd P = Op + shift * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    double mu = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd w = P * v;
        mu = w.norm() / v.norm();
        v = w / w.norm();
    }
    mu -= shift;
    EXPECT_NEAR(s.lambda, 1.0 / mu, 1e-8 * s.lambda);
    EXPECT_LT(s.residual, 1e-10);
    EXPECT_NEAR(s.mode.cwiseAbs().maxCoeff(), 1.0, 1e-15);
}

TEST(GeneralizedEigen, AgreesWithEigenLibrary) {
    const int n = 30;
    const Eigen::MatrixXd A = random_spd(n, 7);
    const Eigen::MatrixXd M = random_spd(n, 8);
    const EigenPairs ep = gen_eig_symmetric(A, M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(A, M);
    ASSERT_EQ(ep.values.size(), n);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(ep.values[i], ref.eigenvalues()[i], 1e-10 * ref.eigenvalues()[i]);
}

TEST(GeneralizedEigen, OversizeRejected) {
    const int n = kDenseEigenLimit + 1;
    try {
        detail::check_dense_size(n);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("use finer-grained tooling or coarser grid"), std::string::npos);
    }
}
