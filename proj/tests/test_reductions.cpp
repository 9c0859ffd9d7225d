#include "opscale/moments.hpp"
#include "opscale/reductions.hpp"
#include "opscale/solvers.hpp"
#include "opscale/spectral.hpp"

#include <gtest/gtest.h>

using namespace opscale;

namespace {

Mat unit_mat(int r, int c, int i, int j)
{
    Mat u = Mat::Zero(r, c);
    u(i, j) = 1;
    return u;
}

} // namespace

TEST(MatrixReduction, IdentityHasTwoUnitKrausMatrices)
{
    const Operator op = matrix_to_operator(Mat::Identity(2, 2));
    ASSERT_EQ(op.k(), 2);
    for (const auto& a : op.matrices()) {
        EXPECT_EQ(a.sum(), 1.0);
        EXPECT_EQ(a.squaredNorm(), 1.0);
    }
}

TEST(MatrixReduction, BalanceAndSizeAgree)
{
    for (std::uint64_t s = 0; s < 50; ++s) {
        const Mat B = random_bipartite_matrix(4, 6, 0.6, 0.0, 2.0, s);
        const Operator op = matrix_to_operator(B);
        const auto a = matrix_balance_report(B), b = balance_report(op);
        EXPECT_NEAR(a.s, b.s, 1e-12 * a.s);
        EXPECT_NEAR(a.epsilon, b.epsilon, 1e-12);
        EXPECT_NEAR(a.delta_total, b.delta_total, 1e-10 * (1 + a.delta_total));
    }
}

TEST(MatrixReduction, RejectsNegativeEntries)
{
    Mat B = Mat::Ones(2, 2);
    B(0, 0) = -1;
    EXPECT_THROW(matrix_to_operator(B), std::invalid_argument);
    EXPECT_THROW(matrix_to_operator(Mat::Zero(2, 2)), std::invalid_argument);
}

TEST(FrameReduction, Marginals)
{
    const Operator basis = frame_to_operator(Frame(Mat::Identity(3, 3)));
    EXPECT_TRUE(phi_identity(basis).isApprox(Mat::Identity(3, 3)));
    EXPECT_TRUE(phi_adjoint_identity(basis).isApprox(Mat::Identity(3, 3)));
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Frame f(random_operator(1, 3, 7, s)[0]);
        const Operator op = frame_to_operator(f);
        Mat outer = Mat::Zero(3, 3);
        for (int i = 0; i < 7; ++i)
            outer += f.U.col(i) * f.U.col(i).transpose();
        EXPECT_LT((phi_identity(op) - outer).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(balance_report(op).epsilon, frame_balance_report(f).epsilon, 1e-12);
    }
}

TEST(Frame, RejectsBadInput)
{
    EXPECT_THROW(Frame(Mat(0, 3)), std::invalid_argument);
    EXPECT_THROW(Frame(Mat::Zero(2, 3)), std::invalid_argument);
}

TEST(DiagonalScaling, MatrixExtraction)
{
    const Mat J = Mat::Ones(3, 3);
    const auto trivial = extract_matrix_scaling(run_matrix_fast_path(J, {}));
    EXPECT_TRUE(trivial.dL.isApprox(Vec::Ones(3)));
    EXPECT_TRUE(trivial.dR.isApprox(Vec::Ones(3)));

    const Mat B = random_bipartite_matrix(5, 5, 1.0, 0.2, 1.0, 3);
    SolverConfig cfg;
    cfg.eta = 1e-9;
    const auto res = run_gradient_descent(matrix_to_operator(B), cfg);
    ASSERT_TRUE(res.converged);
    const auto ds = extract_matrix_scaling(res);
    EXPECT_TRUE(ds.ok);
    const Mat S = apply_diagonal_scaling(B, ds);
    const double s = S.sum();
    EXPECT_LT((S.rowwise().sum().array() - s / 5).abs().maxCoeff(), 1e-6 * s);
    EXPECT_LT((S.colwise().sum().array() - s / 5).abs().maxCoeff(), 1e-6 * s);
}

TEST(BLReduction, GeometricDatumIsBalanced)
{
    // two orthogonal projections of R^2 onto coordinate lines, exponents 1
    BLDatum dt;
    dt.n = 2;
    dt.denominator = 1;
    dt.maps.push_back({1, unit_mat(1, 2, 0, 0), 1});
    Mat e2 = Mat::Zero(1, 2);
    e2(0, 1) = 1;
    dt.maps.push_back({1, e2, 1});
    const Operator op = bl_datum_to_operator(dt);
    EXPECT_EQ(op.m(), 2);
    EXPECT_EQ(op.n(), 2);
    EXPECT_NEAR(balance_report(op).epsilon, 0, 1e-14);
}

TEST(BLReduction, RankOneDatumShapeAndCertificate)
{
    const Frame f = random_unit_frame(12, 3, 4);
    const BLDatum dt = rank_one_datum(f);
    EXPECT_NO_THROW(dt.validate());
    const Operator op = bl_datum_to_operator(dt);
    EXPECT_EQ(op.m(), 3);
    EXPECT_EQ(op.n(), 12 * 3);
    EXPECT_EQ(op.k(), 12 * 3);
    const auto a = frame_balance_report(f), b = balance_report(op);
    EXPECT_NEAR(a.epsilon, b.epsilon, 1e-12);
}

TEST(BLReduction, RejectsInconsistentExponents)
{
    BLDatum dt;
    dt.n = 2;
    dt.denominator = 1;
    dt.maps.push_back({1, Mat::Ones(1, 2), 1});
    EXPECT_THROW(dt.validate(), std::invalid_argument);
    EXPECT_THROW(bl_datum_to_operator(dt), std::invalid_argument);
}
