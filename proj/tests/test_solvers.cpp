#include "opscale/moments.hpp"
#include "opscale/reductions.hpp"
#include "opscale/solvers.hpp"
#include "opscale/spectral.hpp"

#include <gtest/gtest.h>

using namespace opscale;

namespace {

Operator balanced_operator()
{
    return Operator({Mat::Identity(3, 3), Mat::Identity(3, 3)});
}

double max_rel(const Operator& a, const Operator& b)
{
    double worst = 0;
    for (int i = 0; i < a.k(); ++i)
        worst = std::max(worst, (a[i] - b[i]).norm() / std::max(b[i].norm(), 1e-300));
    return worst;
}

Mat positive_matrix(int n, std::uint64_t seed)
{
    return random_bipartite_matrix(n, n, 1.0, 0.5, 1.5, seed);
}

} // namespace

TEST(ConditionNumber, Examples)
{
    EXPECT_DOUBLE_EQ(condition_number(Mat::Identity(4, 4)), 1.0);
    Mat D = Mat::Zero(2, 2);
    D(0, 0) = 2;
    D(1, 1) = 1;
    EXPECT_DOUBLE_EQ(condition_number(D), 2.0);
    const Mat M = random_operator(1, 6, 6, 3)[0];
    Eigen::BDCSVD<Mat> svd(M);
    const Vec sv = svd.singularValues();
    EXPECT_NEAR(condition_number(M), sv[0] / sv[5], 1e-9 * sv[0] / sv[5]);
    EXPECT_TRUE(std::isinf(condition_number(Mat::Zero(2, 2))));
    EXPECT_THROW(condition_number(Mat::Ones(2, 3)), std::invalid_argument);
}

TEST(GradientStep, BalancedIsFixed)
{
    const Operator op = balanced_operator();
    const auto g = gradient_step(op, 0.3);
    EXPECT_LT(distance_sq(g.op, op), 1e-28);
    EXPECT_THROW(gradient_step(op, 0.0), std::invalid_argument);
}

TEST(GradientStep, FirstOrderChanges)
{
    const double alpha = 1e-6;
    double Ks = 0, Kd = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Operator op = random_operator(2, 5, 5, 60 + s);
        const auto ep = error_matrices(op);
        const double s0 = size(op), d0 = delta(ep);
        double g = 0;
        for (const auto& h : gradient_direction(op, ep))
            g += h.squaredNorm();
        const Operator next = gradient_step(op, alpha).op;
        const double ds = size(next) - s0 + 2 * alpha * d0;
        const double dd = delta(error_matrices(next)) - d0 + 4 * alpha * g;
        Ks = std::max(Ks, std::abs(ds) / (alpha * alpha * std::pow(s0, 3)));
        Kd = std::max(Kd, std::abs(dd) / (alpha * alpha * std::pow(s0, 4)));
    }
    // second-order remainders stay bounded; the constants are instance-independent at this scale
    EXPECT_LT(Ks, 100.0);
    EXPECT_LT(Kd, 1000.0);
}

TEST(GradientDescent, BalancedInputConvergesImmediately)
{
    const auto res = run_gradient_descent(balanced_operator(), {});
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(res.iterations, 0);
    EXPECT_TRUE(res.L.isApprox(Mat::Identity(3, 3)));
    EXPECT_TRUE(res.R.isApprox(Mat::Identity(3, 3)));
    EXPECT_EQ(res.movement_sq, 0.0);
}

TEST(GradientDescent, ConvergesAndRecomposes)
{
    const Operator op = random_operator(3, 4, 5, 8);
    SolverConfig cfg;
    cfg.eta = 1e-8;
    const auto res = run_gradient_descent(op, cfg);
    ASSERT_TRUE(res.converged);
    EXPECT_LE(res.delta_final, cfg.eta * cfg.eta * res.s_final * res.s_final * (1 + 1e-9));
    EXPECT_GE(res.kappa_L, 1.0);
    EXPECT_GE(res.kappa_R, 1.0);
    EXPECT_LT(max_rel(*res.final_operator, op.sandwich(res.L, res.R)), 1e-7);
    const auto br = balance_report(*res.final_operator);
    EXPECT_NEAR(br.s, res.s_final, 1e-9 * res.s_final);
    EXPECT_LE(br.epsilon, 1e-6);
    for (std::size_t i = 1; i < res.trace.size(); ++i)
        EXPECT_LE(res.trace[i].s, res.trace[i - 1].s * (1 + 1e-9));
    EXPECT_LE(distance_sq(op, *res.final_operator), res.movement_sq + 1e-6 * size(op));
}

TEST(GradientDescent, TraceUsesCallerUnits)
{
    const Operator op = random_operator(2, 3, 3, 12).scaled(7.0);
    SolverConfig cfg;
    cfg.max_iters = 5;
    const auto res = run_gradient_descent(op, cfg);
    ASSERT_EQ(res.trace.size(), 6u);
    const auto br = balance_report(op);
    EXPECT_NEAR(res.trace[0].s, br.s, 1e-12 * br.s);
    EXPECT_NEAR(res.trace[0].delta, br.delta_total, 1e-10 * br.delta_total);
    EXPECT_NEAR(res.trace[1].t, res.alpha / br.s, 1e-15);
    EXPECT_EQ(res.status, Status::budget);
}

TEST(GradientDescent, RecordEveryKeepsFinalRow)
{
    const Operator op = random_operator(2, 3, 3, 13);
    SolverConfig cfg;
    cfg.max_iters = 25;
    cfg.record_every = 10;
    const auto res = run_gradient_descent(op, cfg);
    ASSERT_EQ(res.trace.size(), 4u);
    EXPECT_EQ(res.trace.back().iter, 25);
}

TEST(GradientDescent, HugeStepDiverges)
{
    const Operator op = random_operator(2, 4, 4, 14);
    SolverConfig cfg;
    cfg.alpha = 50;
    const auto res = run_gradient_descent(op, cfg);
    EXPECT_EQ(res.status, Status::diverged);
    EXPECT_FALSE(res.converged);
    EXPECT_FALSE(res.message.empty());
}

TEST(Alternating, MatchesGradientDescentAfterNormalization)
{
    const Operator op = random_operator(3, 4, 4, 15);
    SolverConfig cfg;
    cfg.eta = 1e-10;
    cfg.max_iters = 5000000;
    const auto gd = run_gradient_descent(op, cfg);
    cfg.algorithm = Algorithm::alternating;
    const auto alt = run_alternating(op, cfg);
    ASSERT_TRUE(gd.converged);
    ASSERT_TRUE(alt.converged);
    const Operator a = canonical_scaling(op, gd.L, gd.R);
    const Operator b = canonical_scaling(op, alt.L, alt.R);
    double diff = 0;
    for (int i = 0; i < a.k(); ++i)
        diff += (a[i] - b[i]).squaredNorm();
    EXPECT_LT(std::sqrt(diff), 1e-4);
}

TEST(Alternating, BalancedIsFixedPoint)
{
    SolverConfig cfg;
    cfg.algorithm = Algorithm::alternating;
    const auto res = run_alternating(balanced_operator(), cfg);
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(res.iterations, 0);
}

TEST(Alternating, MatrixCaseIsRowColumnNormalization)
{
    const Mat B = positive_matrix(5, 16);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::alternating;
    cfg.eta = 1e-12;
    const auto res = run_matrix_fast_path(B, cfg);
    ASSERT_TRUE(res.converged);
    Mat S = B;
    for (int it = 0; it < 10000; ++it) {
        S = (S.rowwise().sum().cwiseInverse().asDiagonal() * S).eval();
        S = (S * S.colwise().sum().cwiseInverse().asDiagonal()).eval();
    }
    const Mat got = *res.final_matrix / res.final_matrix->sum() * 5.0;
    EXPECT_LT((got - S).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Alternating, ZeroPatternWithoutScalingIsReported)
{
    Mat B(2, 2);
    B << 1, 1, 0, 0;
    SolverConfig cfg;
    cfg.algorithm = Algorithm::alternating;
    cfg.max_iters = 100;
    const auto res = run_matrix_fast_path(B, cfg);
    EXPECT_FALSE(res.converged);
    EXPECT_TRUE(res.status == Status::singular || res.status == Status::budget);
}

TEST(MatrixFastPath, AgreesWithOperatorPath)
{
    const Mat B = positive_matrix(8, 17);
    SolverConfig cfg;
    cfg.max_iters = 10;
    cfg.eta = 1e-300;
    const auto fast = run_matrix_fast_path(B, cfg);
    const auto slow = run_gradient_descent(matrix_to_operator(B), cfg);
    ASSERT_EQ(fast.trace.size(), slow.trace.size());
    for (std::size_t i = 0; i < fast.trace.size(); ++i) {
        EXPECT_NEAR(fast.trace[i].delta, slow.trace[i].delta, 1e-9 * slow.trace[i].delta);
        EXPECT_NEAR(fast.trace[i].s, slow.trace[i].s, 1e-12 * slow.trace[i].s);
    }
    const Mat row = phi_identity(*slow.final_operator);
    EXPECT_LT((Vec(row.diagonal()) - fast.final_matrix->rowwise().sum()).norm(), 1e-10 * B.sum());
    const Mat col = phi_adjoint_identity(*slow.final_operator);
    EXPECT_LT((Vec(col.diagonal()) - Vec(fast.final_matrix->colwise().sum().transpose())).norm(), 1e-10 * B.sum());
}

TEST(MatrixFastPath, BalancedUnchanged)
{
    const Mat J = Mat::Ones(4, 4);
    const auto res = run_matrix_fast_path(J, {});
    EXPECT_EQ(res.iterations, 0);
    EXPECT_TRUE(res.final_matrix->isApprox(J));
}

TEST(MatrixFastPath, GaussianSquaredIterationBudget)
{
    const Mat B = random_gaussian_squared_matrix(50, 3);
    const auto rep = certify_matrix(B);
    ASSERT_GT(rep.lambda, 0);
    SolverConfig cfg;
    cfg.eta = 1e-6;
    cfg.record_every = 1000;
    const auto res = run_matrix_fast_path(B, cfg);
    ASSERT_TRUE(res.converged);
    const double budget = 100.0 * 100.0 * (20.0 / rep.lambda) * std::log(100.0 / 1e-6);
    EXPECT_LE(res.iterations, budget);
}

TEST(FrameFastPath, AgreesWithOperatorPath)
{
    const Frame f = random_unit_frame(10, 3, 18);
    SolverConfig cfg;
    cfg.max_iters = 20;
    cfg.eta = 1e-300;
    const auto fast = run_frame_fast_path(f, cfg);
    const auto slow = run_gradient_descent(frame_to_operator(f), cfg);
    ASSERT_EQ(fast.trace.size(), slow.trace.size());
    for (std::size_t i = 0; i < fast.trace.size(); ++i)
        EXPECT_NEAR(fast.trace[i].delta, slow.trace[i].delta, 1e-9 * slow.trace[i].delta);
    for (int i = 0; i < f.n(); ++i)
        EXPECT_LT(((*slow.final_operator)[i].col(i) - fast.final_matrix->col(i)).norm(), 1e-10);
}

TEST(FrameFastPath, ConvergesToParseval)
{
    const Frame f = random_unit_frame(64, 4, 19);
    SolverConfig cfg;
    cfg.eta = 1e-9;
    cfg.alpha = 1.0 / 68;
    const auto res = run_frame_fast_path(f, cfg);
    ASSERT_TRUE(res.converged);
    const auto fsc = extract_frame_scaling(res, f);
    EXPECT_TRUE(fsc.ok);
    const Mat P = fsc.scaled.U * fsc.scaled.U.transpose();
    const double target = fsc.scaled.size() / 4;
    EXPECT_LT((P - target * Mat::Identity(4, 4)).norm(), 1e-7 * target);
}

TEST(TotalMovement, Basics)
{
    EXPECT_EQ(total_movement({}), 0.0);
    std::vector<std::vector<Mat>> steps = {{Mat::Ones(1, 1) * 3, Mat::Ones(1, 1) * 4}, {Mat::Ones(1, 1)}};
    EXPECT_NEAR(total_movement(steps), 36.0, 1e-12);
}

TEST(TotalMovement, BoundedOnGappedFrame)
{
    const Frame unit = random_unit_frame(256, 8, 20);
    const Frame f(unit.U * std::sqrt(8.0 / 256));
    const auto rep = certify_frame(f);
    SolverConfig cfg;
    cfg.alpha = 1.0 / 264;
    const auto res = run_frame_fast_path(f, cfg);
    ASSERT_TRUE(res.converged);
    EXPECT_LE(res.movement_sq, 2 * rep.s * rep.epsilon * rep.epsilon / rep.lambda);
    EXPECT_LE((*res.final_matrix - f.U).squaredNorm(), res.movement_sq + 1e-6 * rep.s);
}

TEST(CanonicalScaling, UnitSizeAndDetOne)
{
    const Operator op = random_operator(2, 3, 3, 21);
    const Mat L = random_operator(1, 3, 3, 22)[0], R = random_operator(1, 3, 3, 23)[0];
    const Operator c = canonical_scaling(op, L, R);
    EXPECT_NEAR(size(c), 1.0, 1e-12);
}

TEST(SolverConfig, Validation)
{
    SolverConfig cfg;
    cfg.eta = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.record_every = 0;
    EXPECT_THROW(run_gradient_descent(balanced_operator(), cfg), std::invalid_argument);
}
