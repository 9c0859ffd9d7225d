#pragma once

#include "operator.hpp"
#include "reductions.hpp"
#include "result.hpp"

#include <cmath>
#include <limits>

namespace opscale {

inline double condition_number(const Mat& M)
{
    if (M.rows() != M.cols() || M.rows() == 0)
        throw std::invalid_argument("condition_number: square matrix required");
    Eigen::JacobiSVD<Mat> svd(M);
    const Vec& sv = svd.singularValues();
    const double lo = sv[sv.size() - 1];
    if (!(lo > 0))
        return std::numeric_limits<double>::infinity();
    return sv[0] / lo;
}

inline double diagonal_condition(const Vec& d)
{
    const Vec a = d.cwiseAbs();
    const double lo = a.minCoeff();
    if (!(lo > 0))
        return std::numeric_limits<double>::infinity();
    return a.maxCoeff() / lo;
}

inline double symmetric_opnorm(const Mat& S)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct GradientStep {
    Operator op;
    Mat step_L;
    Mat step_R;
};

inline GradientStep gradient_step(const Operator& op, double alpha)
{
    if (!(alpha > 0))
        throw std::invalid_argument("gradient_step: alpha must be positive");
    const auto ep = error_matrices(op);
    GradientStep g;
    g.step_L = Mat::Identity(op.m(), op.m()) + alpha * ep.E;
    g.step_R = Mat::Identity(op.n(), op.n()) + alpha * ep.F;
    g.op = op.sandwich(g.step_L, g.step_R);
    return g;
}

// (sum over steps of sqrt(sum_i ||dA_i||_F^2))^2
inline double total_movement(const std::vector<std::vector<Mat>>& steps)
{
    double path = 0;
    for (const auto& st : steps) {
        double sq = 0;
        for (const auto& d : st)
            sq += d.squaredNorm();
        path += std::sqrt(sq);
    }
    return path * path;
}

inline double distance_sq(const Operator& a, const Operator& b)
{
    double d = 0;
    for (int i = 0; i < a.k(); ++i)
        d += (a[i] - b[i]).squaredNorm();
    return d;
}

namespace detail {

struct StepOutcome {
    double move_sq = 0;
    bool ok = true;
};

// Every path works on a unit-size copy of the instance.
struct OperatorPath {
    std::vector<Mat> A;
    Mat L, R, E, F;
    double s = 0, delta = 0;
    int m = 0, n = 0;

    explicit OperatorPath(const Operator& op, double inv_root)
        : m(op.m()), n(op.n())
    {
        for (const auto& a : op.matrices())
            A.push_back(inv_root * a);
        L = Mat::Identity(m, m);
        R = Mat::Identity(n, n);
        measure();
    }

    Mat row() const
    {
        Mat r = Mat::Zero(m, m);
        for (const auto& a : A)
            r.noalias() += a * a.transpose();
        return r;
    }

    Mat col() const
    {
        Mat c = Mat::Zero(n, n);
        for (const auto& a : A)
            c.noalias() += a.transpose() * a;
        return c;
    }

    void measure()
    {
        const Mat r = row();
        s = r.trace();
        auto ep = error_matrices_from(r, col(), s);
        E = std::move(ep.E);
        F = std::move(ep.F);
        delta = E.squaredNorm() / m + F.squaredNorm() / n;
    }

    double E_op() const { return symmetric_opnorm(E); }
    double F_op() const { return symmetric_opnorm(F); }
    double kappa_L() const { return condition_number(L); }
    double kappa_R() const { return condition_number(R); }
    double epsilon() const { return epsilon_from(row(), col(), s); }
    Mat left() const { return L; }
    Mat right() const { return R; }

    StepOutcome step(double alpha)
    {
        const Mat SL = Mat::Identity(m, m) + alpha * E;
        const Mat SR = Mat::Identity(n, n) + alpha * F;
        StepOutcome out;
        for (auto& a : A) {
            Mat next = SL * a * SR;
            out.move_sq += (next - a).squaredNorm();
            a = std::move(next);
        }
        L = (SL * L).eval();
        R = (R * SR).eval();
        measure();
        return out;
    }

    // one left and one right normalization
    StepOutcome alternate()
    {
        StepOutcome out;
        const std::vector<Mat> before = A;
        auto side = [&](const Mat& P, int dim) -> std::optional<Mat> {
            Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()));
            if (es.eigenvalues().minCoeff() < 1e-12 * s / dim)
                return std::nullopt;
            return std::sqrt(s / dim) * psd_power(P, -0.5, 1e-14 * s);
        };
        auto SL = side(row(), m);
        if (!SL) {
            out.ok = false;
            return out;
        }
        for (auto& a : A)
            a = (*SL * a).eval();
        L = (*SL * L).eval();
        auto SR = side(col(), n);
        if (!SR) {
            out.ok = false;
            return out;
        }
        for (auto& a : A)
            a = (a * *SR).eval();
        R = (R * *SR).eval();
        for (std::size_t i = 0; i < A.size(); ++i)
            out.move_sq += (A[i] - before[i]).squaredNorm();
        measure();
        return out;
    }
};

// B_ij = a_ij^2 with diagonal L = diag(l), R = diag(r)
struct MatrixPath {
    Mat B;
    Vec l, r, rs, cs, e, f;
    double s = 0, delta = 0;
    int m = 0, n = 0;

    MatrixPath(const Mat& B0, double inv_s)
        : B(inv_s * B0), l(Vec::Ones(B0.rows())), r(Vec::Ones(B0.cols())),
          m(static_cast<int>(B0.rows())), n(static_cast<int>(B0.cols()))
    {
        rs = B.rowwise().sum();
        cs = B.colwise().sum().transpose();
        measure();
    }

    void measure()
    {
        s = rs.sum();
        e = Vec::Constant(m, s) - m * rs;
        f = Vec::Constant(n, s) - n * cs;
        delta = e.squaredNorm() / m + f.squaredNorm() / n;
    }

    double E_op() const { return e.cwiseAbs().maxCoeff(); }
    double F_op() const { return f.cwiseAbs().maxCoeff(); }
    double kappa_L() const { return diagonal_condition(l); }
    double kappa_R() const { return diagonal_condition(r); }
    double epsilon() const { return epsilon_from_diagonals(rs, cs, s); }
    Mat left() const { return l.asDiagonal(); }
    Mat right() const { return r.asDiagonal(); }

    // double-buffered so a rejected step can be undone without a full copy
    struct Saved {
        Vec l, r, rs, cs, e, f;
        double s = 0, delta = 0;
    } saved;
    Mat Bn;

    void save()
    {
        saved = {l, r, rs, cs, e, f, s, delta};
    }

    void restore()
    {
        B.swap(Bn);
        l = saved.l;
        r = saved.r;
        rs = saved.rs;
        cs = saved.cs;
        e = saved.e;
        f = saved.f;
        s = saved.s;
        delta = saved.delta;
    }

    StepOutcome step(double alpha)
    {
        const Vec ae = alpha * e;
        const Vec af = alpha * f;
        StepOutcome out;
        Bn.resize(m, n);
        rs.setZero();
        for (int j = 0; j < n; ++j) {
            double csum = 0;
            const double bj = 1.0 + af[j];
            const double bj2 = bj * bj;
            const double fj = af[j];
            const double* col = B.col(j).data();
            double* dst = Bn.col(j).data();
            double mv = 0;
            for (int i = 0; i < m; ++i) {
                const double g = ae[i] + fj + ae[i] * fj; // (1+ae)(1+af) - 1
                const double b = col[i];
                mv += b * g * g;
                const double ai = 1.0 + ae[i];
                const double nb = b * ai * ai * bj2;
                dst[i] = nb;
                rs[i] += nb;
                csum += nb;
            }
            out.move_sq += mv;
            cs[j] = csum;
        }
        B.swap(Bn);
        l.array() *= (1.0 + ae.array());
        r.array() *= (1.0 + af.array());
        measure();
        return out;
    }

    StepOutcome alternate()
    {
        StepOutcome out;
        if (rs.minCoeff() < 1e-12 * s / m) {
            out.ok = false;
            return out;
        }
        const Vec a = (s / m / rs.array()).sqrt().matrix();
        Mat B1 = a.array().square().matrix().asDiagonal() * B;
        const Vec c1 = B1.colwise().sum().transpose();
        if (c1.minCoeff() < 1e-12 * s / n) {
            out.ok = false;
            return out;
        }
        const Vec b = (s / n / c1.array()).sqrt().matrix();
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < m; ++i) {
                const double g = a[i] * b[j] - 1.0;
                out.move_sq += B(i, j) * g * g;
            }
        B = B1 * b.array().square().matrix().asDiagonal();
        l.array() *= a.array();
        r.array() *= b.array();
        rs = B.rowwise().sum();
        cs = B.colwise().sum().transpose();
        measure();
        return out;
    }
};

// Kraus u_i e_i^T: L is d x d, R = diag(r)
struct FramePath {
    Mat U, L, E;
    Vec r, f;
    double s = 0, delta = 0;
    int m = 0, n = 0;

    FramePath(const Mat& U0, double inv_root)
        : U(inv_root * U0), L(Mat::Identity(U0.rows(), U0.rows())), r(Vec::Ones(U0.cols())),
          m(static_cast<int>(U0.rows())), n(static_cast<int>(U0.cols()))
    {
        measure();
    }

    void measure()
    {
        Mat P = Mat::Zero(m, m);
        P.selfadjointView<Eigen::Lower>().rankUpdate(U);
        P = P.selfadjointView<Eigen::Lower>();
        const Vec cn = U.colwise().squaredNorm().transpose();
        s = cn.sum();
        E = s * Mat::Identity(m, m) - m * P;
        f = Vec::Constant(n, s) - n * cn;
        delta = E.squaredNorm() / m + f.squaredNorm() / n;
    }

    double E_op() const { return symmetric_opnorm(E); }
    double F_op() const { return f.cwiseAbs().maxCoeff(); }
    double kappa_L() const { return condition_number(L); }
    double kappa_R() const { return diagonal_condition(r); }
    double epsilon() const
    {
        const Mat P = U * U.transpose();
        const Mat c = U.colwise().squaredNorm().transpose().asDiagonal();
        return epsilon_from(P, c, s);
    }
    Mat left() const { return L; }
    Mat right() const { return r.asDiagonal(); }

    StepOutcome step(double alpha)
    {
        const Mat SL = Mat::Identity(m, m) + alpha * E;
        const Vec sr = Vec::Ones(n) + alpha * f;
        Mat next = SL * U * sr.asDiagonal();
        StepOutcome out;
        out.move_sq = (next - U).squaredNorm();
        U = std::move(next);
        L = (SL * L).eval();
        r.array() *= sr.array();
        measure();
        return out;
    }
};

template <class Path>
ScalingResult run_flow(Path p, double s0, const SolverConfig& cfg, bool alternating)
{
    cfg.validate();
    ScalingResult res;
    res.s_initial = s0;
    double alpha = cfg.alpha > 0 ? cfg.alpha : 1.0 / std::pow(double(p.m + p.n), 2);
    res.alpha = alpha;
    bool halved = false;
    double t = 0, path = 0;
    long iter = 0;
    long last_recorded = -1;

    auto record = [&]() {
        TraceRow row;
        row.iter = iter;
        row.t = t;
        row.s = s0 * p.s;
        row.delta = s0 * s0 * p.delta;
        row.E_op = s0 * p.E_op();
        row.F_op = s0 * p.F_op();
        row.kappa_L = p.kappa_L();
        row.kappa_R = p.kappa_R();
        res.trace.push_back(row);
        last_recorded = iter;
    };

    for (;;) {
        if (iter % cfg.record_every == 0 && last_recorded != iter)
            record();
        if (p.delta <= cfg.eta * cfg.eta * p.s * p.s) {
            res.status = Status::converged;
            break;
        }
        if (iter >= cfg.max_iters) {
            res.status = Status::budget;
            res.message = "iteration budget exhausted";
            break;
        }
        std::optional<Path> backup;
        if constexpr (requires { p.save(); })
            p.save();
        else
            backup = p;
        auto undo = [&]() {
            if constexpr (requires { p.restore(); })
                p.restore();
            else
                p = std::move(*backup);
        };
        const double prev = p.delta;
        StepOutcome so;
        if constexpr (requires { p.alternate(); }) {
            if (alternating)
                so = p.alternate();
            else
                so = p.step(alpha);
        } else {
            so = p.step(alpha);
        }
        if (alternating) {
            if (!so.ok) {
                undo();
                res.status = Status::singular;
                res.message = "marginal became singular; the instance likely admits no scaling";
                break;
            }
        } else {
            if (!std::isfinite(p.delta) || p.delta > 1.1 * prev) {
                undo();
                if (halved) {
                    res.status = Status::diverged;
                    res.message = "error grew by more than 10% after halving the step";
                    break;
                }
                halved = true;
                alpha *= 0.5;
                res.alpha = alpha;
                continue;
            }
        }
        path += std::sqrt(so.move_sq);
        t += alternating ? 1.0 : alpha / s0;
        ++iter;
    }
    if (last_recorded != iter)
        record();

    res.converged = res.status == Status::converged;
    res.iterations = iter;
    res.L = p.left();
    res.R = p.right();
    res.kappa_L = p.kappa_L();
    res.kappa_R = p.kappa_R();
    res.s_final = s0 * p.s;
    res.delta_final = s0 * s0 * p.delta;
    res.epsilon_final = p.epsilon();
    res.path_length = std::sqrt(s0) * path;
    res.movement_sq = res.path_length * res.path_length;
    return res;
}

} // namespace detail

inline ScalingResult run_gradient_descent(const Operator& op, const SolverConfig& cfg)
{
    const double s0 = size(op);
    detail::OperatorPath p(op, 1.0 / std::sqrt(s0));
    auto res = detail::run_flow(p, s0, cfg, false);
    res.final_operator = op.sandwich(res.L, res.R);
    return res;
}

inline ScalingResult run_alternating(const Operator& op, const SolverConfig& cfg)
{
    const double s0 = size(op);
    detail::OperatorPath p(op, 1.0 / std::sqrt(s0));
    auto res = detail::run_flow(p, s0, cfg, true);
    res.final_operator = op.sandwich(res.L, res.R);
    return res;
}

inline ScalingResult run_matrix_fast_path(const Mat& B, const SolverConfig& cfg)
{
    check_nonnegative(B);
    const double s0 = B.sum();
    detail::MatrixPath p(B, 1.0 / s0);
    auto res = detail::run_flow(p, s0, cfg, cfg.algorithm == Algorithm::alternating);
    const Vec l = res.L.diagonal(), r = res.R.diagonal();
    res.final_matrix = l.array().square().matrix().asDiagonal() * B * r.array().square().matrix().asDiagonal();
    res.L = Mat(l.asDiagonal());
    res.R = Mat(r.asDiagonal());
    return res;
}

inline ScalingResult run_frame_fast_path(const Frame& f, const SolverConfig& cfg)
{
    if (cfg.algorithm == Algorithm::alternating)
        return run_alternating(frame_to_operator(f), cfg);
    const double s0 = f.size();
    detail::FramePath p(f.U, 1.0 / std::sqrt(s0));
    auto res = detail::run_flow(p, s0, cfg, false);
    res.final_matrix = res.L * f.U * res.R.diagonal().asDiagonal();
    res.R = Mat(res.R.diagonal().asDiagonal());
    return res;
}

inline ScalingResult run_solver(const Operator& op, const SolverConfig& cfg)
{
    return cfg.algorithm == Algorithm::alternating ? run_alternating(op, cfg)
                                                   : run_gradient_descent(op, cfg);
}

// (L^T L)^{1/2} A (R R^T)^{1/2}, left factor at det 1, rescaled to unit size
inline Operator canonical_scaling(const Operator& op0, const Mat& L, const Mat& R)
{
    Mat PL = psd_power(L.transpose() * L, 0.5);
    Mat PR = psd_power(R * R.transpose(), 0.5);
    const double logdet = Eigen::SelfAdjointEigenSolver<Mat>(PL).eigenvalues().array().log().sum();
    PL *= std::exp(-logdet / PL.rows());
    Operator c = op0.sandwich(PL, PR);
    return c.scaled(1.0 / std::sqrt(size(c)));
}

} // namespace opscale
