#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace opscale {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kDenseBudget = 1e8;

// A tuple of k real m x n Kraus matrices.
class Operator {
public:
    Operator() = default;

    explicit Operator(std::vector<Mat> mats) : mats_(std::move(mats))
    {
        if (mats_.empty())
            throw std::invalid_argument("operator needs at least one matrix");
        m_ = static_cast<int>(mats_[0].rows());
        n_ = static_cast<int>(mats_[0].cols());
        if (m_ < 1 || n_ < 1)
            throw std::invalid_argument("operator matrices must be non-empty");
        double s = 0.0;
        for (const auto& a : mats_) {
            if (a.rows() != m_ || a.cols() != n_)
                throw std::invalid_argument("operator matrices differ in shape");
            if (!a.allFinite())
                throw std::invalid_argument("operator has non-finite entries");
            s += a.squaredNorm();
        }
        if (!(s > 0.0))
            throw std::invalid_argument("zero operator");
    }

    int m() const { return m_; }
    int n() const { return n_; }
    int k() const { return static_cast<int>(mats_.size()); }
    const Mat& operator[](std::size_t i) const { return mats_[i]; }
    const std::vector<Mat>& matrices() const { return mats_; }

    Operator transposed() const
    {
        std::vector<Mat> t;
        t.reserve(mats_.size());
        for (const auto& a : mats_)
            t.push_back(a.transpose());
        return Operator(std::move(t));
    }

    Operator scaled(double c) const
    {
        std::vector<Mat> t;
        t.reserve(mats_.size());
        for (const auto& a : mats_)
            t.push_back(c * a);
        return Operator(std::move(t));
    }

    // L * A_i * R for every i
    Operator sandwich(const Mat& L, const Mat& R) const
    {
        std::vector<Mat> t;
        t.reserve(mats_.size());
        for (const auto& a : mats_)
            t.push_back(L * a * R);
        return Operator(std::move(t));
    }

private:
    int m_ = 0;
    int n_ = 0;
    std::vector<Mat> mats_;
};

struct Oriented {
    Operator op;
    bool flipped = false;
};

// transpose so that m <= n
inline Oriented normalize_orientation(const Operator& op)
{
    if (op.m() <= op.n())
        return {op, false};
    return {op.transposed(), true};
}

struct ErrorPair {
    Mat E;
    Mat F;
};

struct BalanceReport {
    double s = 0;
    double epsilon = 0;
    double delta_total = 0;
    double delta_E = 0;
    double delta_F = 0;
};

inline double size(const Operator& op)
{
    double s = 0.0;
    for (const auto& a : op.matrices())
        s += a.squaredNorm();
    return s;
}

inline Mat apply_phi(const Operator& op, const Mat& Y)
{
    if (Y.rows() != op.n() || Y.cols() != op.n())
        throw std::invalid_argument("apply_phi: Y must be n x n");
    Mat out = Mat::Zero(op.m(), op.m());
    for (const auto& a : op.matrices())
        out.noalias() += a * Y * a.transpose();
    return out;
}

inline Mat apply_phi_adjoint(const Operator& op, const Mat& X)
{
    if (X.rows() != op.m() || X.cols() != op.m())
        throw std::invalid_argument("apply_phi_adjoint: X must be m x m");
    Mat out = Mat::Zero(op.n(), op.n());
    for (const auto& a : op.matrices())
        out.noalias() += a.transpose() * X * a;
    return out;
}

// Phi(I_n) and Phi*(I_m) without forming identities
inline Mat phi_identity(const Operator& op)
{
    Mat out = Mat::Zero(op.m(), op.m());
    for (const auto& a : op.matrices())
        out.noalias() += a * a.transpose();
    return out;
}

inline Mat phi_adjoint_identity(const Operator& op)
{
    Mat out = Mat::Zero(op.n(), op.n());
    for (const auto& a : op.matrices())
        out.noalias() += a.transpose() * a;
    return out;
}

inline ErrorPair error_matrices_from(const Mat& row, const Mat& col, double s)
{
    const auto m = row.rows();
    const auto n = col.rows();
    ErrorPair ep;
    ep.E = s * Mat::Identity(m, m) - static_cast<double>(m) * row;
    ep.F = s * Mat::Identity(n, n) - static_cast<double>(n) * col;
    ep.E = 0.5 * (ep.E + ep.E.transpose()).eval();
    ep.F = 0.5 * (ep.F + ep.F.transpose()).eval();
    return ep;
}

inline ErrorPair error_matrices(const Operator& op)
{
    return error_matrices_from(phi_identity(op), phi_adjoint_identity(op), size(op));
}

inline double delta(const ErrorPair& ep)
{
    return ep.E.squaredNorm() / static_cast<double>(ep.E.rows())
        + ep.F.squaredNorm() / static_cast<double>(ep.F.rows());
}

// epsilon from the extreme eigenvalues of the (symmetrized) marginals
inline double epsilon_from(const Mat& row, const Mat& col, double s)
{
    auto side = [s](const Mat& P) {
        const double d = static_cast<double>(P.rows());
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()), Eigen::EigenvaluesOnly);
        const Vec& ev = es.eigenvalues();
        return std::max(1.0 - d * ev.minCoeff() / s, d * ev.maxCoeff() / s - 1.0);
    };
    return std::max({0.0, side(row), side(col)});
}

// diagonal marginals (matrix and frame fast paths)
inline double epsilon_from_diagonals(const Vec& row, const Vec& col, double s)
{
    const double m = static_cast<double>(row.size());
    const double n = static_cast<double>(col.size());
    return std::max({0.0, 1.0 - m * row.minCoeff() / s, m * row.maxCoeff() / s - 1.0,
                     1.0 - n * col.minCoeff() / s, n * col.maxCoeff() / s - 1.0});
}

inline BalanceReport balance_report_from(const Mat& row, const Mat& col, double s)
{
    BalanceReport br;
    br.s = s;
    auto ep = error_matrices_from(row, col, s);
    br.delta_E = ep.E.squaredNorm() / static_cast<double>(row.rows());
    br.delta_F = ep.F.squaredNorm() / static_cast<double>(col.rows());
    br.delta_total = br.delta_E + br.delta_F;
    br.epsilon = epsilon_from(row, col, s);
    return br;
}

inline BalanceReport balance_report(const Operator& op)
{
    return balance_report_from(phi_identity(op), phi_adjoint_identity(op), size(op));
}

// Row-major vec: vec(Y)[i*n + j] = Y(i, j), so vec(E_ij) = e_i (x) e_j.
inline Vec vec(const Mat& Y)
{
    Vec v(Y.size());
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
        for (Eigen::Index j = 0; j < Y.cols(); ++j)
            v[i * Y.cols() + j] = Y(i, j);
    return v;
}

inline Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols)
{
    if (v.size() != rows * cols)
        throw std::invalid_argument("unvec: length mismatch");
    Mat Y(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            Y(i, j) = v[i * cols + j];
    return Y;
}

inline Mat matrix_representation(const Operator& op, double budget = kDenseBudget)
{
    const double m = op.m(), n = op.n();
    if (m * m * n * n > budget)
        throw std::length_error("matrix_representation: dense size budget exceeded");
    Mat M = Mat::Zero(op.m() * op.m(), op.n() * op.n());
    for (const auto& a : op.matrices())
        M += Eigen::kroneckerProduct(a, a).eval();
    return M;
}

// Q = sum_ij Phi(E_ij) (x) E_ij = sum_l vec(A_l) vec(A_l)^T
inline Mat choi_matrix(const Operator& op, double budget = kDenseBudget)
{
    const double mn = static_cast<double>(op.m()) * op.n();
    if (mn * mn > budget)
        throw std::length_error("choi_matrix: dense size budget exceeded");
    Mat Q = Mat::Zero(op.m() * op.n(), op.m() * op.n());
    for (const auto& a : op.matrices()) {
        Vec v = vec(a);
        Q.noalias() += v * v.transpose();
    }
    return Q;
}

// partial traces of an (m n) x (m n) matrix laid out as X (x) Y
inline Mat partial_trace_second(const Mat& Q, int m, int n)
{
    Mat out = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int i = 0; i < n; ++i)
                out(a, b) += Q(a * n + i, b * n + i);
    return out;
}

inline Mat partial_trace_first(const Mat& Q, int m, int n)
{
    Mat out = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < m; ++a)
                out(i, j) += Q(a * n + i, a * n + j);
    return out;
}

inline std::vector<Mat> gradient_direction(const Operator& op, const ErrorPair& ep)
{
    std::vector<Mat> H;
    H.reserve(op.k());
    for (const auto& a : op.matrices())
        H.push_back(ep.E * a + a * ep.F);
    return H;
}

inline std::vector<Mat> gradient_direction(const Operator& op)
{
    return gradient_direction(op, error_matrices(op));
}

struct RateDecomposition {
    double quad_E = 0;
    double quad_F = 0;
    double cross = 0;
    double total() const { return quad_E + quad_F + cross; }
};

inline RateDecomposition delta_rate_decomposition(const Operator& op)
{
    const Mat row = phi_identity(op);
    const Mat col = phi_adjoint_identity(op);
    auto ep = error_matrices_from(row, col, size(op));
    RateDecomposition r;
    r.quad_E = (ep.E * ep.E).cwiseProduct(row).sum();
    r.quad_F = (ep.F * ep.F).cwiseProduct(col).sum();
    r.cross = 2.0 * ep.E.cwiseProduct(apply_phi(op, ep.F)).sum();
    return r;
}

inline double inner(const Mat& X, const Mat& Y) { return X.cwiseProduct(Y).sum(); }

// M^p for symmetric positive semidefinite M, eigenvalues clamped below at floor
inline Mat psd_power(const Mat& M, double p, double floor = 0.0)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
    Vec ev = es.eigenvalues().cwiseMax(floor);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        ev[i] = std::pow(ev[i], p);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace opscale
