#pragma once

#include "operator.hpp"
#include "result.hpp"

#include <numeric>

namespace opscale {

// n vectors in R^d, stored as the columns of a d x n matrix
struct Frame {
    Mat U;

    Frame() = default;
    explicit Frame(Mat u) : U(std::move(u))
    {
        if (U.rows() < 1 || U.cols() < 1)
            throw std::invalid_argument("frame must be non-empty");
        if (!U.allFinite())
            throw std::invalid_argument("frame has non-finite entries");
        if (!(U.squaredNorm() > 0))
            throw std::invalid_argument("frame has zero size");
    }

    int d() const { return static_cast<int>(U.rows()); }
    int n() const { return static_cast<int>(U.cols()); }
    double size() const { return U.squaredNorm(); }
};

inline Mat frame_row_marginal(const Frame& f) { return f.U * f.U.transpose(); }
inline Vec frame_col_marginal(const Frame& f) { return f.U.colwise().squaredNorm().transpose(); }

inline BalanceReport frame_balance_report(const Frame& f)
{
    const Mat col = frame_col_marginal(f).asDiagonal();
    return balance_report_from(frame_row_marginal(f), col, f.size());
}

struct BLMap {
    int nj = 0;
    Mat B; // nj x n
    int c = 1;
};

// exponents p_j = c_j / denominator
struct BLDatum {
    int n = 0;
    std::vector<BLMap> maps;
    int denominator = 1;

    void validate() const
    {
        if (n < 1 || maps.empty() || denominator < 1)
            throw std::invalid_argument("BL datum: empty or bad dimensions");
        long total = 0;
        for (const auto& mp : maps) {
            if (mp.c < 1)
                throw std::invalid_argument("BL datum: exponent numerators must be >= 1");
            if (mp.B.rows() != mp.nj || mp.B.cols() != n)
                throw std::invalid_argument("BL datum: map shape mismatch");
            total += static_cast<long>(mp.c) * mp.nj;
        }
        if (total != static_cast<long>(denominator) * n)
            throw std::invalid_argument("BL datum: sum of p_j n_j must equal n");
    }
};

inline BalanceReport matrix_balance_report(const Mat& B)
{
    const double s = B.sum();
    const Vec r = B.rowwise().sum();
    const Vec c = B.colwise().sum().transpose();
    BalanceReport br;
    br.s = s;
    const double m = static_cast<double>(B.rows()), n = static_cast<double>(B.cols());
    br.delta_E = (Vec::Constant(B.rows(), s) - m * r).squaredNorm() / m;
    br.delta_F = (Vec::Constant(B.cols(), s) - n * c).squaredNorm() / n;
    br.delta_total = br.delta_E + br.delta_F;
    br.epsilon = epsilon_from_diagonals(r, c, s);
    return br;
}

inline void check_nonnegative(const Mat& B)
{
    if (B.size() == 0 || !B.allFinite() || B.minCoeff() < 0)
        throw std::invalid_argument("matrix must be finite and entrywise nonnegative");
    if (!(B.sum() > 0))
        throw std::invalid_argument("matrix has zero size");
}

// one Kraus matrix per nonzero entry, holding sqrt(B_ij) at (i, j)
inline Operator matrix_to_operator(const Mat& B)
{
    check_nonnegative(B);
    std::vector<Mat> mats;
    for (Eigen::Index i = 0; i < B.rows(); ++i)
        for (Eigen::Index j = 0; j < B.cols(); ++j)
            if (B(i, j) > 0) {
                Mat a = Mat::Zero(B.rows(), B.cols());
                a(i, j) = std::sqrt(B(i, j));
                mats.push_back(std::move(a));
            }
    return Operator(std::move(mats));
}

// A_i = u_i e_i^T
inline Operator frame_to_operator(const Frame& f)
{
    std::vector<Mat> mats;
    mats.reserve(f.n());
    for (int i = 0; i < f.n(); ++i) {
        Mat a = Mat::Zero(f.d(), f.n());
        a.col(i) = f.U.col(i);
        mats.push_back(std::move(a));
    }
    return Operator(std::move(mats));
}

// Kraus K_ji = B_j^T P_ji / sqrt(d), P_ji selecting the (j, i) block of R^{d n}.
// Phi(Y) = (1/d) sum B_j^T Y_(ji) B_j maps (d n) x (d n) inputs to n x n outputs.
inline Operator bl_datum_to_operator(const BLDatum& datum)
{
    datum.validate();
    const int N = datum.denominator * datum.n;
    const double w = 1.0 / std::sqrt(static_cast<double>(datum.denominator));
    std::vector<Mat> mats;
    int offset = 0;
    for (const auto& mp : datum.maps)
        for (int i = 0; i < mp.c; ++i) {
            Mat a = Mat::Zero(datum.n, N);
            a.middleCols(offset, mp.nj) = w * mp.B.transpose();
            offset += mp.nj;
            mats.push_back(std::move(a));
        }
    return Operator(std::move(mats));
}

// frame u_1..u_m in R^d as the datum B_j = u_j^T, p_j = d/m
inline BLDatum rank_one_datum(const Frame& f)
{
    BLDatum dt;
    dt.n = f.d();
    dt.denominator = f.n();
    for (int j = 0; j < f.n(); ++j)
        dt.maps.push_back({1, f.U.col(j).transpose(), f.d()});
    return dt;
}

struct DiagonalScaling {
    Vec dL;
    Vec dR;
    double offdiag = 0;
    bool ok = true;
};

inline double offdiag_ratio(const Mat& M)
{
    const double tot = M.norm();
    if (tot == 0)
        return 0;
    return (M - Mat(M.diagonal().asDiagonal())).norm() / tot;
}

// D_L = (L^T L)^{1/2}, D_R = (R R^T)^{1/2}; D_L^2 B D_R^2 is the scaled matrix
inline DiagonalScaling extract_matrix_scaling(const ScalingResult& res, double tol = 1e-7)
{
    const Mat PL = psd_power(res.L.transpose() * res.L, 0.5);
    const Mat PR = psd_power(res.R * res.R.transpose(), 0.5);
    DiagonalScaling ds;
    ds.offdiag = std::max(offdiag_ratio(PL), offdiag_ratio(PR));
    ds.ok = ds.offdiag <= tol;
    ds.dL = PL.diagonal();
    ds.dR = PR.diagonal();
    return ds;
}

inline Mat apply_diagonal_scaling(const Mat& B, const DiagonalScaling& ds)
{
    return ds.dL.array().square().matrix().asDiagonal() * B
        * ds.dR.array().square().matrix().asDiagonal();
}

struct FrameScaling {
    Mat M;
    Vec weights;
    Frame scaled;
    double offdiag = 0;
    bool ok = true;
};

// v_i = M u_i R_ii
inline FrameScaling extract_frame_scaling(const ScalingResult& res, const Frame& f, double tol = 1e-7)
{
    FrameScaling fs;
    fs.M = res.L;
    fs.weights = res.R.diagonal();
    fs.offdiag = offdiag_ratio(res.R);
    fs.ok = fs.offdiag <= tol;
    fs.scaled = Frame(fs.M * f.U * fs.weights.asDiagonal());
    return fs;
}

} // namespace opscale
