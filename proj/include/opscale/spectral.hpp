#pragma once

#include "operator.hpp"
#include "reductions.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace opscale {

struct SpectralReport {
    double sigma1 = 0;
    double sigma2 = 0;
    double s = 0;
    double delta = 0;
    double lambda = 0;
    double epsilon = 0;
    bool gap_condition_holds = false;
    double C = 1;
    int m = 0;
    int n = 0;
};

struct SingularPair {
    double sigma1 = 0;
    double sigma2 = 0;
    long iterations = 0;
    double residual = 0;
};

using LinearMap = std::function<Vec(const Vec&)>;

struct PowerOptions {
    long max_iters = 10000;
    double tol = 1e-12;
    std::uint64_t seed = 0;
};

inline SingularPair top_two_singular_values(const Mat& A)
{
    SingularPair sp;
    if (A.size() == 0)
        return sp;
    Eigen::BDCSVD<Mat> svd(A);
    const Vec& sv = svd.singularValues();
    sp.sigma1 = sv.size() > 0 ? sv[0] : 0.0;
    sp.sigma2 = sv.size() > 1 ? sv[1] : 0.0;
    return sp;
}

// Block power iteration on the Gram map x -> adjoint(forward(x)); the leading
// pair is deflated by keeping the block orthonormal (Rayleigh-Ritz each step).
inline SingularPair top_two_singular_values(const LinearMap& forward, const LinearMap& adjoint,
                                            Eigen::Index M, Eigen::Index N,
                                            const PowerOptions& opt = {})
{
    if (M < 1 || N < 1)
        throw std::invalid_argument("top_two_singular_values: empty map");
    const Eigen::Index b = std::min<Eigen::Index>(N, 4);
    std::mt19937_64 gen(opt.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat V(N, b);
    for (Eigen::Index i = 0; i < V.size(); ++i)
        V.data()[i] = nd(gen);
    Eigen::HouseholderQR<Mat> qr(V);
    V = qr.householderQ() * Mat::Identity(N, b);

    SingularPair sp;
    double prev1 = -1, prev2 = -1;
    Mat W(N, b);
    for (long it = 1; it <= opt.max_iters; ++it) {
        for (Eigen::Index c = 0; c < b; ++c)
            W.col(c) = adjoint(forward(V.col(c)));
        Mat H = V.transpose() * W;
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
        Vec theta = es.eigenvalues().reverse();
        Mat Y = es.eigenvectors().rowwise().reverse();
        const double t1 = std::max(theta[0], 0.0);
        const double t2 = b > 1 ? std::max(theta[1], 0.0) : 0.0;
        Mat Z = W * Y;
        // residual of the second Ritz pair
        const Vec x2 = V * Y.col(b > 1 ? 1 : 0);
        sp.residual = (Z.col(b > 1 ? 1 : 0) - (b > 1 ? t2 : t1) * x2).norm();
        sp.sigma1 = std::sqrt(t1);
        sp.sigma2 = std::sqrt(t2);
        sp.iterations = it;
        const double scale = std::max(t1, 1e-300);
        if (std::abs(t1 - prev1) <= opt.tol * scale && std::abs(t2 - prev2) <= opt.tol * scale
            && it > 2)
            return sp;
        prev1 = t1;
        prev2 = t2;
        if (Z.norm() == 0)
            return sp;
        Eigen::HouseholderQR<Mat> q(Z);
        V = q.householderQ() * Mat::Identity(N, b);
    }
    std::ostringstream os;
    os << "top_two_singular_values: no convergence after " << opt.max_iters
       << " iterations, residual " << sp.residual;
    throw std::runtime_error(os.str());
}

inline double log_factor(int m, int n) { return std::log(static_cast<double>(std::max(std::min(m, n), 2))); }

inline SpectralReport make_report(double sigma1, double sigma2, double s, double epsilon, int m,
                                  int n, double C)
{
    if (!(C > 0))
        throw std::invalid_argument("C must be positive");
    SpectralReport r;
    r.sigma1 = sigma1;
    r.sigma2 = sigma2;
    r.s = s;
    r.epsilon = epsilon;
    r.m = m;
    r.n = n;
    r.C = C;
    const double scale = std::sqrt(static_cast<double>(m) * n) / s;
    r.delta = sigma1 * scale - 1.0;
    r.lambda = 1.0 - sigma2 * scale;
    r.gap_condition_holds = r.lambda > 0 && r.lambda * r.lambda >= C * epsilon * log_factor(m, n);
    return r;
}

inline constexpr double kDenseSvdBudget = 4e6;

inline SingularPair operator_singular_values(const Operator& op, std::uint64_t seed = 0)
{
    const double m = op.m(), n = op.n();
    if (m * m * n * n <= kDenseSvdBudget)
        return top_two_singular_values(matrix_representation(op));
    const int mm = op.m(), nn = op.n();
    LinearMap fwd = [&op, nn](const Vec& v) { return vec(apply_phi(op, unvec(v, nn, nn))); };
    LinearMap adj = [&op, mm](const Vec& w) { return vec(apply_phi_adjoint(op, unvec(w, mm, mm))); };
    PowerOptions opt;
    opt.seed = seed;
    return top_two_singular_values(fwd, adj, mm * mm, nn * nn, opt);
}

inline SpectralReport certify_operator(const Operator& op, double C = 1.0, std::uint64_t seed = 0)
{
    const auto br = balance_report(op);
    const auto sp = operator_singular_values(op, seed);
    return make_report(sp.sigma1, sp.sigma2, br.s, br.epsilon, op.m(), op.n(), C);
}

// the reduction's representation has B as its only nonzero block
inline SpectralReport certify_matrix(const Mat& B, double C = 1.0)
{
    check_nonnegative(B);
    const auto br = matrix_balance_report(B);
    const auto sp = top_two_singular_values(B);
    return make_report(sp.sigma1, sp.sigma2, br.s, br.epsilon, static_cast<int>(B.rows()),
                       static_cast<int>(B.cols()), C);
}

inline Mat squared_gram(const Frame& f)
{
    const Mat G = f.U.transpose() * f.U;
    return G.cwiseProduct(G);
}

// two largest eigenvalues of the squared Gram matrix; when d(d+1)/2 < n the
// same nonzero spectrum is read off the small matrix sum_i w_i w_i^T, where w_i
// is u_i u_i^T packed with sqrt(2) on off-diagonals.
inline std::pair<double, double> squared_gram_top_two(const Frame& f)
{
    const int d = f.d(), n = f.n();
    const int p = d * (d + 1) / 2;
    Vec ev;
    if (p < n) {
        Mat W(p, n);
        const double r2 = std::sqrt(2.0);
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int a = 0; a < d; ++a)
                for (int b = a; b < d; ++b)
                    W(r++, i) = f.U(a, i) * f.U(b, i) * (a == b ? 1.0 : r2);
        }
        Mat K = W * W.transpose();
        ev = Eigen::SelfAdjointEigenSolver<Mat>(K, Eigen::EigenvaluesOnly).eigenvalues();
    } else {
        ev = Eigen::SelfAdjointEigenSolver<Mat>(squared_gram(f), Eigen::EigenvaluesOnly).eigenvalues();
    }
    const auto L = ev.size();
    const double l1 = std::max(ev[L - 1], 0.0);
    const double l2 = L > 1 ? std::max(ev[L - 2], 0.0) : 0.0;
    return {l1, l2};
}

inline SpectralReport certify_frame(const Frame& f, double C = 1.0)
{
    const auto br = frame_balance_report(f);
    const auto [l1, l2] = squared_gram_top_two(f);
    return make_report(std::sqrt(l1), std::sqrt(l2), br.s, br.epsilon, f.d(), f.n(), C);
}

struct ConductanceResult {
    double phi = 0;
    std::uint32_t set = 0; // bit v set for vertex v; rows first, then columns
};

inline constexpr int kConductanceMaxVertices = 24;

// brute force over vertex subsets of the bipartite graph of B (Gray-code order)
inline ConductanceResult conductance(const Mat& B)
{
    check_nonnegative(B);
    const int m = static_cast<int>(B.rows()), n = static_cast<int>(B.cols());
    const int V = m + n;
    if (V > kConductanceMaxVertices)
        throw std::length_error("conductance: brute force limited to m + n <= 24");
    Mat W = Mat::Zero(V, V);
    W.topRightCorner(m, n) = B;
    W.bottomLeftCorner(n, m) = B.transpose();
    const Vec deg = W.rowwise().sum();
    const double half = deg.sum() / 2.0;
    const double slack = 1e-12 * deg.sum();

    std::vector<double> toS(V, 0.0);
    std::vector<char> in(V, 0);
    double cut = 0, vol = 0;
    ConductanceResult best;
    best.phi = std::numeric_limits<double>::infinity();
    const std::uint64_t total = std::uint64_t{1} << V;
    std::uint32_t mask = 0;
    for (std::uint64_t g = 1; g < total; ++g) {
        const int v = __builtin_ctzll(g);
        if (!in[v]) {
            cut += deg[v] - 2.0 * toS[v];
            vol += deg[v];
            for (int u = 0; u < V; ++u)
                toS[u] += W(u, v);
        } else {
            cut += 2.0 * toS[v] - deg[v];
            vol -= deg[v];
            for (int u = 0; u < V; ++u)
                toS[u] -= W(u, v);
        }
        in[v] = !in[v];
        mask ^= (1u << v);
        if (vol > slack && vol <= half + slack) {
            const double phi = std::max(cut, 0.0) / vol;
            if (phi < best.phi) {
                best.phi = phi;
                best.set = mask;
            }
        }
    }
    // recompute the winner exactly
    if (best.set) {
        double c = 0, vl = 0;
        for (int a = 0; a < V; ++a) {
            if (!(best.set >> a & 1u))
                continue;
            vl += deg[a];
            for (int b = 0; b < V; ++b)
                if (!(best.set >> b & 1u))
                    c += W(a, b);
        }
        best.phi = c / vl;
    }
    return best;
}

struct CheegerCheck {
    double phi = 0;
    double sigma2 = 0;
    double bound = 0;
    double epsilon = 0;
    bool bound_ok = false;
};

inline CheegerCheck cheeger_consistency(const Mat& B)
{
    const auto br = matrix_balance_report(B);
    if (br.epsilon > 0.5)
        throw std::invalid_argument("cheeger_consistency: requires epsilon <= 1/2");
    CheegerCheck cc;
    cc.epsilon = br.epsilon;
    cc.phi = conductance(B).phi;
    cc.sigma2 = top_two_singular_values(B).sigma2;
    const double m = static_cast<double>(B.rows()), n = static_cast<double>(B.cols());
    cc.bound = (1.0 - 0.5 * cc.phi * cc.phi + 3.0 * br.epsilon) * br.s / std::sqrt(m * n);
    cc.bound_ok = cc.sigma2 <= cc.bound + 1e-12 * br.s;
    return cc;
}

} // namespace opscale
