#pragma once

#include "operator.hpp"
#include "reductions.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace opscale {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// sub-seed for trial `index` of a run seeded with `seed`
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Vec random_unit_vector(int d, Rng& gen)
{
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
    Vec v(d);
    double nrm = 0;
    do {
        for (int a = 0; a < d; ++a)
            v[a] = nd(gen);
        nrm = v.norm();
    } while (!(nrm > 0));
    return v / nrm;
}

inline Frame random_unit_frame(int n, int d, std::uint64_t seed)
{
    if (n < 1 || d < 1)
        throw std::invalid_argument("random_unit_frame: n, d >= 1");
    Rng gen(seed);
    Mat U(d, n);
    for (int i = 0; i < n; ++i)
        U.col(i) = random_unit_vector(d, gen);
    return Frame(std::move(U));
}

// B_ij = g^2 with g ~ N(0, 1/n)
inline Mat random_gaussian_squared_matrix(int n, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("random_gaussian_squared_matrix: n >= 1");
    Rng gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
    Mat B(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double g = nd(gen);
            B(i, j) = g * g;
        }
    return B;
}

inline Operator random_operator(int k, int m, int n, std::uint64_t seed)
{
    Rng gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<Mat> mats;
    for (int l = 0; l < k; ++l) {
        Mat a(m, n);
        for (Eigen::Index i = 0; i < a.size(); ++i)
            a.data()[i] = nd(gen);
        mats.push_back(std::move(a));
    }
    return Operator(std::move(mats));
}

// weighted bipartite graph: each edge kept with probability `density`,
// weight uniform in [lo, hi]; rows and columns are never left empty
inline Mat random_bipartite_matrix(int m, int n, double density, double lo, double hi,
                                   std::uint64_t seed)
{
    Rng gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mat B = Mat::Zero(m, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
            if (u(gen) < density)
                B(i, j) = lo + (hi - lo) * u(gen);
    for (int i = 0; i < m; ++i)
        if (B.row(i).sum() == 0)
            B(i, static_cast<int>(u(gen) * n) % n) = lo + (hi - lo) * u(gen);
    for (int j = 0; j < n; ++j)
        if (B.col(j).sum() == 0)
            B(static_cast<int>(u(gen) * m) % m, j) = lo + (hi - lo) * u(gen);
    return B;
}

inline double double_factorial_odd(int q) // (2q - 1)!!
{
    double r = 1;
    for (int i = 1; i <= q; ++i)
        r *= 2.0 * i - 1.0;
    return r;
}

// xi(q) = prod (2 q_i - 1)!! / prod_{j < |q|} (d + 2j), the sphere moment
// E prod <u, e_i>^{2 q_i}
inline double xi_moment(const std::vector<int>& q, int d)
{
    if (static_cast<int>(q.size()) > d)
        throw std::invalid_argument("xi_moment: more exponents than dimensions");
    std::vector<int> odds;
    int total = 0;
    for (int qi : q) {
        if (qi < 0)
            throw std::invalid_argument("xi_moment: negative exponent");
        for (int t = 1; t <= qi; ++t)
            odds.push_back(2 * t - 1);
        total += qi;
    }
    double r = 1;
    for (int j = 0; j < total; ++j)
        r *= static_cast<double>(odds[j]) / (d + 2.0 * j);
    return r;
}

inline double xi_single(int q, int d) { return xi_moment({q}, d); }

struct TreeEdge {
    int a = 0;
    int b = 0;
    int mult = 1;
};

inline bool is_tree(const std::vector<TreeEdge>& edges, int vertices)
{
    if (static_cast<int>(edges.size()) != vertices - 1)
        return false;
    std::vector<int> parent(vertices);
    for (int v = 0; v < vertices; ++v)
        parent[v] = v;
    auto find = [&](int v) {
        while (parent[v] != v)
            v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& e : edges) {
        if (e.a < 0 || e.b < 0 || e.a >= vertices || e.b >= vertices)
            return false;
        const int ra = find(e.a), rb = find(e.b);
        if (ra == rb)
            return false;
        parent[ra] = rb;
    }
    return true;
}

inline int tree_vertex_count(const std::vector<TreeEdge>& edges)
{
    int v = 0;
    for (const auto& e : edges)
        v = std::max({v, e.a + 1, e.b + 1});
    return v;
}

inline double expected_tree_walk(const std::vector<TreeEdge>& edges, int d)
{
    if (!is_tree(edges, tree_vertex_count(edges)))
        throw std::invalid_argument("expected_tree_walk: input is not a tree");
    double r = 1;
    for (const auto& e : edges) {
        if (e.mult < 1)
            throw std::invalid_argument("expected_tree_walk: multiplicities must be >= 1");
        r *= xi_single(e.mult, d);
    }
    return r;
}

// proper colorings of the l-cycle with d colors
inline double proper_colorings(int l, int d)
{
    return std::pow(d - 1.0, l) + ((l % 2) ? -1.0 : 1.0) * (d - 1.0);
}

inline double expected_cycle_walk(int k, int d)
{
    if (k < 3)
        throw std::invalid_argument("expected_cycle_walk: k >= 3");
    // 1/d^k from the mean part of each projector, plus the trace of the k-th power of
    // E[T (x) T] (T the traceless part) acting on traceless symmetric matrices
    const double dd = d;
    const double dim = (dd - 1.0) * (dd + 2.0) / 2.0;
    return std::pow(dd, -k) + dim * std::pow(2.0 / (dd * (dd + 2.0)), k);
}

// exact E tr(G^4), G_ij = <u_i, u_j>^2 over n random unit vectors
inline double expected_trace_g4(int n, int d)
{
    if (n < 4)
        throw std::invalid_argument("expected_trace_g4: n >= 4");
    const double N = n;
    const double p2 = N * (N - 1), p3 = p2 * (N - 2), p4 = p3 * (N - 3);
    const double x2 = xi_single(2, d), x4 = xi_single(4, d);
    return N + 6.0 * p2 * x2 + p2 * x4 + 4.0 * p3 * expected_cycle_walk(3, d) + 2.0 * p3 * x2 * x2
        + p4 * expected_cycle_walk(4, d);
}

inline double trace_g4_upper_bound(int n, int d)
{
    const double N = n, D = d;
    return std::pow(N / D, 4)
        * (1 + std::pow(D, 4) / std::pow(N, 3) + 18 * D * D / (N * N) + 105 / (N * N) + 4 * D / N
           + 34 / N + 8 / (D * D));
}

// Markov bound on P[lambda_2(G) > (1 - lambda)^2 n / d]
inline double second_eigenvalue_tail_bound(int n, int d, double lambda)
{
    if (!(lambda > 0 && lambda < 1))
        throw std::invalid_argument("second_eigenvalue_tail_bound: 0 < lambda < 1");
    const double r = static_cast<double>(n) / d;
    const double top = std::pow(r * (1.0 + (d - 1.0) / n), 4);
    const double v = (expected_trace_g4(n, d) - top) / (std::pow(1.0 - lambda, 8) * std::pow(r, 4));
    return std::clamp(v, 0.0, 1.0);
}

inline double bernstein_failure_probability(int n, int d, double eps)
{
    const double e = std::exp(-n * eps * eps / (2.0 * (d - 1.0) * (1.0 + eps / 3.0)));
    return std::min(1.0, 2.0 * d * e);
}

// epsilon of sum v_i v_i^T against (n/d) I for random unit frames
inline double parseval_epsilon(const Frame& f)
{
    const Mat P = f.U * f.U.transpose();
    const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(P, Eigen::EigenvaluesOnly).eigenvalues();
    const double r = static_cast<double>(f.n()) / f.d();
    return std::max(1.0 - ev.minCoeff() / r, ev.maxCoeff() / r - 1.0);
}

struct ParsevalSample {
    std::vector<double> eps;
    double empirical_failure(double threshold) const
    {
        double c = 0;
        for (double e : eps)
            c += e > threshold;
        return eps.empty() ? 0 : c / eps.size();
    }
};

inline ParsevalSample parseval_concentration_check(int n, int d, int trials, std::uint64_t seed)
{
    if (trials < 1)
        throw std::invalid_argument("parseval_concentration_check: trials >= 1");
    ParsevalSample ps;
    for (int t = 0; t < trials; ++t)
        ps.eps.push_back(parseval_epsilon(random_unit_frame(n, d, derive_seed(seed, t))));
    return ps;
}

struct Estimate {
    double mean = 0;
    double stderr_ = 0;
    long samples = 0;

    bool within(double value, double sigmas = 3.0) const
    {
        return std::abs(mean - value) <= sigmas * stderr_ + 1e-15;
    }
};

class RunningMean {
public:
    void add(double x)
    {
        ++n_;
        const double d = x - mean_;
        mean_ += d / n_;
        m2_ += d * (x - mean_);
    }
    Estimate estimate() const
    {
        Estimate e;
        e.mean = mean_;
        e.samples = n_;
        e.stderr_ = n_ > 1 ? std::sqrt(m2_ / (n_ - 1) / n_) : 0.0;
        return e;
    }

private:
    long n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

inline Estimate mc_xi(const std::vector<int>& q, int d, long samples, std::uint64_t seed)
{
    Rng gen(seed);
    RunningMean rm;
    for (long s = 0; s < samples; ++s) {
        const Vec u = random_unit_vector(d, gen);
        double p = 1;
        for (std::size_t i = 0; i < q.size(); ++i)
            p *= std::pow(u[static_cast<Eigen::Index>(i)], 2 * q[i]);
        rm.add(p);
    }
    return rm.estimate();
}

inline Estimate mc_tree_walk(const std::vector<TreeEdge>& edges, int d, long samples, std::uint64_t seed)
{
    const int V = tree_vertex_count(edges);
    Rng gen(seed);
    RunningMean rm;
    std::vector<Vec> u(V);
    for (long s = 0; s < samples; ++s) {
        for (int v = 0; v < V; ++v)
            u[v] = random_unit_vector(d, gen);
        double p = 1;
        for (const auto& e : edges)
            p *= std::pow(u[e.a].dot(u[e.b]), 2 * e.mult);
        rm.add(p);
    }
    return rm.estimate();
}

inline Estimate mc_cycle_walk(int k, int d, long samples, std::uint64_t seed)
{
    Rng gen(seed);
    RunningMean rm;
    std::vector<Vec> u(k);
    for (long s = 0; s < samples; ++s) {
        for (int v = 0; v < k; ++v)
            u[v] = random_unit_vector(d, gen);
        double p = 1;
        for (int v = 0; v < k; ++v) {
            const double c = u[v].dot(u[(v + 1) % k]);
            p *= c * c;
        }
        rm.add(p);
    }
    return rm.estimate();
}

inline Estimate mc_trace_g4(int n, int d, long frames, std::uint64_t seed)
{
    RunningMean rm;
    for (long f = 0; f < frames; ++f) {
        const Frame fr = random_unit_frame(n, d, derive_seed(seed, static_cast<std::uint64_t>(f)));
        Mat G = fr.U.transpose() * fr.U;
        G = G.cwiseProduct(G).eval();
        const Mat G2 = G * G;
        rm.add(G2.squaredNorm());
    }
    return rm.estimate();
}

} // namespace opscale
