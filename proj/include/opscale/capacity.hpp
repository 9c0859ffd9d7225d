#pragma once

#include "operator.hpp"
#include "reductions.hpp"
#include "solvers.hpp"
#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

namespace opscale {

struct CapacityReport {
    double lower = 0;
    double upper = 0;
    std::optional<double> exact;
    std::string method;
    bool generic = false;

    static double safe_log(double x)
    {
        return x > 0 ? std::log(x) : -std::numeric_limits<double>::infinity();
    }
    double log_lower() const { return safe_log(lower); }
    double log_upper() const { return safe_log(upper); }
    std::optional<double> log_exact() const
    {
        if (!exact)
            return std::nullopt;
        return safe_log(*exact);
    }
};

// shared by operator and matrix instances
inline CapacityReport capacity_bounds_from(double s, double delta_total, const SpectralReport& rep)
{
    CapacityReport cr;
    cr.upper = s;
    if (rep.lambda > 0 && rep.gap_condition_holds) {
        const double eps = rep.epsilon, lam = rep.lambda;
        const double a = (1.0 - 4.0 * eps * eps / lam) * s;
        const double b = s - 2.0 * delta_total / (lam * s);
        cr.lower = std::max({a, b, 0.0});
        cr.method = a >= b ? "spectral_gap_epsilon" : "spectral_gap_delta";
    } else {
        const double mn = static_cast<double>(rep.m) * rep.n;
        cr.lower = std::max(0.0, (1.0 - mn * rep.epsilon) * s);
        cr.method = "generic";
        cr.generic = true;
    }
    return cr;
}

inline CapacityReport capacity_bounds(const Operator& op, const SpectralReport& rep)
{
    const auto br = balance_report(op);
    return capacity_bounds_from(br.s, br.delta_total, rep);
}

inline CapacityReport capacity_bounds(const Mat& B, const SpectralReport& rep)
{
    const auto br = matrix_balance_report(B);
    return capacity_bounds_from(br.s, br.delta_total, rep);
}

inline SolverConfig default_capacity_config()
{
    SolverConfig cfg;
    cfg.eta = 1e-10;
    cfg.max_iters = 5000000;
    cfg.record_every = 1000000;
    return cfg;
}

// cap(D1 B D2) = det(D1)^{1/m} det(D2)^{1/n} cap(B) and cap = s at balance
inline std::optional<double> matrix_capacity_exact(const Mat& B, const SolverConfig& cfg = default_capacity_config())
{
    check_nonnegative(B);
    const double m = static_cast<double>(B.rows()), n = static_cast<double>(B.cols());
    const double c = n / B.sum();
    SolverConfig run = cfg;
    run.algorithm = Algorithm::gradient_descent;
    const auto res = run_matrix_fast_path(c * B, run);
    if (!res.converged)
        return std::nullopt;
    const double logdetL = 2.0 * res.L.diagonal().array().log().sum();
    const double logdetR = 2.0 * res.R.diagonal().array().log().sum();
    const double cap = res.s_final * std::exp(-logdetL / m - logdetR / n);
    return cap / c;
}

inline std::optional<double> operator_capacity_exact(const Operator& op, const SolverConfig& cfg = default_capacity_config())
{
    SolverConfig run = cfg;
    run.algorithm = Algorithm::gradient_descent;
    const auto res = run_gradient_descent(op, run);
    if (!res.converged)
        return std::nullopt;
    auto logabsdet = [](const Mat& M) {
        return Eigen::PartialPivLU<Mat>(M).matrixLU().diagonal().array().abs().log().sum();
    };
    const double m = op.m(), n = op.n();
    return res.s_final * std::exp(-2.0 * logabsdet(res.L) / m - 2.0 * logabsdet(res.R) / n);
}

struct DirectCapacity {
    double cap = 0;
    double log_cap = 0;
    long sweeps = 0;
    double max_gradient = 0;
    bool unbounded = false;
};

// coordinate descent on f(y) = (1/m) sum_i log (B e^y)_i - (1/n) sum_j y_j
inline DirectCapacity matrix_capacity_direct(const Mat& B, long max_sweeps = 500, double tol = 1e-10)
{
    check_nonnegative(B);
    const int m = static_cast<int>(B.rows()), n = static_cast<int>(B.cols());
    for (int i = 0; i < m; ++i)
        if (!(B.row(i).maxCoeff() > 0))
            throw std::invalid_argument("matrix_capacity_direct: every row needs a nonzero entry");
    const double ymax = std::log(1e12);
    Vec y = Vec::Zero(n);
    Vec x = Vec::Ones(n);
    Vec bx = B * x;
    DirectCapacity out;

    auto grad = [&](int j, double yj) {
        const double xj = std::exp(yj);
        double g = 0;
        for (int i = 0; i < m; ++i) {
            const double b = B(i, j);
            if (b == 0)
                continue;
            const double rest = std::max(bx[i] - b * x[j], 0.0);
            g += b * xj / (rest + b * xj);
        }
        return g / m - 1.0 / n;
    };

    for (long sw = 0; sw < max_sweeps; ++sw) {
        double gmax = 0;
        for (int j = 0; j < n; ++j)
            gmax = std::max(gmax, std::abs(grad(j, y[j])));
        out.max_gradient = gmax;
        out.sweeps = sw;
        if (gmax <= tol)
            break;
        for (int j = 0; j < n; ++j) {
            double lo = -ymax, hi = ymax;
            double target;
            if (grad(j, lo) >= 0) {
                target = lo;
                out.unbounded = true;
            } else if (grad(j, hi) <= 0) {
                target = hi;
                out.unbounded = true;
            } else {
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double g = grad(j, mid);
                    if (std::abs(g) <= 0.01 * tol) {
                        lo = hi = mid;
                        break;
                    }
                    (g > 0 ? hi : lo) = mid;
                    if (hi - lo < 1e-15)
                        break;
                }
                target = 0.5 * (lo + hi);
            }
            const double xn = std::exp(target);
            for (int i = 0; i < m; ++i)
                bx[i] += B(i, j) * (xn - x[j]);
            x[j] = xn;
            y[j] = target;
        }
        bx = B * x;
    }
    double f = 0;
    for (int i = 0; i < m; ++i)
        f += std::log(bx[i]);
    f = f / m - y.sum() / n;
    out.log_cap = std::log(static_cast<double>(m)) + f;
    out.cap = std::exp(out.log_cap);
    return out;
}

inline constexpr int kPermanentMax = 12;

inline double permanent_naive(const Mat& B)
{
    const int n = static_cast<int>(B.rows());
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    double total = 0;
    do {
        double prod = 1;
        for (int i = 0; i < n; ++i)
            prod *= B(i, p[i]);
        total += prod;
    } while (std::next_permutation(p.begin(), p.end()));
    return total;
}

// Ryser's formula with Gray-code subset order
inline double permanent_ryser(const Mat& B)
{
    const int n = static_cast<int>(B.rows());
    Vec rows = Vec::Zero(n);
    double total = 0;
    std::uint32_t mask = 0;
    for (std::uint32_t g = 1; g < (1u << n); ++g) {
        const int j = __builtin_ctz(g);
        if (mask >> j & 1u)
            rows -= B.col(j);
        else
            rows += B.col(j);
        mask ^= 1u << j;
        const double prod = rows.prod();
        total += (__builtin_popcount(mask) & 1) ? -prod : prod;
    }
    return (n & 1) ? -total : total;
}

inline double permanent_bruteforce(const Mat& B)
{
    if (B.rows() != B.cols())
        throw std::invalid_argument("permanent: square matrix required");
    if (B.rows() > kPermanentMax)
        throw std::length_error("permanent: n > 12 rejected");
    if (B.rows() == 0)
        return 1.0;
    return permanent_ryser(B);
}

struct PermanentBound {
    bool valid = false;
    std::string reason;
    double value = 0;
    double log_value = -std::numeric_limits<double>::infinity();
    double cap_lower = 0;
};

// per(B) >= (cap/n)^n e^{-n} >= (cap_lower/n)^n e^{-n}
inline PermanentBound permanent_lower_bound(const Mat& B, const SpectralReport& rep)
{
    PermanentBound pb;
    if (B.rows() != B.cols()) {
        pb.reason = "square matrix required";
        return pb;
    }
    const double n = static_cast<double>(B.rows());
    if (std::abs(B.sum() - n) > 1e-9 * n) {
        pb.reason = "size must be normalized to n";
        return pb;
    }
    if (!(rep.lambda > 0) || !rep.gap_condition_holds) {
        pb.reason = "spectral gap not certified";
        return pb;
    }
    const auto cr = capacity_bounds(B, rep);
    pb.valid = true;
    pb.cap_lower = cr.lower;
    if (cr.lower > 0) {
        pb.log_value = n * std::log(cr.lower / n) - n;
        pb.value = std::exp(pb.log_value);
    } else {
        pb.reason = "bound is vacuous";
    }
    return pb;
}

struct BLBounds {
    bool valid = false;
    std::string reason;
    double log_lower = 0;
    double log_upper = 0;
    double size_ratio = 0; // s / n
};

inline BLBounds bl_constant_bounds(const BLDatum& datum, const SpectralReport& rep)
{
    BLBounds b;
    if (!(rep.lambda > 0) || !rep.gap_condition_holds) {
        b.reason = "spectral gap not certified";
        return b;
    }
    const double n = datum.n;
    b.size_ratio = rep.s / n;
    const double base = 1.0 - 4.0 * rep.epsilon * rep.epsilon / rep.lambda;
    b.valid = true;
    b.log_lower = -0.5 * n * std::log(b.size_ratio);
    b.log_upper = base > 0 ? -0.5 * n * (std::log(b.size_ratio) + std::log(base))
                           : std::numeric_limits<double>::infinity();
    if (!(base > 0))
        b.reason = "upper bound is vacuous";
    return b;
}

} // namespace opscale
