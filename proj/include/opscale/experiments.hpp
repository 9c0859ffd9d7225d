#pragma once

#include "capacity.hpp"
#include "io.hpp"
#include "moments.hpp"
#include "operator.hpp"
#include "reductions.hpp"
#include "solvers.hpp"
#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace opscale::exp {

struct Criterion {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::string csv() const
    {
        std::ostringstream os;
        for (std::size_t i = 0; i < header.size(); ++i)
            os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                os << (i ? "," : "") << io::fmt17(r[i]);
            os << '\n';
        }
        return os.str();
    }
};

struct Report {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<Criterion> criteria;
    std::vector<Table> tables;

    bool passed() const
    {
        return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.passed; });
    }

    io::json summary() const
    {
        io::json cs = io::json::array();
        for (const auto& c : criteria)
            cs.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        io::json files = io::json::array();
        for (const auto& t : tables)
            files.push_back(t.name + ".csv");
        return {{"type", "experiment_summary"}, {"name", name}, {"seed", seed},
                {"passed", passed()}, {"criteria", cs}, {"files", files}};
    }

    Report only(int id) const
    {
        Report r = *this;
        r.criteria.clear();
        for (const auto& c : criteria)
            if (c.id == id)
                r.criteria.push_back(c);
        return r;
    }
};

// -1 selects the experiment's own default
struct Options {
    std::uint64_t seed = 0;
    int n = -1;
    int d = -1;
    int instances = -1;
    long samples = -1;
};

inline int pick(int v, int def) { return v > 0 ? v : def; }
inline long pick(long v, long def) { return v > 0 ? v : def; }

inline std::string describe(std::initializer_list<std::pair<const char*, double>> kv)
{
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : kv) {
        os << (first ? "" : " ") << k << "=" << v;
        first = false;
    }
    return os.str();
}

// least-squares decay rate of log(delta) against t on the first 90% of the run
inline double fitted_decay_rate(const ConvergenceTrace& tr)
{
    if (tr.size() < 2)
        return 0;
    const double tmax = 0.9 * tr.back().t;
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : tr) {
        if (r.t > tmax || !(r.delta > 0))
            continue;
        const double y = std::log(r.delta);
        n += 1;
        sx += r.t;
        sy += y;
        sxx += r.t * r.t;
        sxy += r.t * y;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den <= 0)
        return 0;
    return -(n * sxy - sx * sy) / den;
}

// criteria 1, 2 and 6 share these gradient-descent runs
inline Report convergence(const Options& o)
{
    const int n = pick(o.n, 100);
    const int count = pick(o.instances, 10);
    Report rep;
    rep.name = "convergence";
    rep.seed = o.seed;
    Table summary{"instances",
                  {"instance", "n", "s0", "epsilon", "lambda", "iterations", "converged", "rate",
                   "rate_threshold", "kappa_L", "kappa_R", "kappa_bound", "envelope_excess"},
                  {}};
    int rate_ok = 0, kappa_ok = 0, env_ok = 0;
    for (int t = 0; t < count; ++t) {
        const Mat B = random_gaussian_squared_matrix(n, derive_seed(o.seed, t));
        const auto cert = certify_matrix(B);
        SolverConfig cfg;
        cfg.eta = 1e-3;
        cfg.record_every = 100;
        cfg.max_iters = 5000000;
        const auto res = run_matrix_fast_path(B, cfg);
        const double s0 = cert.s;
        const double rate = fitted_decay_rate(res.trace);
        const double thr = 0.5 * cert.lambda * s0;
        const double kb = 50.0 * cert.epsilon * std::log(static_cast<double>(n)) / cert.lambda;
        double excess = -std::numeric_limits<double>::infinity();
        for (const auto& row : res.trace) {
            const double cap = (1.0 + cert.epsilon) * s0 - row.s;
            excess = std::max({excess, row.E_op - cap, row.F_op - cap});
        }
        const bool r_ok = res.converged && cert.lambda > 0 && rate >= thr;
        const bool k_ok = cert.lambda > 0 && res.kappa_L - 1 <= kb && res.kappa_R - 1 <= kb;
        const bool e_ok = excess <= 1e-6 * s0;
        rate_ok += r_ok;
        kappa_ok += k_ok;
        env_ok += e_ok;
        summary.rows.push_back({double(t), double(n), s0, cert.epsilon, cert.lambda,
                                double(res.iterations), double(res.converged), rate, thr, res.kappa_L,
                                res.kappa_R, kb, excess});
        Table tr{"trace_" + std::to_string(t),
                 {"iter", "t", "s", "delta", "E_op", "F_op", "kappa_L", "kappa_R"},
                 {}};
        for (const auto& row : res.trace)
            tr.rows.push_back({double(row.iter), row.t, row.s, row.delta, row.E_op, row.F_op,
                               row.kappa_L, row.kappa_R});
        rep.tables.push_back(std::move(tr));
    }
    rep.tables.insert(rep.tables.begin(), std::move(summary));
    const int need = count - count / 10;
    rep.criteria.push_back({1, "linear convergence", rate_ok >= need,
                            describe({{"passing", rate_ok}, {"required", need}, {"instances", count}})});
    rep.criteria.push_back({2, "condition numbers", kappa_ok == count,
                            describe({{"passing", kappa_ok}, {"instances", count}})});
    rep.criteria.push_back({6, "E/F envelope", env_ok == count,
                            describe({{"passing", env_ok}, {"instances", count}})});
    return rep;
}

// entries exp(a g) with g standard normal; kept only when the gap condition holds
inline std::optional<Mat> certified_positive_matrix(int n, std::uint64_t seed, int tries = 1000)
{
    for (int k = 0; k < tries; ++k) {
        Rng gen(derive_seed(seed, k));
        std::uniform_real_distribution<double> ua(0.05, 0.6);
        std::normal_distribution<double> nd(0.0, 1.0);
        const double a = ua(gen);
        Mat B(n, n);
        for (Eigen::Index i = 0; i < B.size(); ++i)
            B.data()[i] = std::exp(a * nd(gen));
        if (certify_matrix(B).gap_condition_holds)
            return B;
    }
    return std::nullopt;
}

inline Report capacity(const Options& o)
{
    const int count = pick(o.instances, 25);
    Report rep;
    rep.name = "capacity";
    rep.seed = o.seed;
    Table tb{"capacity",
             {"instance", "n", "s", "epsilon", "lambda", "lower", "exact", "direct", "upper",
              "relative_gap", "sandwich_ok", "oracle_ok"},
             {}};
    int ok = 0, produced = 0;
    for (int t = 0; t < count; ++t) {
        const int n = 4 + t % 5;
        auto B = certified_positive_matrix(n, derive_seed(o.seed, t));
        if (!B)
            continue;
        ++produced;
        const auto cert = certify_matrix(*B);
        const auto bounds = capacity_bounds(*B, cert);
        const auto exact = matrix_capacity_exact(*B);
        const auto direct = matrix_capacity_direct(*B);
        const double ex = exact.value_or(std::numeric_limits<double>::quiet_NaN());
        const double rel = std::abs(ex - direct.cap) / direct.cap;
        const bool sand = exact && ex >= bounds.lower - 1e-6 && ex <= bounds.upper + 1e-6;
        const bool orc = exact && rel <= 1e-4;
        ok += sand && orc;
        tb.rows.push_back({double(t), double(n), cert.s, cert.epsilon, cert.lambda, bounds.lower, ex,
                           direct.cap, bounds.upper, rel, double(sand), double(orc)});
    }
    rep.tables.push_back(std::move(tb));
    rep.criteria.push_back({3, "capacity sandwich", ok == count && produced == count,
                            describe({{"passing", ok}, {"instances", count}, {"generated", produced}})});
    return rep;
}

inline Report permanent(const Options& o)
{
    const int n = pick(o.n, 8);
    const int want = pick(o.instances, 20);
    const long max_draws = pick(o.samples, 20000L);
    Report rep;
    rep.name = "permanent";
    rep.seed = o.seed;
    Table tb{"certified", {"draw", "epsilon", "lambda", "permanent", "bound", "violation"}, {}};
    Table all{"draws", {"draw", "epsilon", "lambda", "gap_condition"}, {}};
    int found = 0, violations = 0;
    long draws = 0;
    double min_eps = std::numeric_limits<double>::infinity();
    for (; draws < max_draws && found < want; ++draws) {
        Mat B = random_gaussian_squared_matrix(n, derive_seed(o.seed, draws));
        B *= n / B.sum();
        const auto cert = certify_matrix(B);
        min_eps = std::min(min_eps, cert.epsilon);
        if (draws < 1000)
            all.rows.push_back({double(draws), cert.epsilon, cert.lambda, double(cert.gap_condition_holds)});
        if (!cert.gap_condition_holds)
            continue;
        ++found;
        const double per = permanent_bruteforce(B);
        const auto pb = permanent_lower_bound(B, cert);
        const bool bad = pb.valid && per < pb.value * (1 - 1e-12);
        violations += bad;
        tb.rows.push_back({double(draws), cert.epsilon, cert.lambda, per, pb.value, double(bad)});
    }
    rep.tables.push_back(std::move(tb));
    rep.tables.push_back(std::move(all));
    rep.criteria.push_back({4, "permanent bound", found >= want && violations == 0,
                            describe({{"certified", found}, {"required", want}, {"draws", double(draws)},
                                      {"violations", violations}, {"min_epsilon", min_eps}})});
    return rep;
}

inline double frame_angle(const Mat& U)
{
    Mat V = U;
    V.colwise().normalize();
    Mat G = V.transpose() * V;
    G = G.cwiseProduct(G).eval();
    G.diagonal().setZero();
    return G.maxCoeff();
}

// criteria 11 and 12 share these frame runs
inline Report frames(const Options& o)
{
    const int d = pick(o.d, 16);
    const int n = pick(o.n, 512);
    const int count = pick(o.instances, 20);
    Report rep;
    rep.name = "paulsen";
    rep.seed = o.seed;
    Table tb{"frames",
             {"seed", "d", "n", "s0", "epsilon", "lambda", "iterations", "movement_sq", "distance_sq",
              "movement_bound", "theta_U", "theta_V", "theta_bound"},
             {}};
    int move_ok = 0, angle_ok = 0;
    for (int t = 0; t < count; ++t) {
        const Frame unit = random_unit_frame(n, d, derive_seed(o.seed, t));
        const Frame f(unit.U * std::sqrt(static_cast<double>(d) / n));
        const auto cert = certify_frame(f);
        SolverConfig cfg;
        cfg.alpha = 1.0 / (d + n);
        cfg.eta = 1e-6;
        cfg.record_every = 1000;
        const auto res = run_frame_fast_path(f, cfg);
        const double dist = (*res.final_matrix - f.U).squaredNorm();
        const double bound = 2.0 * cert.s * cert.epsilon * cert.epsilon / cert.lambda;
        const double tu = frame_angle(f.U), tv = frame_angle(*res.final_matrix);
        const double q = cert.epsilon * std::log(static_cast<double>(d)) / cert.lambda;
        const double tb_ = 2.0 * tu + 10.0 * q * q;
        move_ok += res.converged && cert.lambda > 0 && res.movement_sq <= bound;
        angle_ok += res.converged && cert.lambda > 0 && tv <= tb_;
        tb.rows.push_back({double(t), double(d), double(n), cert.s, cert.epsilon, cert.lambda,
                           double(res.iterations), res.movement_sq, dist, bound, tu, tv, tb_});
    }
    rep.tables.push_back(std::move(tb));
    const int need = count - count / 10;
    rep.criteria.push_back({11, "Paulsen movement", move_ok >= need,
                            describe({{"passing", move_ok}, {"required", need}, {"seeds", count}})});
    rep.criteria.push_back({12, "frame angle", angle_ok >= need,
                            describe({{"passing", angle_ok}, {"required", need}, {"seeds", count}})});
    return rep;
}

inline Report random_gap(const Options& o)
{
    const int d = pick(o.d, 8);
    const int n = pick(o.n, 1024);
    const int count = pick(o.instances, 100);
    const double lam_t = 0.3, eps_t = 0.15;
    Report rep;
    rep.name = "random_gap";
    rep.seed = o.seed;
    Table tb{"frames", {"seed", "epsilon", "lambda", "lambda2_G", "certified"}, {}};
    int ok = 0, tail_events = 0;
    for (int t = 0; t < count; ++t) {
        const Frame f = random_unit_frame(n, d, derive_seed(o.seed, t));
        const auto cert = certify_frame(f);
        const double l2 = cert.sigma2 * cert.sigma2;
        const bool good = cert.lambda >= lam_t && cert.epsilon <= eps_t;
        ok += good;
        tail_events += l2 > std::pow(1 - lam_t, 2) * n / d;
        tb.rows.push_back({double(t), cert.epsilon, cert.lambda, l2, double(good)});
    }
    rep.tables.push_back(std::move(tb));
    const double bound = second_eigenvalue_tail_bound(n, d, lam_t);
    const double freq = static_cast<double>(tail_events) / count;
    const double se = std::sqrt(std::max(bound * (1 - bound), 1.0 / count) / count);
    const bool tail_ok = freq <= bound + 3 * se;
    const int need = (95 * count + 99) / 100;
    rep.criteria.push_back({10, "random-frame gap", ok >= need && tail_ok,
                            describe({{"passing", ok}, {"required", need}, {"tail_frequency", freq},
                                      {"tail_bound", bound}})});
    return rep;
}

struct MomentCheck {
    std::string label;
    double exact = 0;
    Estimate est;
};

inline Report moments(const Options& o)
{
    const long N = pick(o.samples, 1000000L);
    const long frames_n = std::max(1L, N / 10);
    Report rep;
    rep.name = "moments";
    rep.seed = o.seed;
    std::vector<MomentCheck> checks;
    std::uint64_t k = 0;
    auto next = [&]() { return derive_seed(o.seed, k++); };

    checks.push_back({"xi_(1)_d5", xi_moment({1}, 5), mc_xi({1}, 5, N, next())});
    checks.push_back({"xi_(2)_d3", xi_moment({2}, 3), mc_xi({2}, 3, N, next())});
    checks.push_back({"xi_(1,1)_d4", xi_moment({1, 1}, 4), mc_xi({1, 1}, 4, N, next())});
    checks.push_back({"xi_(2,1)_d3", xi_moment({2, 1}, 3), mc_xi({2, 1}, 3, N, next())});
    const std::vector<TreeEdge> path{{0, 1, 1}, {1, 2, 1}};
    const std::vector<TreeEdge> edge2{{0, 1, 2}};
    const std::vector<TreeEdge> star{{0, 1, 1}, {0, 2, 2}, {0, 3, 1}};
    checks.push_back({"tree_path11_d3", expected_tree_walk(path, 3), mc_tree_walk(path, 3, N, next())});
    checks.push_back({"tree_edge2_d4", expected_tree_walk(edge2, 4), mc_tree_walk(edge2, 4, N, next())});
    checks.push_back({"tree_star121_d5", expected_tree_walk(star, 5), mc_tree_walk(star, 5, N, next())});
    checks.push_back({"cycle3_d2", expected_cycle_walk(3, 2), mc_cycle_walk(3, 2, N, next())});
    checks.push_back({"cycle4_d3", expected_cycle_walk(4, 3), mc_cycle_walk(4, 3, N, next())});
    checks.push_back({"cycle5_d4", expected_cycle_walk(5, 4), mc_cycle_walk(5, 4, N, next())});
    checks.push_back({"trace_g4_n6_d3", expected_trace_g4(6, 3), mc_trace_g4(6, 3, frames_n, next())});

    Table tb{"monte_carlo", {"check", "exact", "estimate", "stderr", "z"}, {}};
    int mc_ok = 0;
    std::ostringstream failed;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        const bool ok = c.est.within(c.exact);
        mc_ok += ok;
        if (!ok)
            failed << c.label << ' ';
        tb.rows.push_back({double(i), c.exact, c.est.mean, c.est.stderr_,
                           (c.est.mean - c.exact) / std::max(c.est.stderr_, 1e-300)});
    }
    Table grid{"fourth_moment_grid", {"n", "d", "exact", "bound"}, {}};
    int grid_ok = 0, grid_total = 0;
    for (int n = 4; n < 24; ++n)
        for (int d = 2; d < 22; ++d) {
            const double ex = expected_trace_g4(n, d), b = trace_g4_upper_bound(n, d);
            grid_ok += ex <= b;
            ++grid_total;
            grid.rows.push_back({double(n), double(d), ex, b});
        }
    rep.tables.push_back(std::move(tb));
    rep.tables.push_back(std::move(grid));
    std::string detail = describe({{"mc_passing", mc_ok}, {"mc_checks", double(checks.size())},
                                   {"grid_passing", grid_ok}, {"grid_points", grid_total}});
    if (!failed.str().empty())
        detail += " failed: " + failed.str();
    rep.criteria.push_back({9, "moment formulas",
                            mc_ok == static_cast<int>(checks.size()) && grid_ok == grid_total, detail});
    return rep;
}

inline double relative_gap(double a, double b)
{
    const double den = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / den;
}

inline Report gradient_identity(const Options& o)
{
    const int count = pick(o.instances, 100);
    Report rep;
    rep.name = "gradient_identity";
    rep.seed = o.seed;
    Table tb{"operators", {"instance", "k", "m", "n", "fd_rel_error", "rate_rel_error"}, {}};
    int ok_fd = 0, ok_rate = 0;
    for (int t = 0; t < count; ++t) {
        Rng gen(derive_seed(o.seed, t));
        std::uniform_int_distribution<int> dk(1, 5), dm(1, 8);
        const int k = dk(gen), m = dm(gen), n = dm(gen);
        const Operator op = random_operator(k, m, n, gen());
        const Operator H0 = random_operator(k, m, n, gen());
        double hn = 0;
        for (const auto& h : H0.matrices())
            hn += h.squaredNorm();
        const Operator H = H0.scaled(1.0 / std::sqrt(hn));
        const auto ep = error_matrices(op);
        const auto G = gradient_direction(op, ep);
        double analytic = 0;
        for (int i = 0; i < k; ++i)
            analytic += -4.0 * inner(G[i], H[i]);
        const double h = 1e-6;
        auto shifted = [&](double c) {
            std::vector<Mat> v;
            for (int i = 0; i < k; ++i)
                v.push_back(op[i] + c * H[i]);
            return delta(error_matrices(Operator(std::move(v))));
        };
        const double fd = (shifted(h) - shifted(-h)) / (2 * h);
        const double fd_err = relative_gap(fd, analytic);
        const auto rd = delta_rate_decomposition(op);
        double gsq = 0;
        for (const auto& g : G)
            gsq += g.squaredNorm();
        const double rate_err = relative_gap(rd.total(), gsq);
        ok_fd += fd_err <= 1e-5;
        ok_rate += rate_err <= 1e-8;
        tb.rows.push_back({double(t), double(k), double(m), double(n), fd_err, rate_err});
    }
    rep.tables.push_back(std::move(tb));
    rep.criteria.push_back({5, "gradient-flow identity", ok_fd == count && ok_rate == count,
                            describe({{"fd_passing", ok_fd}, {"rate_passing", ok_rate}, {"instances", count}})});
    return rep;
}

inline Report reductions(const Options& o)
{
    const int count = pick(o.instances, 50);
    Report rep;
    rep.name = "reductions";
    rep.seed = o.seed;
    Table tb{"agreement", {"instance", "kind", "rows", "cols", "sigma2_direct", "sigma2_embedded", "rel_error"}, {}};
    int ok = 0;
    for (int t = 0; t < count; ++t) {
        Rng gen(derive_seed(o.seed, 2 * t));
        std::uniform_int_distribution<int> dm(2, 6);
        const int m = dm(gen), n = dm(gen);
        const Mat B = random_bipartite_matrix(m, n, 0.8, 0.0, 1.0, gen());
        const double a = certify_matrix(B).sigma2;
        const double b = certify_operator(matrix_to_operator(B)).sigma2;
        const double e = relative_gap(a, b);
        ok += e <= 1e-8;
        tb.rows.push_back({double(t), 0, double(m), double(n), a, b, e});
    }
    for (int t = 0; t < count; ++t) {
        Rng gen(derive_seed(o.seed, 2 * t + 1));
        std::uniform_int_distribution<int> dd(2, 5), dn(3, 12);
        const int d = dd(gen), n = dn(gen);
        const Frame f(random_operator(1, d, n, gen())[0]);
        const double a = certify_frame(f).sigma2;
        const double b = certify_operator(frame_to_operator(f)).sigma2;
        const double e = relative_gap(a, b);
        ok += e <= 1e-8;
        tb.rows.push_back({double(t), 1, double(d), double(n), a, b, e});
    }
    rep.tables.push_back(std::move(tb));
    rep.criteria.push_back({7, "reduction consistency", ok == 2 * count,
                            describe({{"passing", ok}, {"instances", 2 * count}})});
    return rep;
}

// sparse random bipartite weights, Sinkhorn-balanced until epsilon <= 1/2
inline std::optional<Mat> nearly_balanced_bipartite(int m, int n, std::uint64_t seed)
{
    Rng gen(seed);
    std::uniform_real_distribution<double> dens(0.3, 0.9);
    Mat B = random_bipartite_matrix(m, n, dens(gen), 0.1, 2.0, gen());
    for (int it = 0; it < 200 && matrix_balance_report(B).epsilon > 0.5; ++it) {
        B = (B.rowwise().sum().cwiseInverse().asDiagonal() * B).eval();
        B = (B * B.colwise().sum().cwiseInverse().asDiagonal()).eval();
    }
    if (matrix_balance_report(B).epsilon > 0.5)
        return std::nullopt;
    return B;
}

inline Report cheeger(const Options& o)
{
    const int count = pick(o.instances, 50);
    Report rep;
    rep.name = "cheeger";
    rep.seed = o.seed;
    Table tb{"instances", {"instance", "m", "n", "epsilon", "phi", "sigma2", "bound", "ok"}, {}};
    int ok = 0, produced = 0;
    for (int t = 0; t < count; ++t) {
        Rng gen(derive_seed(o.seed, t));
        std::uniform_int_distribution<int> dm(2, 8);
        const int m = dm(gen), n = dm(gen);
        std::optional<Mat> B;
        for (int tries = 0; tries < 20 && !B; ++tries)
            B = nearly_balanced_bipartite(m, n, gen());
        if (!B)
            continue;
        ++produced;
        const auto cc = cheeger_consistency(*B);
        ok += cc.bound_ok;
        tb.rows.push_back({double(t), double(m), double(n), cc.epsilon, cc.phi, cc.sigma2, cc.bound,
                           double(cc.bound_ok)});
    }
    rep.tables.push_back(std::move(tb));
    rep.criteria.push_back({8, "Cheeger cross-check", ok == count && produced == count,
                            describe({{"passing", ok}, {"generated", produced}, {"instances", count}})});
    return rep;
}

inline const std::map<std::string, std::function<Report(const Options&)>>& registry()
{
    static const std::map<std::string, std::function<Report(const Options&)>> r = {
        {"convergence", [](const Options& o) { auto rep = convergence(o); rep.criteria.erase(rep.criteria.begin() + 1); return rep; }},
        {"condition_number", [](const Options& o) { auto rep = convergence(o).only(2); rep.name = "condition_number"; return rep; }},
        {"capacity", capacity},
        {"permanent", permanent},
        {"paulsen", [](const Options& o) { return frames(o).only(11); }},
        {"frame_angle", [](const Options& o) { auto rep = frames(o).only(12); rep.name = "frame_angle"; return rep; }},
        {"random_gap", random_gap},
        {"moments", moments},
        {"gradient_identity", gradient_identity},
        {"reductions", reductions},
        {"cheeger", cheeger},
    };
    return r;
}

inline void write_report(const Report& rep, const std::filesystem::path& dir)
{
    for (const auto& t : rep.tables)
        io::write_atomic(dir / (t.name + ".csv"), t.csv());
    io::write_atomic(dir / "summary.json", io::dump(rep.summary()));
}

} // namespace opscale::exp
