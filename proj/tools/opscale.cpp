#include "opscale/experiments.hpp"
#include "opscale/io.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <string>

using namespace opscale;
namespace fs = std::filesystem;
using io::json;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string format = "json";
};

// flat key/value CSV: header line, then one row
std::string flat_csv(const json& j)
{
    std::string head, row;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_structured())
            continue;
        const bool first = head.empty();
        head += (first ? "" : ",") + it.key();
        std::string cell;
        if (it.value().is_number_float())
            cell = io::fmt17(it.value().get<double>());
        else if (it.value().is_null())
            cell = "nan";
        else if (it.value().is_string())
            cell = it.value().get<std::string>();
        else
            cell = it.value().dump();
        row += (first ? "" : ",") + cell;
    }
    return head + "\n" + row + "\n";
}

void emit(const Globals& g, const json& j, const std::string& file)
{
    const std::string text = g.format == "csv" ? flat_csv(j) : io::dump(j);
    std::cout << text;
    if (!g.out_dir.empty())
        io::write_atomic(fs::path(g.out_dir) / (file + (g.format == "csv" ? ".csv" : ".json")), text);
}

SpectralReport certify_instance(const io::Instance& inst, double C, std::uint64_t seed)
{
    return std::visit(
        [&](const auto& x) -> SpectralReport {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Operator>)
                return certify_operator(x, C, seed);
            else if constexpr (std::is_same_v<T, Frame>)
                return certify_frame(x, C);
            else if constexpr (std::is_same_v<T, Mat>)
                return certify_matrix(x, C);
            else
                return certify_operator(bl_datum_to_operator(x), C, seed);
        },
        inst);
}

int exit_for(Status s)
{
    switch (s) {
    case Status::converged:
        return 0;
    case Status::budget:
        return 3;
    default:
        return 4;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"operator scaling: spectral certificates, solvers, capacity and experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for output files");
    app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    double C = 1.0;
    std::string input;

    auto* certify = app.add_subcommand("certify", "spectral report; exit 0 if the gap condition holds, 2 otherwise");
    certify->add_option("input", input, "instance file (operator/frame/matrix JSON or matrix CSV)")->required();
    certify->add_option("--C", C, "gap-condition constant")->capture_default_str();

    SolverConfig cfg;
    std::string algorithm = "gd";
    auto* scale = app.add_subcommand("scale", "run a scaling solver; exit 0 converged, 3 budget, 4 diverged or singular");
    scale->add_option("input", input)->required();
    scale->add_option("--alpha", cfg.alpha, "step size in normalized units (0 selects 1/(m+n)^2)");
    scale->add_option("--max-iters", cfg.max_iters)->capture_default_str();
    scale->add_option("--eta", cfg.eta)->capture_default_str();
    scale->add_option("--algorithm", algorithm)->check(CLI::IsMember({"gd", "alternating"}))->capture_default_str();
    scale->add_option("--record-every", cfg.record_every)->capture_default_str();

    bool no_exact = false;
    auto* capacity = app.add_subcommand("capacity", "capacity bounds, plus the solver-based value for matrices and operators");
    capacity->add_option("input", input)->required();
    capacity->add_option("--C", C)->capture_default_str();
    capacity->add_flag("--no-exact", no_exact, "skip the solver-based capacity");

    bool brute = false;
    auto* perm = app.add_subcommand("permanent-bound", "certified permanent lower bound for a square nonnegative matrix");
    perm->add_option("input", input)->required();
    perm->add_option("--C", C)->capture_default_str();
    perm->add_flag("--brute", brute, "also compute the permanent (n <= 12)");

    std::string kind;
    int gn = 8, gm = -1, gd = 4, gk = 2;
    double density = 0.5;
    bool scaled = false;
    auto* generate = app.add_subcommand("generate", "write a seeded random instance");
    generate->add_option("kind", kind, "gaussian-squared | frame | operator | bipartite")
        ->required()
        ->check(CLI::IsMember({"gaussian-squared", "frame", "operator", "bipartite"}));
    generate->add_option("--n", gn)->capture_default_str();
    generate->add_option("--m", gm, "rows (defaults to n)");
    generate->add_option("--d", gd)->capture_default_str();
    generate->add_option("--k", gk)->capture_default_str();
    generate->add_option("--density", density)->capture_default_str();
    generate->add_flag("--scaled", scaled, "frame vectors with squared norm d/n");

    std::string name;
    exp::Options eo;
    auto* experiment = app.add_subcommand("experiment", "run a named experiment; exit 5 if a criterion fails");
    experiment->add_option("name", name)->required();
    experiment->add_option("--n", eo.n);
    experiment->add_option("--d", eo.d);
    experiment->add_option("--instances", eo.instances);
    experiment->add_option("--samples", eo.samples);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*certify) {
            const auto inst = io::load_instance(input);
            const auto rep = certify_instance(inst, C, g.seed);
            emit(g, io::to_json(rep), "certify");
            return rep.gap_condition_holds ? 0 : 2;
        }
        if (*scale) {
            cfg.algorithm = algorithm == "gd" ? Algorithm::gradient_descent : Algorithm::alternating;
            cfg.seed = g.seed;
            cfg.validate();
            const auto inst = io::load_instance(input);
            ScalingResult res;
            json scaled_json;
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, Mat>) {
                        res = run_matrix_fast_path(x, cfg);
                        scaled_json = io::matrix_instance_json(*res.final_matrix);
                    } else if constexpr (std::is_same_v<T, Frame>) {
                        res = run_frame_fast_path(x, cfg);
                        scaled_json = res.final_matrix ? io::to_json(Frame(*res.final_matrix))
                                                       : io::to_json(*res.final_operator);
                    } else {
                        Operator op = [&] {
                            if constexpr (std::is_same_v<T, Operator>)
                                return x;
                            else
                                return bl_datum_to_operator(x);
                        }();
                        res = run_solver(op, cfg);
                        scaled_json = io::to_json(*res.final_operator);
                    }
                },
                inst);
            const fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
            io::write_atomic(dir / "trace.csv", io::trace_csv(res.trace));
            io::write_atomic(dir / "scaled.json", io::dump(scaled_json));
            const json out = io::to_json(res, "trace.csv");
            const std::string text = g.format == "csv" ? flat_csv(out) : io::dump(out);
            io::write_atomic(dir / (g.format == "csv" ? "result.csv" : "result.json"), text);
            std::cout << text;
            return exit_for(res.status);
        }
        if (*capacity) {
            const auto inst = io::load_instance(input);
            const auto rep = certify_instance(inst, C, g.seed);
            CapacityReport cr = std::visit(
                [&](const auto& x) -> CapacityReport {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, Mat>) {
                        auto c = capacity_bounds(x, rep);
                        if (!no_exact)
                            c.exact = matrix_capacity_exact(x);
                        return c;
                    } else if constexpr (std::is_same_v<T, Frame>) {
                        const auto br = frame_balance_report(x);
                        return capacity_bounds_from(br.s, br.delta_total, rep);
                    } else {
                        Operator op = [&] {
                            if constexpr (std::is_same_v<T, Operator>)
                                return x;
                            else
                                return bl_datum_to_operator(x);
                        }();
                        auto c = capacity_bounds(op, rep);
                        if (!no_exact)
                            c.exact = operator_capacity_exact(op);
                        return c;
                    }
                },
                inst);
            json j = io::to_json(cr);
            j["lambda"] = io::number(rep.lambda);
            j["epsilon"] = io::number(rep.epsilon);
            j["gap_condition_holds"] = rep.gap_condition_holds;
            if (const auto* dt = std::get_if<BLDatum>(&inst)) {
                const auto bl = bl_constant_bounds(*dt, rep);
                j["bl_valid"] = bl.valid;
                j["bl_log_lower"] = io::number(bl.log_lower);
                j["bl_log_upper"] = io::number(bl.log_upper);
            }
            emit(g, j, "capacity");
            return 0;
        }
        if (*perm) {
            const auto inst = io::load_instance(input);
            const Mat* B0 = std::get_if<Mat>(&inst);
            if (!B0)
                throw std::invalid_argument("permanent-bound expects a matrix instance");
            const double n = static_cast<double>(B0->rows());
            const double c = n / B0->sum();
            const Mat B = c * *B0;
            const auto rep = certify_matrix(B, C);
            const auto pb = permanent_lower_bound(B, rep);
            // per(c B) = c^n per(B)
            const double shift = -n * std::log(c);
            json j = {{"type", "permanent_bound"},
                      {"valid", pb.valid},
                      {"reason", pb.reason},
                      {"normalization", io::number(c)},
                      {"cap_lower", io::number(pb.cap_lower / c)},
                      {"log_bound", io::number(pb.log_value + shift)},
                      {"bound", io::number(std::exp(pb.log_value + shift))},
                      {"lambda", io::number(rep.lambda)},
                      {"epsilon", io::number(rep.epsilon)}};
            if (brute) {
                const double per = permanent_bruteforce(*B0);
                j["permanent"] = io::number(per);
                j["violation"] = pb.valid && per < std::exp(pb.log_value + shift) * (1 - 1e-12);
            }
            emit(g, j, "permanent_bound");
            return 0;
        }
        if (*generate) {
            const int m = gm > 0 ? gm : gn;
            json j;
            std::string csv;
            if (kind == "gaussian-squared") {
                const Mat B = random_gaussian_squared_matrix(gn, g.seed);
                j = io::matrix_instance_json(B);
                csv = io::matrix_csv(B);
            } else if (kind == "bipartite") {
                const Mat B = random_bipartite_matrix(m, gn, density, 0.0, 1.0, g.seed);
                j = io::matrix_instance_json(B);
                csv = io::matrix_csv(B);
            } else if (kind == "frame") {
                Frame f = random_unit_frame(gn, gd, g.seed);
                if (scaled)
                    f = Frame(f.U * std::sqrt(static_cast<double>(gd) / gn));
                j = io::to_json(f);
            } else {
                j = io::to_json(random_operator(gk, m, gn, g.seed));
            }
            const bool as_csv = g.format == "csv" && !csv.empty();
            const std::string text = as_csv ? csv : io::dump(j);
            std::cout << text;
            if (!g.out_dir.empty())
                io::write_atomic(fs::path(g.out_dir) / (as_csv ? "instance.csv" : "instance.json"), text);
            return 0;
        }
        if (*experiment) {
            const auto& reg = exp::registry();
            const auto it = reg.find(name);
            if (it == reg.end()) {
                std::cerr << "unknown experiment '" << name << "'; known:";
                for (const auto& [k, v] : reg)
                    std::cerr << ' ' << k;
                std::cerr << '\n';
                return 1;
            }
            eo.seed = g.seed;
            const auto rep = it->second(eo);
            const fs::path dir = (g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir)) / name;
            exp::write_report(rep, dir);
            if (g.format == "csv") {
                std::cout << "id,name,passed,detail\n";
                for (const auto& c : rep.criteria)
                    std::cout << c.id << ',' << c.name << ',' << (c.passed ? "true" : "false") << ",\"" << c.detail << "\"\n";
            } else {
                std::cout << io::dump(rep.summary());
            }
            return rep.passed() ? 0 : 5;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
