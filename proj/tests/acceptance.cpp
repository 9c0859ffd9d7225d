#include "opscale/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sys/wait.h>

using namespace opscale;
namespace fs = std::filesystem;

namespace {

struct Capture {
    int code = -1;
    std::string out;
};

Capture shell(const std::string& cmd)
{
    Capture c;
    FILE* p = popen((cmd + " 2>&1").c_str(), "r");
    if (!p)
        return c;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0)
        c.out.append(buf, got);
    const int st = pclose(p);
    c.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    if (!fs::exists(dir))
        return files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
    return files;
}

// every command runs twice into separate directories; stdout, exit code and files must match
exp::Criterion determinism(const std::string& cli, const fs::path& work)
{
    const fs::path inputs = work / "inputs";
    fs::create_directories(inputs);
    const std::string in = (inputs / "instance.json").string();
    const std::string frame = (inputs / "frame.json").string();
    shell(cli + " --seed 11 --out-dir " + inputs.string() + " generate gaussian-squared --n 10");
    shell(cli + " --seed 12 generate frame --n 60 --d 3 > " + frame);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"generate_matrix", "--seed 7 generate gaussian-squared --n 6"},
        {"generate_frame", "--seed 7 generate frame --n 20 --d 3"},
        {"generate_operator", "--seed 7 generate operator --k 2 --m 3 --n 4"},
        {"generate_csv", "--seed 7 --format csv generate bipartite --m 4 --n 5"},
        {"certify_matrix", "certify " + in},
        {"certify_frame", "certify " + frame},
        {"scale_matrix", "scale " + in + " --eta 1e-6"},
        {"scale_frame", "scale " + frame + " --eta 1e-6 --record-every 10"},
        {"scale_alternating", "--format csv scale " + in + " --algorithm alternating"},
        {"capacity", "capacity " + in},
        {"permanent_bound", "permanent-bound " + in + " --brute"},
        {"experiment_gradient", "--seed 3 experiment gradient_identity --instances 10"},
        {"experiment_moments", "--seed 3 experiment moments --samples 2000"},
        {"experiment_cheeger", "--seed 3 experiment cheeger --instances 5"},
    };
    int same = 0;
    std::string differing;
    for (const auto& [name, args] : commands) {
        std::array<Capture, 2> c;
        std::array<std::map<std::string, std::string>, 2> files;
        for (int r = 0; r < 2; ++r) {
            const fs::path out = work / ("run" + std::to_string(r)) / name;
            fs::remove_all(out);
            fs::create_directories(out);
            c[r] = shell(cli + " --out-dir " + out.string() + " " + args);
            files[r] = snapshot(out);
        }
        const bool ok = c[0].code == c[1].code && c[0].out == c[1].out && files[0] == files[1]
            && !c[0].out.empty();
        same += ok;
        if (!ok)
            differing += name + " ";
    }
    std::string detail = exp::describe({{"identical", same}, {"commands", double(commands.size())}});
    if (!differing.empty())
        detail += " differing: " + differing;
    return {13, "determinism", same == static_cast<int>(commands.size()), detail};
}

} // namespace

int main(int argc, char** argv)
{
    if (argc < 3) {
        std::cerr << "usage: acceptance <path-to-opscale-cli> <work-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = argv[2];
    fs::create_directories(work);

    std::vector<exp::Criterion> all;
    exp::Options o;
    auto collect = [&](const exp::Report& rep) {
        exp::write_report(rep, work / "experiments" / rep.name);
        for (const auto& c : rep.criteria)
            all.push_back(c);
    };
    const auto t0 = std::chrono::steady_clock::now();
    auto conv = exp::convergence(o);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& c : conv.criteria)
        if (c.id == 1) {
            c.passed = c.passed && secs < 60;
            c.detail += " seconds=" + std::to_string(static_cast<int>(std::ceil(secs))) + " limit=60";
        }
    collect(conv);
    collect(exp::capacity(o));
    collect(exp::permanent(o));
    collect(exp::gradient_identity(o));
    collect(exp::reductions(o));
    collect(exp::cheeger(o));
    collect(exp::moments(o));
    collect(exp::random_gap(o));
    collect(exp::frames(o));
    all.push_back(determinism(cli, work / "determinism"));

    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    int failed = 0;
    for (const auto& c : all) {
        std::printf("criterion %2d %s  %s: %s\n", c.id, c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
        failed += !c.passed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
