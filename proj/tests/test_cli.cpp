#include "opscale/io.hpp"
#include "opscale/moments.hpp"
#include "opscale/spectral.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <sys/wait.h>

using namespace opscale;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(OPSCALE_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0)
        r.out.append(buf, got);
    const int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("opscale_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST(Cli, CertifyExitCodes)
{
    const auto d = scratch("certify");
    io::write_atomic(d / "ones.csv", "1,1,1\n1,1,1\n1,1,1\n");
    io::write_atomic(d / "id.csv", "1,0,0\n0,1,0\n0,0,1\n");
    const auto ones = run("certify " + (d / "ones.csv").string());
    EXPECT_EQ(ones.code, 0);
    EXPECT_NEAR(io::json::parse(ones.out).at("lambda").get<double>(), 1.0, 1e-12);
    const auto id = run("certify " + (d / "id.csv").string());
    EXPECT_EQ(id.code, 2);
    EXPECT_NEAR(io::json::parse(id.out).at("lambda").get<double>(), 0.0, 1e-12);
    io::write_atomic(d / "bad.csv", "1,2\nfoo\n");
    EXPECT_EQ(run("certify " + (d / "bad.csv").string()).code, 1);
    EXPECT_EQ(run("certify " + (d / "missing.csv").string()).code, 1);
}

TEST(Cli, CertifyFrameMatchesLibraryExactly)
{
    const auto d = scratch("frame");
    const Frame f = random_unit_frame(40, 3, 17);
    io::write_atomic(d / "frame.json", io::dump(io::to_json(f)));
    const auto r = run("certify " + (d / "frame.json").string());
    const auto got = io::spectral_report_from_json(io::json::parse(r.out));
    const auto want = certify_frame(io::frame_from_json(io::json::parse(io::read_file(d / "frame.json"))));
    EXPECT_EQ(got.sigma1, want.sigma1);
    EXPECT_EQ(got.sigma2, want.sigma2);
    EXPECT_EQ(got.lambda, want.lambda);
    EXPECT_EQ(got.epsilon, want.epsilon);
}

TEST(Cli, ScaleBalancedAndDeterministic)
{
    const auto d = scratch("scale");
    io::write_atomic(d / "ones.csv", "1,1\n1,1\n");
    const auto bal = run("--out-dir " + (d / "b").string() + " scale " + (d / "ones.csv").string());
    EXPECT_EQ(bal.code, 0);
    EXPECT_EQ(io::json::parse(bal.out).at("iterations").get<long>(), 0);

    EXPECT_EQ(run("--seed 5 --out-dir " + d.string() + " generate gaussian-squared --n 12").code, 0);
    const std::string in = (d / "instance.json").string();
    const auto a = run("--out-dir " + (d / "r1").string() + " scale " + in + " --eta 1e-6");
    const auto b = run("--out-dir " + (d / "r2").string() + " scale " + in + " --eta 1e-6");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(io::read_file(d / "r1" / "trace.csv"), io::read_file(d / "r2" / "trace.csv"));

    const auto budget = run("--out-dir " + (d / "r3").string() + " scale " + in + " --max-iters 3");
    EXPECT_EQ(budget.code, 3);
    const auto div = run("--out-dir " + (d / "r4").string() + " scale " + in + " --alpha 100");
    EXPECT_EQ(div.code, 4);
}

TEST(Cli, CapacityAndPermanent)
{
    const auto d = scratch("cap");
    io::write_atomic(d / "j.csv", "1,1,1\n1,1,1\n1,1,1\n");
    const auto cap = run("capacity " + (d / "j.csv").string());
    EXPECT_EQ(cap.code, 0);
    const auto j = io::json::parse(cap.out);
    EXPECT_NEAR(std::exp(j.at("log_exact").get<double>()), 9.0, 1e-8);
    const auto per = run("permanent-bound " + (d / "j.csv").string() + " --brute");
    EXPECT_EQ(per.code, 0);
    const auto p = io::json::parse(per.out);
    EXPECT_TRUE(p.at("valid").get<bool>());
    EXPECT_NEAR(p.at("permanent").get<double>(), 6.0, 1e-12);
    EXPECT_FALSE(p.at("violation").get<bool>());
}

TEST(Cli, GenerateFormats)
{
    const auto a = run("--seed 1 --format csv generate gaussian-squared --n 3");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(io::matrix_from_csv(a.out), random_gaussian_squared_matrix(3, 1));
    const auto f = run("--seed 2 generate frame --n 5 --d 2");
    EXPECT_EQ(io::frame_from_json(io::json::parse(f.out)).U, random_unit_frame(5, 2, 2).U);
}

TEST(Cli, ExperimentExitCodes)
{
    const auto d = scratch("exp");
    EXPECT_EQ(run("--out-dir " + d.string() + " experiment no_such_thing").code, 1);
    const auto ok = run("--out-dir " + d.string() + " experiment gradient_identity --instances 5");
    EXPECT_EQ(ok.code, 0);
    EXPECT_TRUE(fs::exists(d / "gradient_identity" / "summary.json"));
    EXPECT_TRUE(fs::exists(d / "gradient_identity" / "operators.csv"));
}
