#include "hcv/io/json.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

std::string bin()
{
    const char* b = std::getenv("HCV_BIN");
    return b ? b : "hcv";
}

Outcome run_hcv(const std::string& args)
{
    Outcome r;
    const std::string cmd = bin() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir = fs::temp_directory_path() / ("hcv_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const char* name) const { return (dir / name).string(); }
    fs::path dir;
};

} // namespace

TEST_F(Cli, Solve)
{
    const Outcome r = run_hcv("solve --m0 2 --lambda0 2 --p z");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("1/48*z^3"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("residual = 0"), std::string::npos) << r.out;
}

TEST_F(Cli, UsageErrors)
{
    EXPECT_EQ(run_hcv("").code, 2);
    EXPECT_EQ(run_hcv("solve --m0 2").code, 2);
    EXPECT_EQ(run_hcv("stage --rho 1").code, 2);
    EXPECT_EQ(run_hcv("stage --rho 1.5 --mode faithful").code, 2);
    EXPECT_EQ(run_hcv("weyl --theta \"sqrt(\"").code, 2);
}

TEST_F(Cli, DichotomyBudgetExit)
{
    const Outcome sq = run_hcv("dichotomy --seq \"n^2\" --rho 1.5 --p 1 --out " + path("sq.json"));
    EXPECT_EQ(sq.code, 3);
    EXPECT_NE(sq.out.find("n^2: infeasible"), std::string::npos) << sq.out;
    EXPECT_EQ(hcv::io::json::parse(slurp(path("sq.json"))).at("verdict").get<std::string>(), "infeasible");
    const Outcome lin = run_hcv("dichotomy --seq n --rho 1.5 --p 1 --out " + path("n.json"));
    EXPECT_EQ(lin.code, 0);
    EXPECT_EQ(hcv::io::json::parse(slurp(path("n.json"))).at("verdict").get<std::string>(), "feasible");
}

TEST_F(Cli, FaithfulAtTwoReportsBudget)
{
    const Outcome r = run_hcv("stage --mode faithful --rho 2 --p 1 --out " + path("b.json"));
    EXPECT_EQ(r.code, 3);
    const auto j = hcv::io::json::parse(slurp(path("b.json")));
    EXPECT_GT(hcv::io::parse_double(j.at("log10_N0_estimate")), 10.0);
}

TEST_F(Cli, WeylPasses)
{
    const Outcome r = run_hcv("weyl --theta \"sqrt(5)-2\" --N 100000 --out " + path("w.json"));
    EXPECT_EQ(r.code, 0);
    const auto j = hcv::io::json::parse(slurp(path("w.json")));
    EXPECT_TRUE(j.at("pass").get<bool>());
}

TEST_F(Cli, StageVerifySweepRoundTrip)
{
    const std::string common = "stage --rho 1.01 --p 1+z --f-out " + path("f.json") + " --out ";
    ASSERT_EQ(run_hcv(common + path("c.json")).code, 0);
    ASSERT_EQ(run_hcv(common + path("c2.json")).code, 0);
    EXPECT_EQ(slurp(path("c.json")), slurp(path("c2.json")));

    const Outcome v = run_hcv("verify --grid 500 --random 200 --cert " + path("c.json") + " --f " + path("f.json") +
                                " --out " + path("v.json"));
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("PASS"), std::string::npos) << v.out;
    EXPECT_TRUE(hcv::io::json::parse(slurp(path("v.json"))).at("pass").get<bool>());

    const Outcome s = run_hcv("sweep --grid 50 --cert " + path("c.json") + " --f " + path("f.json"));
    EXPECT_EQ(s.code, 0);
    std::istringstream lines(s.out);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "lambda,cell,order,certified_bound,grid_error,margin");
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++rows;
        std::istringstream cols(line);
        std::string c[6];
        for (auto& x : c) std::getline(cols, x, ',');
        EXPECT_LE(std::stod(c[4]), std::stod(c[3]) * (1 + 1e-9) + 1e-13) << line;
    }
    EXPECT_EQ(rows, 50);
}

TEST_F(Cli, VerifyFailsOnTamperedCertificate)
{
    ASSERT_EQ(run_hcv("stage --rho 1.01 --p z --f-out " + path("f.json") + " --out " + path("c.json")).code, 0);
    auto j = hcv::io::json::parse(slurp(path("c.json")));
    j["cells"][1]["bound"] = "1e-12";
    std::ofstream(path("bad.json")) << j.dump();
    const Outcome v = run_hcv("verify --grid 50 --cert " + path("bad.json") + " --f " + path("f.json"));
    EXPECT_EQ(v.code, 1);
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput)
{
    ASSERT_EQ(run_hcv("--threads 1 stage --rho 1.01 --p z --out " + path("a.json")).code, 0);
    ASSERT_EQ(run_hcv("--threads 4 stage --rho 1.01 --p z --out " + path("b.json")).code, 0);
    EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, RotateSmall)
{
    const Outcome r = run_hcv("rotate --theta \"sqrt(2)-1\" --rho 1.01 --p 1 --tower 256 --out " + path("r.json"));
    EXPECT_EQ(r.code, 0);
    const auto j = hcv::io::json::parse(slurp(path("r.json")));
    EXPECT_LT(hcv::io::parse_double(j.at("recomputed_error")), hcv::io::parse_double(j.at("eps1")));
}
