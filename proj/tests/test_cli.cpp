#include "qubosc/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int status;
    std::string output;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(QUBOSC_CLI_PATH) + " " + args + " 2>&1";
    CliRun r{-1, {}};
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) r.output += buf;
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::vector<qubosc::HeatmapRow> rows_of(const fs::path& csv) {
    std::ifstream is(csv, std::ios::binary);
    return qubosc::read_heatmap_csv(is);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("qubosc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

}  // namespace

TEST_F(Cli, SweepWritesHeatmapAndScript) {
    const CliRun r = run_cli("sweep --ws-min 10 --ws-max 12 --ws-steps 3 --tmax 1 --steps 10 --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const auto rows = rows_of(dir / "sweep.csv");
    EXPECT_EQ(rows.size(), 33u);
    EXPECT_EQ(rows.front().method, "ode");
    EXPECT_TRUE(fs::exists(dir / "sweep.gp"));
    EXPECT_TRUE(fs::exists(dir / "sweep.meta.json"));
}

TEST_F(Cli, SliceDefaultsToSumFrequency) {
    const CliRun r = run_cli("slice --tmax 1 --steps 4 --method laplace,ode --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const auto rows = rows_of(dir / "slice.csv");
    ASSERT_EQ(rows.size(), 10u);
    for (const auto& row : rows) EXPECT_EQ(row.varpi_s, 11.0);
    EXPECT_EQ(rows[0].method, "laplace");
    EXPECT_EQ(rows[1].method, "ode");
}

TEST_F(Cli, CompareWritesDeviationTables) {
    const CliRun r = run_cli("compare --ws-min 10.5 --ws-max 11.5 --ws-steps 3 --tmax 2 --steps 20 --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const std::string cmp = slurp(dir / "compare.csv");
    EXPECT_NE(cmp.find("ode,floquet_exact"), std::string::npos);
    EXPECT_NE(slurp(dir / "resonance.csv").find("ode,11\n"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "heatmap.csv"));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
    std::ofstream(dir / "run.cfg") << "# sample\ng0=0.2\nws=9\ntmax=1\nsteps=10\nmethod=ode,perturbation\nout="
                                   << dir.string() << "\n";
    const CliRun r = run_cli("slice --config " + (dir / "run.cfg").string() + " --steps 5");
    ASSERT_EQ(r.status, 0) << r.output;
    const auto rows = rows_of(dir / "slice.csv");
    ASSERT_EQ(rows.size(), 12u);  // 6 times from the override, 2 methods
    EXPECT_EQ(rows.front().varpi_s, 9.0);
    EXPECT_EQ(rows.back().t, 1.0);
    const auto meta = nlohmann::json::parse(slurp(dir / "slice.meta.json"));
    EXPECT_EQ(meta["params"]["g0"], 0.2);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
    const std::string args = "sweep --ws-steps 4 --tmax 1 --steps 8 --method ode,trotter_direct --out ";
    ASSERT_EQ(run_cli(args + (dir / "a").string()).status, 0);
    ASSERT_EQ(run_cli(args + (dir / "b").string()).status, 0);
    EXPECT_EQ(slurp(dir / "a" / "sweep.csv"), slurp(dir / "b" / "sweep.csv"));
}

TEST_F(Cli, ClosedFormChannelFlag) {
    const CliRun r = run_cli("slice --ws 9 --tmax 1 --steps 4 --method perturbation --pert-channel paper --out " +
                         dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const auto rows = rows_of(dir / "slice.csv");
    qubosc::SystemParams p;
    p.varpi_s = 9.0;
    for (const auto& row : rows) EXPECT_EQ(row.p_e1, std::norm(qubosc::alpha_e1_first_order(p, row.t)));
}

TEST_F(Cli, SeedlessAndFormatAreAccepted) {
    EXPECT_EQ(run_cli("slice --seedless --format csv --tmax 1 --steps 2 --out " + dir.string()).status, 0);
}

TEST_F(Cli, PerturbativeOverflowNeedsFlag) {
    // Strong coupling drives the truncated series far above unit probability.
    const std::string args = "slice --g0 2 --tmax 3 --steps 30 --method perturbation --out " + dir.string();
    const CliRun refused = run_cli(args);
    EXPECT_EQ(refused.status, 1);
    EXPECT_NE(refused.output.find("--allow-perturbative-overflow"), std::string::npos) << refused.output;
    EXPECT_FALSE(fs::exists(dir / "slice.csv"));
    EXPECT_EQ(run_cli(args + " --allow-perturbative-overflow").status, 0);
}

TEST_F(Cli, RejectsBadArguments) {
    EXPECT_NE(run_cli("").status, 0);
    EXPECT_NE(run_cli("sweep --method rk45 --out " + dir.string()).status, 0);
    EXPECT_NE(run_cli("sweep --coupling-scheme cubic").status, 0);
    EXPECT_NE(run_cli("sweep --format hdf5").status, 0);
    EXPECT_NE(run_cli("compare --method ode --tmax 1 --steps 2 --out " + dir.string()).status, 0);
    EXPECT_NE(run_cli("sweep --ws-min 12 --ws-max 10").status, 0);
    std::ofstream(dir / "bad.cfg") << "colour=blue\n";
    const CliRun r = run_cli("sweep --config " + (dir / "bad.cfg").string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("colour"), std::string::npos);
}

TEST_F(Cli, UnwritableOutputReportsPath) {
    std::ofstream(dir / "file") << "x";
    const CliRun r = run_cli("slice --tmax 1 --steps 2 --out " + (dir / "file" / "sub").string());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find((dir / "file" / "sub").string()), std::string::npos) << r.output;
}
