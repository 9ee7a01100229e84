#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ptrap/io.hpp"
#include "ptrap/multipole_fit.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("ptrap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Result run(const std::string& args) {
        const std::string cmd = std::string(PTRAP_CLI_PATH) + " " + args + " --out " + (dir_ / "out").string() + " > "
                                + (dir_ / "stdout").string() + " 2> " + (dir_ / "stderr").string();
        const int status = std::system(cmd.c_str());
        Result r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(dir_ / "stdout");
        r.err = slurp(dir_ / "stderr");
        return r;
    }

    fs::path dir_;
};

// Parses "f_x=... Hz f_y=... Hz f_z=... Hz".
double summary_value(const std::string& line, const std::string& key) {
    const auto pos = line.find(key + "=");
    return pos == std::string::npos ? -1.0 : std::stod(line.substr(pos + key.size() + 1));
}

}  // namespace

TEST_F(Cli, MalformedConfigNamesField) {
    ptrap::write_file_atomic(dir_ / "bad.json", R"({"grid": {"nx": "many"}})");
    const Result r = run("aq --config " + (dir_ / "bad.json").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("grid.nx"), std::string::npos) << r.err;
}

TEST_F(Cli, BadOverrideAndUnknownFlag) {
    EXPECT_EQ(run("aq --set ion.species=Xe-131").code, 2);
    EXPECT_EQ(run("aq --bogus").code, 2);
}

TEST_F(Cli, SimulateReferencePoint) {
    const Result r = run("simulate");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(summary_value(r.out, "f_x"), 53.5e3, 0.03 * 53.5e3);
    EXPECT_NEAR(summary_value(r.out, "f_y"), 41.73e3, 0.03 * 41.73e3);
    for (const char* f : {"trajectory.csv", "spectrum_x.csv", "spectrum_y.csv", "spectrum_z.csv", "peaks.csv", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
    EXPECT_NE(slurp(dir_ / "out" / "manifest.json").find("\"config\""), std::string::npos);
}

TEST_F(Cli, SimulateIdealIsRadiallySymmetric) {
    const Result r = run("simulate --set coefficients=ideal");
    ASSERT_EQ(r.code, 0) << r.err;
    // one resolution unit of the 2048-period record
    const double resolution = 500e3 / 2048.0;
    EXPECT_NEAR(summary_value(r.out, "f_x"), summary_value(r.out, "f_y"), resolution);
}

TEST_F(Cli, SimulateUnstableExitsWithAxisAndTime) {
    const Result r = run("simulate --set operating_point.v_rf=3000");
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("along"), std::string::npos);
    EXPECT_NE(r.err.find("t="), std::string::npos);
}

TEST_F(Cli, AqWritesTable) {
    const Result r = run("aq");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("model,axis,a,q,beta,secular_frequency_hz,stable\n", 0), 0u);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "aq.json"));
}

TEST_F(Cli, TraceIdealConverges) {
    const Result r = run(R"(trace --set 'trace.models=["ideal_pseudo"]' --set 'trace.axes=["z","x"]')");
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(dir_ / "out" / "trace.csv");
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(line.substr(line.rfind(',') + 1), "true") << line;
    }
    EXPECT_EQ(rows, 12);
}

TEST_F(Cli, TraceAboveHalfDriveIsRejected) {
    EXPECT_EQ(run("trace --set trace.target_hz=260000").code, 2);
}

TEST_F(Cli, SolveFieldIdealAndPaperTrap) {
    Result r = run("solve-field --set geometry.filament=null --set grid.nx=65 --set grid.ny=65 --set grid.nz=65");
    ASSERT_EQ(r.code, 0) << r.err;
    auto rep = ptrap::fit_report_from_json(slurp(dir_ / "out" / "fit_report.json"));
    EXPECT_LT(std::abs(rep.coefficients.alpha2 - rep.coefficients.beta2), 0.02);
    for (const char* f : {"grid.ptgrid", "coefficients.csv", "profiles.csv", "fit_orders.csv", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;

    r = run("solve-field");
    ASSERT_EQ(r.code, 0) << r.err;
    rep = ptrap::fit_report_from_json(slurp(dir_ / "out" / "fit_report.json"));
    EXPECT_GT(rep.coefficients.alpha2, rep.coefficients.beta2);

    r = run("fit --grid " + (dir_ / "out" / "grid.ptgrid").string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto refit = ptrap::fit_report_from_json(slurp(dir_ / "out" / "fit_report.json"));
    EXPECT_EQ(refit.coefficients.values(), rep.coefficients.values());
}

TEST_F(Cli, SolveFieldNonConvergenceReportsResidual) {
    const Result r = run("solve-field --set grid.nx=33 --set grid.ny=33 --set grid.nz=33 --set grid.max_iterations=2 "
                         "--set geometry.filament=null");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("residual"), std::string::npos) << r.err;
}

TEST_F(Cli, SweepAxialFrequencyRisesWithHeight) {
    // z spacing equal to the slab thickness so every height catches a node layer
    const Result r = run("sweep --set grid.nx=65 --set grid.ny=65 --set grid.nz=121");
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream is(slurp(dir_ / "out" / "sweep.csv"));
    std::string line;
    std::getline(is, line);
    double prev = 0.0;
    int rows = 0;
    while (std::getline(is, line)) {
        const double f = std::stod(line.substr(line.find(',') + 1));
        EXPECT_GE(f, prev) << line;
        prev = f;
        ++rows;
    }
    EXPECT_EQ(rows, 7);
}

TEST_F(Cli, ManifestIsReproducible) {
    ASSERT_EQ(run("aq --set operating_point.u_dc=1.5").code, 0);
    std::string first = slurp(dir_ / "out" / "manifest.json");
    const std::string aq1 = slurp(dir_ / "out" / "aq.csv");
    ASSERT_EQ(run("aq --set operating_point.u_dc=1.5").code, 0);
    EXPECT_EQ(slurp(dir_ / "out" / "aq.csv"), aq1);
    std::string second = slurp(dir_ / "out" / "manifest.json");
    const auto strip = [](std::string s) { return s.substr(0, s.find("\"timings_s\"")); };
    EXPECT_EQ(strip(first), strip(second));
    EXPECT_NE(first.find("\"u_dc\": 1.5"), std::string::npos);
}
