#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "igashape/errors.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using igashape::cli::run;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "igashape");
    std::ostringstream out, err;
    Result r;
    r.code = run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

void dump(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("igashape_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    /// 2 x 2 unit squares, degree 2, two spans per patch.
    fs::path square() {
        const Result r = cli({"generate", "--kind", "square_grid", "--grid", "2", "--degree", "2", "--level", "1",
                              "--out", dir_.string()});
        EXPECT_EQ(r.code, 0) << r.err;
        return dir_ / "square_grid_2x2_p2_level1.json";
    }
    fs::path motor() {
        const Result r = cli({"generate", "--out", dir_.string()});
        EXPECT_EQ(r.code, 0) << r.err;
        return dir_ / "motor_like_level0.json";
    }
    fs::path config(const std::string& text) {
        const fs::path p = dir_ / "config.json";
        dump(p, text);
        return p;
    }
    fs::path edited(const fs::path& geometry, const std::function<void(nlohmann::json&)>& edit) {
        nlohmann::json j = nlohmann::json::parse(slurp(geometry));
        edit(j);
        const fs::path p = dir_ / "edited.json";
        dump(p, j.dump());
        return p;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenerateWritesMotor) {
    const Result r = cli({"generate", "--out", dir_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("80 patches"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("2976 global dofs"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(dir_ / "motor_like_level0.json"));
}

TEST_F(CliTest, HelpExitsZero) {
    EXPECT_EQ(cli({"--help"}).code, 0);
    EXPECT_EQ(cli({"simulate", "--help"}).code, 0);
}

TEST_F(CliTest, ParseErrorsExitTwo) {
    const fs::path g = square();
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"simulate"}).code, 2);  // --geometry is required
    EXPECT_EQ(cli({"simulate", "--geometry", g.string(), "--bogus"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--geometry", g.string(), "--solver", "lu"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--geometry", g.string(), "--workers", "two"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--geometry", g.string(), "--workers", "1,2"}).code, 2);
    EXPECT_EQ(cli({"bench", "--geometry", g.string(), "--workers", "1,0"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--geometry", (dir_ / "missing.json").string()}).code, 2);
    EXPECT_EQ(cli({"simulate", "--geometry", g.string(), "--config", config("{ \"tol\": ").string()}).code, 2);
    const Result r = cli({"simulate", "--geometry", g.string(), "--config", config(R"({"tolerance": 1})").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("tolerance"), std::string::npos) << r.err;
    EXPECT_EQ(cli({"generate", "--kind", "torus"}).code, 2);
}

TEST_F(CliTest, TopologyErrorExitsThree) {
    // patch 0's east side is shared with patch 2
    const fs::path g = edited(square(), [](nlohmann::json& j) {
        j["dirichlet"].push_back({{"patch", 0}, {"side", "east"}});
    });
    const Result r = cli({"simulate", "--geometry", g.string(), "--out", (dir_ / "o").string()});
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliTest, FoldedGeometryExitsFour) {
    const fs::path g = edited(square(), [](nlohmann::json& j) {
        j["patches"][0]["control_points"][5] = {3.0, 3.0};  // interior point (1, 1) far outside
    });
    const Result r = cli({"simulate", "--geometry", g.string(), "--out", (dir_ / "o").string()});
    EXPECT_EQ(r.code, 4) << r.err;
}

TEST_F(CliTest, SolverFailureExitsFive) {
    const fs::path c = config(R"({"solver": "ieti", "max_solver_iterations": 1, "tol": 1e-12})");
    const Result r = cli({"simulate", "--geometry", motor().string(), "--config", c.string(), "--out",
                          (dir_ / "o").string()});
    EXPECT_EQ(r.code, 5) << r.err;
    EXPECT_NE(r.err.find("did not reach"), std::string::npos) << r.err;
}

TEST_F(CliTest, InfeasibleLineSearchExitsSix) {
    // a single huge trial step folds the design patches and cannot shrink
    const fs::path c = config(R"({"optimizer": {"initial_step": 1000, "max_shrinks": 0, "bound_radius": 100}})");
    const Result r = cli({"optimize", "--geometry", motor().string(), "--config", c.string(), "--out",
                          (dir_ / "o").string()});
    EXPECT_EQ(r.code, 6) << r.err;
    EXPECT_NE(r.err.find("line search rejected"), std::string::npos) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "o" / "history.csv"));
}

TEST_F(CliTest, SimulateManufacturedWritesOutputs) {
    const fs::path c = config(R"({"manufactured": true})");
    const fs::path o = dir_ / "sim";
    const Result r = cli({"simulate", "--geometry", square().string(), "--config", c.string(), "--out", o.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const nlohmann::json s = nlohmann::json::parse(slurp(o / "summary.json"));
    EXPECT_EQ(s["global_dofs"].get<int>(), 49);
    const double coarse = s["l2_error"].get<double>();
    EXPECT_TRUE(fs::exists(o / "u.csv"));
    for (int p = 0; p < 4; ++p) {
        char name[32];
        std::snprintf(name, sizeof name, "field_%03d.vtk", p);
        EXPECT_TRUE(fs::exists(o / "vtk" / name)) << name;
    }
    EXPECT_FALSE(fs::exists(o / "gamma_profile.csv"));  // no air-gap curve

    ASSERT_EQ(cli({"generate", "--kind", "square_grid", "--grid", "2", "--degree", "2", "--level", "2", "--out",
                   dir_.string()}).code, 0);
    const fs::path fine = dir_ / "fine";
    ASSERT_EQ(cli({"simulate", "--geometry", (dir_ / "square_grid_2x2_p2_level2.json").string(), "--config",
                   c.string(), "--out", fine.string()}).code, 0);
    const double ratio = coarse / nlohmann::json::parse(slurp(fine / "summary.json"))["l2_error"].get<double>();
    EXPECT_GT(ratio, 6.0);  // h^3 for degree 2
}

TEST_F(CliTest, SimulateMotorWithBothSolvers) {
    const fs::path g = motor();
    std::vector<double> j;
    for (std::string solver : {"direct", "ieti"}) {
        const fs::path o = dir_ / solver;
        const Result r = cli({"simulate", "--geometry", g.string(), "--solver", solver, "--out", o.string()});
        ASSERT_EQ(r.code, 0) << r.err;
        const nlohmann::json s = nlohmann::json::parse(slurp(o / "summary.json"));
        j.push_back(s["J"].get<double>());
        EXPECT_TRUE(fs::exists(o / "gamma_profile.csv"));
        EXPECT_EQ(s["solver"].get<std::string>(), solver);
    }
    EXPECT_NEAR(j[0], j[1], 1e-8 * j[0]);
}

TEST_F(CliTest, WorkersFallBackToEnvironment) {
    ::setenv("IGA_SHAPEOPT_THREADS", "3", 1);
    const fs::path o = dir_ / "o";
    const Result r = cli({"simulate", "--geometry", motor().string(), "--solver", "ieti", "--out", o.string()});
    ::unsetenv("IGA_SHAPEOPT_THREADS");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(slurp(o / "summary.json"))["workers"].get<int>(), 3);
    const Result flag = cli({"simulate", "--geometry", motor().string(), "--solver", "ieti", "--workers", "2",
                             "--out", o.string()});
    ASSERT_EQ(flag.code, 0) << flag.err;
    EXPECT_EQ(nlohmann::json::parse(slurp(o / "summary.json"))["workers"].get<int>(), 2);
}

TEST_F(CliTest, OptimizeZeroIterationsKeepsGeometry) {
    const fs::path g = motor();
    const fs::path o = dir_ / "opt";
    const fs::path c = config(R"({"optimizer": {"max_iterations": 0}})");
    const Result r = cli({"optimize", "--geometry", g.string(), "--config", c.string(), "--out", o.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(o / "final_geometry.json"), slurp(g));
    EXPECT_EQ(slurp(o / "initial_geometry.json"), slurp(g));
    std::istringstream hist(slurp(o / "history.csv"));
    int lines = 0;
    for (std::string line; std::getline(hist, line);) ++lines;
    EXPECT_EQ(lines, 2);
    EXPECT_TRUE(fs::exists(o / "profiles" / "profile_0000.csv"));
    EXPECT_TRUE(fs::exists(o / "geometries" / "iterate_0000.json"));
}

TEST_F(CliTest, OptimizeFewIterationsDecreases) {
    const fs::path o = dir_ / "opt";
    const fs::path c = config(R"({"optimizer": {"max_iterations": 3, "algorithm": "bfgs"}})");
    const Result r = cli({"optimize", "--geometry", motor().string(), "--config", c.string(), "--out", o.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const nlohmann::json s = nlohmann::json::parse(slurp(o / "summary.json"));
    EXPECT_EQ(s["accepted_iterations"].get<int>(), 3);
    EXPECT_LT(s["final_J"].get<double>(), s["initial_J"].get<double>());
    EXPECT_TRUE(fs::exists(o / "geometries" / "iterate_0003.json"));
}

TEST_F(CliTest, BenchWorkerListAndDeterminism) {
    const fs::path o = dir_ / "bench";
    const fs::path c = config(R"({"solver": "ieti", "bench": {"repeats": 1}})");
    const Result r = cli({"bench", "--geometry", motor().string(), "--config", c.string(), "--workers", "1,2",
                          "--deterministic", "--seed", "5", "--out", o.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream csv(slurp(o / "bench.csv"));
    std::vector<std::string> lines;
    for (std::string line; std::getline(csv, line);) lines.push_back(line);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0].rfind("dofs,solver,workers", 0), 0u) << lines[0];
    EXPECT_NE(lines[1].find(",ieti,1,"), std::string::npos);
    EXPECT_NE(lines[2].find(",ieti,2,"), std::string::npos);
    EXPECT_EQ(lines[1].substr(lines[1].size() - 2), "--");
}
