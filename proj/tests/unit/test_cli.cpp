#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fjcal/calibration.hpp"
#include "fjcal/io_util.hpp"
#include "fjcal/series.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fjcal;

namespace {

struct RunResult {
    int code;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("fjcal_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunResult run(const std::string& args, const std::string& env = {}) const {
        const auto err = dir_ / "stderr.txt";
        const std::string cmd = env + " " + FJCAL_CLI_PATH + " " + args + " > /dev/null 2> " + err.string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(err)};
    }

    /// Writes a synthetic daily close series of n returns and returns its path.
    fs::path prices(std::size_t n, std::uint64_t seed) const {
        const auto r = oracle::synthetic_market_returns(n, seed);
        std::vector<Date> dates;
        std::vector<double> closes{100.0};
        for (double x : r) closes.push_back(closes.back() * std::exp(x));
        for (std::size_t i = 0; i < closes.size(); ++i) {
            const int k = static_cast<int>(i);
            dates.push_back({2000 + k / 336, 1 + (k % 336) / 28, 1 + k % 28});
        }
        const auto path = dir_ / "prices.csv";
        write_file_atomic(path, format_price_csv(PriceSeries(dates, closes)));
        return path;
    }

    fs::path dir_;
};

std::size_t data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        ++n;
    }
    return n;
}

const std::string kTestScale =
    " --sims-per-eval 2 --bootstrap --bootstrap-replicates 20 --block-length 50 --population 6 --generations 2";

}  // namespace

TEST_F(CliTest, SimulateIsDeterministic) {
    const std::string args = "simulate --variant adaptive --seed 7 --days 500 --output-dir " + dir_.string();
    ASSERT_EQ(run(args).code, 0);
    const auto csv = read_file(dir_ / "simulation.csv");
    const auto summary = read_file(dir_ / "simulation_summary.json");
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(read_file(dir_ / "simulation.csv"), csv);
    EXPECT_EQ(read_file(dir_ / "simulation_summary.json"), summary);
    EXPECT_EQ(data_rows(csv), 501u);
    EXPECT_EQ(csv.rfind("# fjcal: simulate\n# config_hash: ", 0), 0u);
    EXPECT_NE(csv.find("# seed: 7\n"), std::string::npos);
}

TEST_F(CliTest, SimulateValidation) {
    const auto missing = (dir_ / "nope.csv").string();
    auto r = run("simulate --empirical " + missing + " --output-dir " + dir_.string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
    EXPECT_EQ(run("simulate --days 0 --output-dir " + dir_.string()).code, 2);
    EXPECT_EQ(run("simulate --set lamda=3 --output-dir " + dir_.string()).code, 2);
    EXPECT_EQ(run("").code, 2);
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
    const auto out = dir_ / "env_out";
    ASSERT_EQ(run("simulate --days 20", "FJCAL_OUTPUT_DIR=" + out.string()).code, 0);
    EXPECT_TRUE(fs::exists(out / "simulation.csv"));
}

TEST_F(CliTest, CalibrateEndToEndAndReport) {
    const auto p = prices(300, 3).string();
    ASSERT_EQ(run("calibrate --empirical " + p + kTestScale + " --output-dir " + dir_.string()).code, 0);
    const auto j = nlohmann::json::parse(read_file(dir_ / "calibration.json"));
    for (auto key : {"optimizer", "variant", "seed", "best_fitness", "evaluations", "free_parameters", "best_vector",
                     "parameters", "trace", "config"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_TRUE(std::isfinite(j.at("best_fitness").get<double>()));
    EXPECT_EQ(j.at("trace").size(), 3u);
    EXPECT_TRUE(j.at("config").contains("config_hash"));
    EXPECT_TRUE(fs::exists(dir_ / "trace.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "calibration.log"));
    EXPECT_FALSE(fs::is_empty(dir_ / "cache"));

    const auto report_dir = dir_ / "report";
    ASSERT_EQ(run("report --result " + (dir_ / "calibration.json").string() + " --empirical " + p +
                  " --simulations 3 --max-lag 12 --output-dir " + report_dir.string())
                  .code,
              0);
    for (auto f : {"price_bands.csv", "return_paths.csv", "acf.csv", "qq.csv", "strategies.csv", "moments_table.csv"})
        EXPECT_TRUE(fs::exists(report_dir / f)) << f;
    EXPECT_EQ(data_rows(read_file(report_dir / "acf.csv")), 12u);
    EXPECT_EQ(data_rows(read_file(report_dir / "moments_table.csv")), 9u);
    EXPECT_EQ(data_rows(read_file(report_dir / "price_bands.csv")), 301u);
}

TEST_F(CliTest, CalibrateNeedsWeightsAndKnownOptimizer) {
    const auto p = prices(300, 4).string();
    EXPECT_EQ(run("calibrate --empirical " + p + " --output-dir " + dir_.string()).code, 2);
    auto r = run("calibrate --empirical " + p + kTestScale + " --optimizer pso --output-dir " + dir_.string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("pso"), std::string::npos);
}

TEST_F(CliTest, ZeroThresholdsMatchPlainNelderMead) {
    const auto p = prices(300, 5);
    ASSERT_EQ(run("calibrate --empirical " + p.string() + kTestScale +
                  " --optimizer nmta --thresholds 0 --restarts 1 --iterations 12 --optimizer-seed 4 --output-dir " +
                  dir_.string())
                  .code,
              0);
    const auto j = nlohmann::json::parse(read_file(dir_ / "calibration.json"));
    EXPECT_TRUE(j.at("threshold_events").empty());

    // Same objective through the library, optimized by plain restarted Nelder-Mead.
    const auto r = log_returns(load_price_series(p));
    const std::vector<double> returns(r.values().begin(), r.values().end());
    const auto w = weight_matrix_from_json(read_file(weight_cache_path(dir_ / "cache", returns, 50, 20, 1)));
    const auto cfg = make_objective_config(Variant::Adaptive, returns, w.entries, 2, 1);
    const ParameterSpace space(Variant::Adaptive, default_bounds());
    NmtaOptions opt;
    opt.restarts = 1;
    opt.iterations_per_restart = 12;
    const auto nm = nm_optimize(make_batch_objective(space, cfg), space.bounds(), opt, 4);
    EXPECT_EQ(j.at("trace").get<std::vector<double>>(), nm.trace);
}

TEST_F(CliTest, SurfaceGridAndErrors) {
    const auto p = prices(300, 6).string();
    const std::string args = "surface --empirical " + p +
                             " --variant standard --x a --y n_traders --grid 10 10 --sims-per-eval 1 --bootstrap "
                             "--bootstrap-replicates 20 --block-length 50 --output-dir " +
                             dir_.string();
    ASSERT_EQ(run(args).code, 0);
    const auto csv = read_file(dir_ / "surface_a_n_traders.csv");
    EXPECT_EQ(data_rows(csv), 100u);
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(read_file(dir_ / "surface_a_n_traders.csv"), csv);

    auto r = run("surface --empirical " + p + " --x lamda --y a --bootstrap --bootstrap-replicates 20 "
                 "--block-length 50 --output-dir " + dir_.string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("lambda"), std::string::npos) << r.err;
}
