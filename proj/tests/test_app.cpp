#include "app.hpp"
#include "commands.hpp"
#include "config.hpp"

#include "uowq/simulation.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace uowq;
using namespace uowq::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal_config() {
  return json::parse(R"({
    "seed": 3,
    "family": {"name": "categorical", "outcomes": 3},
    "ensemble": {
      "target_theta": [0.2, 0.3],
      "target_size": 500,
      "sources": [
        {"regime_constant": 1.5, "budget": 800, "direction_seed": 1},
        {"theta": [0.25, 0.3], "budget": 400}
      ]
    },
    "simulate": {"trials": 20}
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uowq_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& cfg) {
  const fs::path path = dir / "config.json";
  std::ofstream(path) << cfg.dump(2);
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "uowq");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string config_error(const json& cfg) {
  try {
    parse_config(cfg);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

}  // namespace

TEST(Config, ParsesMinimalConfig) {
  const RunConfig cfg = parse_config(minimal_config());
  EXPECT_EQ(cfg.seed, 3u);
  ASSERT_TRUE(cfg.ensemble);
  EXPECT_EQ(cfg.ensemble->sources.size(), 2u);
  ASSERT_TRUE(cfg.simulate);
  EXPECT_EQ(cfg.simulate->trials, 20u);
  EXPECT_FALSE(cfg.simulate->weights);
  const TaskEnsemble e = build_ensemble(cfg);
  EXPECT_NEAR(e.sources[0].regime_constant, 1.5, 1e-12);
  EXPECT_NEAR(e.sources[1].regime_constant, std::sqrt(500.0) * 0.05, 1e-12);
}

TEST(Config, SeedOverrideIsEchoed) {
  const RunConfig cfg = parse_config(minimal_config(), 99);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.echo.at("seed"), 99);
}

TEST(Config, ErrorsNameTheField) {
  json cfg = minimal_config();
  cfg["ensemble"]["sources"][0]["budgett"] = 1;
  EXPECT_EQ(config_error(cfg), "ensemble.sources[0].budgett");

  cfg = minimal_config();
  cfg["family"]["name"] = "poisson";
  EXPECT_EQ(config_error(cfg), "family.name");

  cfg = minimal_config();
  cfg["ensemble"].erase("target_size");
  EXPECT_EQ(config_error(cfg), "ensemble.target_size");

  cfg = minimal_config();
  cfg["verify"] = {{"theorems", {"T7"}}};
  EXPECT_EQ(config_error(cfg), "verify.theorems[0]");

  cfg = minimal_config();
  cfg["sweeps"] = json::array({{{"axis", "weight"}, {"grid", {{"start", 1.0}, {"stop", 0.0}, {"step", 0.1}}}}});
  EXPECT_EQ(config_error(cfg), "sweeps[0].grid.stop");
}

TEST(Config, GridObjectsExpand) {
  json cfg = minimal_config();
  cfg["sweeps"] = json::array({{{"axis", "weight"}, {"grid", {{"start", 0.0}, {"stop", 1.0}, {"step", 0.25}}}},
                               {{"axis", "quantity"}, {"grid", {100, 200, 400}}, {"rule", "fixed"}, {"weight", 0.5}}});
  const RunConfig parsed = parse_config(cfg);
  ASSERT_EQ(parsed.sweeps.size(), 2u);
  EXPECT_EQ(parsed.sweeps[0].weight_grid, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(parsed.sweeps[1].quantity_grid, (std::vector<std::size_t>{100, 200, 400}));
  EXPECT_EQ(parsed.sweeps[1].rule.kind, WeightRule::Kind::fixed);
}

TEST(Cli, WeightsWritesReportAndCsv) {
  const fs::path dir = scratch("weights");
  const fs::path cfg = write_config(dir, minimal_config());
  ASSERT_EQ(run_cli({"weights", "--config", cfg.string(), "--out", (dir / "out").string()}), kExitOk);
  const json report = json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_EQ(report.at("command"), "weights");
  EXPECT_EQ(report.at("seed"), 3);
  EXPECT_TRUE(report.at("results").contains("plan"));
  const std::string csv = slurp(dir / "out" / "plan.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "source,alpha,weight,quantity");
  EXPECT_TRUE(fs::exists(dir / "out" / "timings.txt"));
}

TEST(Cli, FormatSelectsOutputs) {
  const fs::path dir = scratch("format");
  const fs::path cfg = write_config(dir, minimal_config());
  ASSERT_EQ(run_cli({"weights", "--config", cfg.string(), "--out", (dir / "j").string(), "--format", "json"}), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "j" / "report.json"));
  EXPECT_FALSE(fs::exists(dir / "j" / "plan.csv"));
  ASSERT_EQ(run_cli({"weights", "--config", cfg.string(), "--out", (dir / "c").string(), "--format", "csv"}), kExitOk);
  EXPECT_FALSE(fs::exists(dir / "c" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "c" / "plan.csv"));
}

TEST(Cli, SweepWritesGnuplotScripts) {
  const fs::path dir = scratch("sweep");
  json cfg = minimal_config();
  cfg["sweeps"] = json::array({{{"axis", "weight"}, {"grid", {0.0, 0.5, 1.0}}, {"trials", 10}}});
  const fs::path path = write_config(dir, cfg);
  ASSERT_EQ(run_cli({"sweep", "--config", path.string(), "--out", (dir / "out").string(), "--gnuplot"}), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "out" / "sweep_weight.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "sweep_weight.gp"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  EXPECT_EQ(run_cli({"weights"}), kExitConfig);
  EXPECT_EQ(run_cli({"weights", "--config", (dir / "missing.json").string()}), kExitConfig);
  EXPECT_EQ(run_cli({"frobnicate"}), kExitConfig);

  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(run_cli({"weights", "--config", (dir / "broken.json").string(), "--out", (dir / "o").string()}), kExitConfig);

  json cfg = minimal_config();
  cfg.erase("ensemble");
  EXPECT_EQ(run_cli({"weights", "--config", write_config(dir, cfg).string(), "--out", (dir / "o").string()}), kExitConfig);

  // A source that cannot be placed inside the simplex is a numerical failure.
  cfg = minimal_config();
  cfg["ensemble"]["sources"][0]["regime_constant"] = 1e6;
  EXPECT_EQ(run_cli({"weights", "--config", write_config(dir, cfg).string(), "--out", (dir / "o").string()}),
            kExitNumerical);

  // With N0 = 2 the target MLE almost always misses an outcome, so the KL is infinite and
  // the bridge verdict fails.
  cfg = json::parse(R"({
    "seed": 1,
    "family": {"name": "categorical", "outcomes": 3},
    "ensemble": {"target_theta": [0.05, 0.05], "target_size": 2,
                 "sources": [{"regime_constant": 0.01, "budget": 5, "direction_seed": 1}]},
    "verify": {"theorems": ["L2-bridge"], "trials": 50, "weight": 0.0}
  })");
  EXPECT_EQ(run_cli({"verify", "--config", write_config(dir, cfg).string(), "--out", (dir / "o").string()}),
            kExitVerification);
}

TEST(Cli, SeedFlagChangesResults) {
  const fs::path dir = scratch("seed");
  const fs::path cfg = write_config(dir, minimal_config());
  ASSERT_EQ(run_cli({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()}), kExitOk);
  ASSERT_EQ(run_cli({"simulate", "--config", cfg.string(), "--out", (dir / "b").string(), "--seed", "4"}), kExitOk);
  const json a = json::parse(slurp(dir / "a" / "report.json"));
  const json b = json::parse(slurp(dir / "b" / "report.json"));
  EXPECT_EQ(b.at("seed"), 4);
  EXPECT_NE(a.at("results"), b.at("results"));
}

TEST(Golden, WeightsExampleMatchesGoldenAndBruteForce) {
  const fs::path root = UOWQ_SOURCE_DIR;
  const RunConfig cfg = load_config(root / "configs" / "weights_example.json");
  const CommandResult result = cmd_weights(cfg);
  const json golden = json::parse(slurp(root / "tests" / "golden" / "weights_example.golden.json"));
  const json& plan = result.results.at("plan");
  for (const char* key : {"alpha", "weights"}) {
    const auto got = plan.at(key).get<std::vector<double>>();
    const auto want = golden.at(key).get<std::vector<double>>();
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-10) << key << "[" << i << "]";
  }
  EXPECT_NEAR(plan.at("t").get<double>(), golden.at("t").get<double>(), 1e-12);

  // Independent check of the golden numbers: the lattice optimum cannot beat them.
  const QpMatrix m = ensemble_qp_matrix(build_ensemble(cfg));
  const auto grid = brute_force_simplex(m.matrix(), 1e-3);
  EXPECT_LE(golden.at("t").get<double>(), grid.objective + 1e-12);
}
