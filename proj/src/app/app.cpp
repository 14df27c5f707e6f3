#include "app.hpp"

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

#include "uowq/errors.hpp"
#include "uowq/parallel.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace uowq::app {
namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  OutputFormat format = OutputFormat::both;
  bool gnuplot = false;
};

using Command = std::function<CommandResult(const RunConfig&)>;

nlohmann::json versions() {
  return {{"uowq", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

std::filesystem::path output_dir(const Options& opts, const RunConfig& cfg) {
  if (opts.out) return *opts.out;
  if (const char* env = std::getenv("UOWQ_OUT_DIR"); env && *env) return env;
  if (cfg.output_dir) return *cfg.output_dir;
  return "uowq_out";
}

int execute(const std::string& name, const Command& command, const Options& opts) {
  RunConfig cfg;
  try {
    cfg = load_config(opts.config, opts.seed);
  } catch (const ConfigError& e) {
    std::cerr << "uowq: config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (opts.threads) parallel::set_threads(*opts.threads);

  const auto start = std::chrono::steady_clock::now();
  CommandResult result;
  try {
    result = command(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "uowq: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "uowq: " << name << " failed: " << e.what() << "\n";
    return kExitNumerical;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::filesystem::path dir = output_dir(opts, cfg);
  try {
    std::filesystem::create_directories(dir);
    if (opts.format != OutputFormat::csv) {
      const nlohmann::json report = {{"command", name},
                                     {"config", cfg.echo},
                                     {"seed", cfg.seed},
                                     {"versions", versions()},
                                     {"results", result.results},
                                     {"verdicts", result.verdicts}};
      write_file(dir / "report.json", json_text(report));
    }
    if (opts.format != OutputFormat::json) {
      for (const auto& [file, content] : result.csv) write_file(dir / file, content);
    }
    if (opts.gnuplot) {
      for (const auto& [axis, csv] : result.plottable) write_file(dir / ("sweep_" + axis + ".gp"), gnuplot_script(csv, axis));
    }
    // Timings live outside the report so that the report stays reproducible byte for byte.
    write_file(dir / "timings.txt", name + " " + format_double(seconds) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "uowq: cannot write outputs: " << e.what() << "\n";
    return kExitNumerical;
  }

  std::cout << name << ": wrote outputs to " << dir.string() << "\n";
  for (auto it = result.verdicts.begin(); it != result.verdicts.end(); ++it) {
    std::cout << "  " << it.key() << ": " << it.value().get<std::string>() << "\n";
  }
  return result.verification_failed ? kExitVerification : kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Optimal transfer weights and quantities for multi-source transfer learning"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options opts;
  const std::map<std::string, OutputFormat> formats{
      {"json", OutputFormat::json}, {"csv", OutputFormat::csv}, {"both", OutputFormat::both}};
  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"weights", {"Compute the optimal transfer plan", cmd_weights}},
      {"simulate", {"Monte Carlo E[KL] of a plan, plus optional verification", cmd_simulate}},
      {"sweep", {"Weight and quantity sweeps with CSV curves", cmd_sweep}},
      {"train", {"Train softmax regression with dynamic transfer weights", cmd_train}},
      {"verify", {"Run oracle checks and fail with exit code 4 on a failed verdict", cmd_verify}}};

  std::string selected;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", opts.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Master seed (overrides the config)");
    sub->add_option("--out", opts.out, "Output directory");
    sub->add_option("--threads", opts.threads, "Worker threads (default: hardware parallelism)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", opts.format, "Output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_flag("--gnuplot", opts.gnuplot, "Also write gnuplot scripts for sweep CSVs");
    sub->callback([&selected, name = name] { selected = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  return execute(selected, commands.at(selected).second, opts);
}

}  // namespace uowq::app
