#pragma once

// Run configuration: one JSON document, validated before any computation. Unknown keys are
// rejected and every error names the offending field path.

#include "uowq/ensemble.hpp"
#include "uowq/simulation.hpp"
#include "uowq/trainer.hpp"
#include "uowq/verification.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uowq::app {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct SourceEntry {
  std::optional<Eigen::VectorXd> theta;
  double regime_constant = 0.0;
  std::size_t budget = 0;
  std::uint64_t direction_seed = 0;
};

struct EnsembleSpec {
  Eigen::VectorXd target_theta;
  std::size_t target_size = 0;
  std::vector<SourceEntry> sources;
};

struct WeightsSpec {
  std::vector<double> diagnostic_fractions;
};

struct SimulateSpec {
  std::optional<std::vector<double>> weights;  // empty: the optimal plan
  std::optional<std::vector<std::size_t>> quantities;
  std::size_t trials = 4000;
};

struct SweepSpec {
  std::string axis;  // "weight" or "quantity"
  std::size_t source = 0;
  std::vector<double> weight_grid;
  std::vector<std::size_t> quantity_grid;
  WeightRule rule;
  std::size_t trials = 4000;
};

struct VerifySpec {
  std::vector<std::string> theorems;
  VerifyOptions options;  // seed filled in at run time
};

using ShiftedTask = ToyTaskSpec;

struct TrainSpec {
  std::string mode;  // "multi_source" or "multi_task"
  double theta_scale = 1.0;
  ShiftedTask target;
  std::vector<ShiftedTask> sources;
  std::vector<ShiftedTask> tasks;
  TrainConfig train;
  bool baseline = true;
};

struct RunConfig {
  nlohmann::json echo;
  std::uint64_t seed = 0;
  std::optional<std::string> output_dir;
  std::optional<ModelFamily> family;
  std::optional<EnsembleSpec> ensemble;
  std::optional<Eigen::MatrixXd> fisher;
  std::optional<WeightsSpec> weights;
  std::optional<SimulateSpec> simulate;
  std::vector<SweepSpec> sweeps;
  std::optional<VerifySpec> verify;
  std::optional<TrainSpec> train;
};

// `seed_override` replaces the config seed, and the echo records the seed actually used.
RunConfig parse_config(const nlohmann::json& root, std::optional<std::uint64_t> seed_override = {});
RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {});

// Builds the ensemble block (ConfigError when the config has none).
TaskEnsemble build_ensemble(const RunConfig& cfg);

}  // namespace uowq::app
