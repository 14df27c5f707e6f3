#pragma once

#include "config.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace uowq::app {

struct CommandResult {
  nlohmann::json results;
  // File name -> content, written when CSV output is requested.
  std::map<std::string, std::string> csv;
  // Axis name -> CSV file name, for optional gnuplot scripts.
  std::map<std::string, std::string> plottable;
  nlohmann::json verdicts = nlohmann::json::object();
  bool verification_failed = false;
};

CommandResult cmd_weights(const RunConfig& cfg);
CommandResult cmd_simulate(const RunConfig& cfg);
CommandResult cmd_sweep(const RunConfig& cfg);
CommandResult cmd_train(const RunConfig& cfg);
CommandResult cmd_verify(const RunConfig& cfg);

}  // namespace uowq::app
