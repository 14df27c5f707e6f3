#pragma once

#include "uowq/simulation.hpp"
#include "uowq/trainer.hpp"
#include "uowq/transfer_optimizer.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace uowq::app {

enum class OutputFormat { json, csv, both };

// "%.17g"; round-trips every double and ignores the process locale.
std::string format_double(double x);

nlohmann::json vector_json(const Eigen::VectorXd& v);
nlohmann::json matrix_json(const Eigen::MatrixXd& m);
nlohmann::json plan_json(const TransferPlan& plan);
nlohmann::json sweep_json(const SweepResult& sweep);
nlohmann::json trace_json(const TrainTrace& trace);

std::string sweep_csv(const SweepResult& sweep);
// Columns: epoch, loss, w_1..w_K, grad_norm, holdout_metric (held-out NLL).
std::string trace_csv(const TrainTrace& trace);
std::string plan_csv(const TransferPlan& plan);
std::string gnuplot_script(const std::string& csv_name, const std::string& axis);

// Pretty-printed with sorted keys and a trailing newline.
std::string json_text(const nlohmann::json& j);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace uowq::app
