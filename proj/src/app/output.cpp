#include "output.hpp"

#include "uowq/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace uowq::app {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

json plan_json(const TransferPlan& plan) {
  return {{"alpha", vector_json(plan.alpha)},
          {"weights", vector_json(plan.weights)},
          {"quantities", plan.quantities},
          {"s", plan.s},
          {"t", plan.t},
          {"predicted_kl",
           {{"variance_term", plan.predicted_kl.variance_term},
            {"bias_term", plan.predicted_kl.bias_term},
            {"total", plan.predicted_kl.total}}},
          {"solver", {{"iterations", plan.solver.iterations}, {"gap", plan.solver.gap}}}};
}

json sweep_json(const SweepResult& sweep) {
  json points = json::array();
  for (const auto& p : sweep.points) {
    points.push_back({{"axis_value", p.axis_value},
                      {"weight", p.weight},
                      {"mc_mean", p.mc.mean},
                      {"mc_stderr", p.mc.std_error},
                      {"predicted", p.predicted}});
  }
  const auto& mc = sweep.points[sweep.mc_argmin];
  const auto& pr = sweep.points[sweep.predicted_argmin];
  return {{"axis", sweep.axis},
          {"points", points},
          {"mc_argmin", {{"index", sweep.mc_argmin}, {"axis_value", mc.axis_value}}},
          {"predicted_argmin", {{"index", sweep.predicted_argmin}, {"axis_value", pr.axis_value}}}};
}

json trace_json(const TrainTrace& trace) {
  json epochs = json::array();
  for (const auto& e : trace.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"loss", e.loss},
                      {"weights", e.weights},
                      {"grad_norm", e.grad_norm},
                      {"holdout_nll", e.holdout_nll},
                      {"holdout_accuracy", e.holdout_accuracy},
                      {"alpha", e.alpha},
                      {"s", e.s},
                      {"t", e.t}});
  }
  return {{"epochs", epochs}, {"theta", vector_json(trace.theta)}, {"stop_reason", trace.stop_reason}};
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "axis_value,mc_mean,mc_stderr,predicted\n";
  for (const auto& p : sweep.points) {
    out += format_double(p.axis_value) + "," + format_double(p.mc.mean) + "," + format_double(p.mc.std_error) + "," +
           format_double(p.predicted) + "\n";
  }
  return out;
}

std::string trace_csv(const TrainTrace& trace) {
  const std::size_t k = trace.epochs.empty() ? 0 : trace.epochs.front().weights.size();
  std::string out = "epoch,loss";
  for (std::size_t i = 1; i <= k; ++i) out += ",w" + std::to_string(i);
  out += ",grad_norm,holdout_metric\n";
  for (const auto& e : trace.epochs) {
    out += std::to_string(e.epoch) + "," + format_double(e.loss);
    for (double w : e.weights) out += "," + format_double(w);
    out += "," + format_double(e.grad_norm) + "," + format_double(e.holdout_nll) + "\n";
  }
  return out;
}

std::string plan_csv(const TransferPlan& plan) {
  std::string out = "source,alpha,weight,quantity\n";
  for (Eigen::Index i = 0; i < plan.alpha.size(); ++i) {
    out += std::to_string(i) + "," + format_double(plan.alpha[i]) + "," + format_double(plan.weights[i]) + "," +
           std::to_string(plan.quantities[static_cast<std::size_t>(i)]) + "\n";
  }
  return out;
}

std::string gnuplot_script(const std::string& csv_name, const std::string& axis) {
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set key top right\n"
    << "set xlabel '" << axis << "'\n"
    << "set ylabel 'E[KL]'\n"
    << "plot '" << csv_name << "' every ::1 using 1:2:3 with yerrorbars title 'Monte Carlo', \\\n"
    << "     '' every ::1 using 1:4 with lines title 'predicted'\n";
  return s.str();
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("failed while writing '" + path.string() + "'");
}

}  // namespace uowq::app
