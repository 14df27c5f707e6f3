#include "commands.hpp"

#include "output.hpp"

#include "uowq/errors.hpp"
#include "uowq/fisher.hpp"
#include "uowq/kl_measure.hpp"
#include "uowq/simulation.hpp"
#include "uowq/trainer.hpp"
#include "uowq/transfer_optimizer.hpp"
#include "uowq/verification.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <vector>

namespace uowq::app {
namespace {

using nlohmann::json;

json ensemble_json(const TaskEnsemble& e) {
  json sources = json::array();
  for (const auto& s : e.sources) {
    sources.push_back({{"theta", vector_json(s.theta)}, {"budget", s.budget}, {"regime_constant", s.regime_constant}});
  }
  return {{"family", std::string(e.family.name())},
          {"dimension", e.family.dimension()},
          {"target_theta", vector_json(e.target_theta)},
          {"target_size", e.target_size},
          {"sources", sources}};
}

TransferPlan plan_for(const TaskEnsemble& e, const std::optional<Eigen::MatrixXd>& dense_fisher, Eigen::MatrixXd* qp_out) {
  const int d = e.family.dimension();
  const auto thetas = e.source_thetas();
  const auto budgets = e.budgets();
  const DirectionMatrix directions = DirectionMatrix::from_parameters(e.target_theta, thetas);
  FisherOperator fisher = [&] {
    if (!dense_fisher) return analytic_fisher(e.family, e.target_theta);
    if (dense_fisher->rows() != d) throw ConfigError("fisher.dense", "matrix size must equal the family dimension");
    return FisherOperator::from_dense(*dense_fisher);
  }();
  const QpMatrix m = build_qp_matrix(directions, fisher, budgets, d);
  if (qp_out) *qp_out = m.matrix();
  return optimal_plan(m, static_cast<double>(e.target_size));
}

json run_verifications(const RunConfig& cfg, const TaskEnsemble& e, CommandResult& out) {
  json reports = json::object();
  for (const auto& id : cfg.verify->theorems) {
    VerifyOptions options = cfg.verify->options;
    options.seed = cfg.seed;
    const VerificationReport r = verify_theorem(id, e, options);
    reports[id] = {{"passed", r.passed}, {"details", r.details}};
    out.verdicts[id] = r.passed ? "pass" : "fail";
    out.verification_failed = out.verification_failed || !r.passed;
  }
  return reports;
}

std::string simulate_csv(const MonteCarloEstimate& mc, double predicted) {
  return "mc_mean,mc_stderr,predicted,trials\n" + format_double(mc.mean) + "," + format_double(mc.std_error) + "," +
         format_double(predicted) + "," + std::to_string(mc.trials) + "\n";
}

json train_summary(const TrainTrace& trace) {
  const EpochRecord& last = trace.epochs.back();
  return {{"final_weights", last.weights},
          {"final_loss", last.loss},
          {"final_holdout_nll", last.holdout_nll},
          {"final_holdout_accuracy", last.holdout_accuracy},
          {"epochs_run", trace.epochs.size()},
          {"stop_reason", trace.stop_reason}};
}

}  // namespace

CommandResult cmd_weights(const RunConfig& cfg) {
  const TaskEnsemble e = build_ensemble(cfg);
  CommandResult out;
  Eigen::MatrixXd qp;
  const TransferPlan plan = plan_for(e, cfg.fisher, &qp);
  out.results = {{"plan", plan_json(plan)}, {"qp_matrix", matrix_json(qp)}, {"ensemble", ensemble_json(e)}};
  if (cfg.weights && !cfg.weights->diagnostic_fractions.empty()) {
    const QpMatrix m(qp, e.budgets(), e.family.dimension());
    json rows = json::array();
    for (const auto& p : quantity_diagnostic(m, static_cast<double>(e.target_size), cfg.weights->diagnostic_fractions)) {
      rows.push_back({{"fraction", p.fraction},
                      {"quantities", p.quantities},
                      {"weights", vector_json(p.weights)},
                      {"predicted_total", p.predicted_total}});
    }
    out.results["quantity_diagnostic"] = rows;
  }
  out.csv["plan.csv"] = plan_csv(plan);
  return out;
}

CommandResult cmd_simulate(const RunConfig& cfg) {
  if (!cfg.simulate && !cfg.verify) throw ConfigError("simulate", "simulate needs a simulate or verify block");
  const TaskEnsemble e = build_ensemble(cfg);
  CommandResult out;
  if (cfg.simulate) {
    const SimulateSpec& spec = *cfg.simulate;
    const std::size_t k = e.source_count();
    std::vector<double> weights;
    if (spec.weights) {
      if (spec.weights->size() != k) throw ConfigError("simulate.weights", "need one weight per source");
      weights = *spec.weights;
    } else {
      const TransferPlan plan = plan_for(e, cfg.fisher, nullptr);
      weights.assign(plan.weights.data(), plan.weights.data() + plan.weights.size());
    }
    std::vector<std::size_t> quantities = e.budgets();
    if (spec.quantities) {
      if (spec.quantities->size() != k) throw ConfigError("simulate.quantities", "need one quantity per source");
      for (std::size_t i = 0; i < k; ++i) {
        if ((*spec.quantities)[i] > quantities[i]) {
          throw ConfigError("simulate.quantities[" + std::to_string(i) + "]", "exceeds the source budget");
        }
      }
      quantities = *spec.quantities;
    }
    const MonteCarloEstimate mc = mc_expected_kl(e, weights, quantities, spec.trials, cfg.seed);
    const double predicted = predict_plan_kl(e, weights, quantities);
    out.results["simulation"] = {{"weights", weights},
                                 {"quantities", quantities},
                                 {"mc_mean", mc.mean},
                                 {"mc_stderr", mc.std_error},
                                 {"trials", mc.trials},
                                 {"predicted", predicted}};
    out.csv["simulate.csv"] = simulate_csv(mc, predicted);
  }
  if (cfg.verify) out.results["verification"] = run_verifications(cfg, e, out);
  out.results["ensemble"] = ensemble_json(e);
  return out;
}

CommandResult cmd_sweep(const RunConfig& cfg) {
  if (cfg.sweeps.empty()) throw ConfigError("sweeps", "sweep needs a sweeps block");
  const TaskEnsemble e = build_ensemble(cfg);
  CommandResult out;
  json sweeps = json::array();
  for (std::size_t i = 0; i < cfg.sweeps.size(); ++i) {
    const SweepSpec& spec = cfg.sweeps[i];
    if (spec.source >= e.source_count()) {
      throw ConfigError("sweeps[" + std::to_string(i) + "].source", "source index out of range");
    }
    if (spec.axis == "quantity" && spec.quantity_grid.back() > e.sources[spec.source].budget) {
      throw ConfigError("sweeps[" + std::to_string(i) + "].grid", "quantity grid exceeds the source budget");
    }
    const SweepResult r = spec.axis == "weight"
                              ? sweep_weight(e, spec.source, spec.weight_grid, spec.trials, cfg.seed)
                              : sweep_quantity(e, spec.source, spec.quantity_grid, spec.rule, spec.trials, cfg.seed);
    json summary = sweep_json(r);
    summary["source"] = spec.source;
    summary["trials"] = spec.trials;
    summary["t"] = source_discrepancy(e, spec.source);
    summary["w_star"] = single_source_weight(summary["t"].get<double>(), static_cast<double>(e.sources[spec.source].budget));
    sweeps.push_back(summary);
    const std::string name = "sweep_" + spec.axis + ".csv";
    out.csv[name] = sweep_csv(r);
    out.plottable[spec.axis] = name;
  }
  out.results = {{"sweeps", sweeps}, {"ensemble", ensemble_json(e)}};
  return out;
}

CommandResult cmd_train(const RunConfig& cfg) {
  if (!cfg.train) throw ConfigError("train", "train needs a train block");
  const TrainSpec& spec = *cfg.train;
  const ModelFamily& family = *cfg.family;
  TrainConfig tc = spec.train;
  tc.seed = cfg.seed;
  CommandResult out;

  if (spec.mode == "multi_source") {
    std::vector<ToyTaskSpec> tasks{spec.target};
    tasks.insert(tasks.end(), spec.sources.begin(), spec.sources.end());
    const ToyProblem problem = make_toy_problem(family, spec.theta_scale, tasks, cfg.seed);
    const std::vector<Dataset> sources(problem.train.begin() + 1, problem.train.end());
    std::vector<ParameterVector> pretrained;
    for (const auto& data : sources) pretrained.push_back(pretrain_source(family, data, tc.ridge));
    const TrainTrace trace = train_multi_source(family, problem.train[0], sources, pretrained, tc, problem.holdout[0]);
    out.results["trace"] = trace_json(trace);
    out.results["summary"] = train_summary(trace);
    out.csv["trace.csv"] = trace_csv(trace);
    if (spec.baseline) {
      const TrainTrace base = train_target_only(family, problem.train[0], tc, problem.holdout[0]);
      out.results["baseline"] = train_summary(base);
      out.csv["baseline_trace.csv"] = trace_csv(base);
    }
    json shifts = json::array();
    for (std::size_t i = 1; i < problem.thetas.size(); ++i) shifts.push_back((problem.thetas[i] - problem.thetas[0]).norm());
    out.results["source_shifts"] = shifts;
  } else {
    const ToyProblem problem = make_toy_problem(family, spec.theta_scale, spec.tasks, cfg.seed);
    const bool with_holdout =
        std::all_of(problem.holdout.begin(), problem.holdout.end(), [](const Dataset& h) { return !h.empty(); });
    const std::span<const Dataset> holdouts = with_holdout ? std::span<const Dataset>(problem.holdout) : std::span<const Dataset>{};
    const auto traces = train_multi_task(family, problem.train, tc, holdouts);
    json tasks = json::array();
    for (std::size_t k = 0; k < traces.size(); ++k) {
      json entry = {{"trace", trace_json(traces[k])}, {"summary", train_summary(traces[k])}};
      out.csv["trace_task" + std::to_string(k) + ".csv"] = trace_csv(traces[k]);
      if (spec.baseline) {
        const TrainTrace base = train_target_only(family, problem.train[k], tc,
                                                  with_holdout ? std::span<const Sample>(problem.holdout[k]) : std::span<const Sample>{});
        entry["baseline"] = train_summary(base);
        out.csv["baseline_task" + std::to_string(k) + ".csv"] = trace_csv(base);
      }
      tasks.push_back(entry);
    }
    out.results["tasks"] = tasks;
  }
  return out;
}

CommandResult cmd_verify(const RunConfig& cfg) {
  if (!cfg.verify) throw ConfigError("verify", "verify needs a verify block");
  const TaskEnsemble e = build_ensemble(cfg);
  CommandResult out;
  out.results["verification"] = run_verifications(cfg, e, out);
  out.results["ensemble"] = ensemble_json(e);
  return out;
}

}  // namespace uowq::app
