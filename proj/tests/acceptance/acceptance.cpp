// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include "uowq/errors.hpp"
#include "uowq/fisher.hpp"
#include "uowq/kl_measure.hpp"
#include "uowq/simulation.hpp"
#include "uowq/trainer.hpp"
#include "uowq/transfer_optimizer.hpp"
#include "uowq/verification.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace uowq;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TaskEnsemble categorical_single(std::size_t n0, std::size_t n1, double c) {
  const SourceSpec spec{c, n1, 1};
  return generate_ensemble(ModelFamily::categorical(3), Eigen::Vector2d(0.2, 0.3), n0, {&spec, 1}, kSeed);
}

std::vector<double> weight_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 40; ++i) g.push_back(0.05 * i);
  return g;
}

// AC1: Monte Carlo argmin of the weight sweep within +-2 grid steps of w*.
Outcome ac1(json& t1_details) {
  const auto start = std::chrono::steady_clock::now();
  const TaskEnsemble e = categorical_single(2000, 2000, 2.0);
  VerifyOptions opts;
  opts.trials = 4000;
  opts.seed = kSeed;
  opts.weight_grid = weight_grid();
  const auto report = verify_theorem("T1-weight", e, opts);
  t1_details = report.details;
  const double secs = seconds_since(start);
  const bool ok = report.details.at("argmin_ok").get<bool>() && secs < 300.0;
  const double w_star = report.details.at("w_star");
  const std::size_t argmin = report.details.at("sweep").at("mc_argmin");
  return {ok, fmt("w*=%.4f nearest_grid=%zu mc_argmin=%zu (w=%.2f) steps=%lld time=%.1fs", w_star,
                  report.details.at("nearest_grid_index").get<std::size_t>(), argmin, opts.weight_grid[argmin],
                  report.details.at("argmin_distance_steps").get<long long>(), secs)};
}

// AC2: fidelity at the optimum and a relative gap that does not grow with N0.
Outcome ac2(const json& t1_details) {
  const json& at = t1_details.at("at_optimum");
  const bool fidelity = at.at("ok").get<bool>();
  std::string detail = fmt("N0=2000: mc=%.4e se=%.1e pred=%.4e rel_gap=%.3f;", at.at("mc_mean").get<double>(),
                           at.at("mc_stderr").get<double>(), at.at("predicted").get<double>(),
                           at.at("relative_gap").get<double>());
  struct Gap {
    double rel, se;
  };
  std::vector<Gap> gaps;
  for (std::size_t n0 : {500u, 2000u, 8000u}) {
    const TaskEnsemble e = categorical_single(n0, n0, 2.0);
    const double t = source_discrepancy(e, 0);
    const double w = single_source_weight(t, static_cast<double>(n0));
    const std::vector<double> weights{w};
    const auto budgets = e.budgets();
    const auto mc = mc_expected_kl(e, weights, budgets, 4000, kSeed);
    const double pred = predict_kl_single(static_cast<double>(n0), static_cast<double>(n0), w, t, 2).total;
    gaps.push_back({std::abs(mc.mean - pred) / pred, mc.std_error / pred});
    detail += fmt(" N0=%zu rel_gap=%.4f(se %.4f)", n0, gaps.back().rel, gaps.back().se);
  }
  bool shrink = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    shrink = shrink && gaps[i].rel <= gaps[i - 1].rel + 3.0 * std::hypot(gaps[i].se, gaps[i - 1].se);
  }
  shrink = shrink && gaps.back().rel <= gaps.front().rel + 3.0 * std::hypot(gaps.back().se, gaps.front().se);
  return {fidelity && shrink, detail + (shrink ? " non-increasing" : " GAP GROWS")};
}

// AC3: predicted KL strictly decreasing in n1 at w*(n1); MC decreasing within 3 sigma;
// analytic slope vs finite differences.
Outcome ac3() {
  const TaskEnsemble e = categorical_single(2000, 2000, 2.0);
  VerifyOptions opts;
  opts.trials = 4000;
  opts.seed = kSeed;
  const auto report = verify_theorem("T1-quantity", e, opts);
  const double t = source_discrepancy(e, 0);
  bool strict = true;
  double prev = predicted_kl_at_optimal_weight(2000, 1, t, 2);
  for (int n = 2; n <= 10'000; ++n) {
    const double cur = predict_kl_single(2000, n, single_source_weight(t, n), t, 2).total;
    // Strict decrease by more than 1e-12 relative, checked on the composed formula.
    strict = strict && cur < prev * (1.0 - 1e-12);
    prev = cur;
  }
  double worst_slope = 0.0;
  for (const auto& d : report.details.at("derivative_checks")) {
    worst_slope = std::max(worst_slope, d.at("slope_relative_error").get<double>());
  }
  const bool ok = report.passed && strict;
  return {ok, fmt("points=%zu predicted_strict=%d mc_band_ok=%d n=1..1e4 strict=%d worst_slope_rel_err=%.2e",
                  report.details.at("sweep").at("points").size(),
                  static_cast<int>(report.details.at("predicted_strictly_decreasing").get<bool>()),
                  static_cast<int>(report.details.at("mc_decreasing_within_band").get<bool>()), static_cast<int>(strict),
                  worst_slope)};
}

// AC4: QP solver vs the step-1e-3 simplex lattice on 100 random instances.
Outcome ac4() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> budget(50, 5000);
  std::uniform_real_distribution<double> scale(1e-5, 1e-2);
  double worst_excess = -1e300, worst_simplex = 0.0, worst_diag = 0.0;
  bool ok = true;
  for (int r = 0; r < 100; ++r) {
    const int k = 2 + r % 3;
    const int rank = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    Eigen::MatrixXd a(k, rank);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    std::vector<std::size_t> budgets(static_cast<std::size_t>(k));
    for (auto& n : budgets) n = budget(rng);
    const QpMatrix m = qp_matrix_from_gram(scale(rng) * a * a.transpose(), budgets, 3);
    const QpSolution sol = solve_simplex_qp(m);
    const SimplexGridResult grid = brute_force_simplex(m.matrix(), 1e-3);
    const double excess = sol.t - grid.objective;
    const double simplex_err = std::max(std::abs(sol.alpha.sum() - 1.0), std::max(0.0, -sol.alpha.minCoeff()));
    worst_excess = std::max(worst_excess, excess);
    worst_simplex = std::max(worst_simplex, simplex_err);
    ok = ok && excess <= 1e-6 && simplex_err <= 1e-10;

    Eigen::VectorXd diag(k);
    for (auto& x : diag) x = std::exp(2.0 * normal(rng));
    const QpSolution dsol = solve_simplex_qp(Eigen::MatrixXd(diag.asDiagonal()));
    const Eigen::VectorXd expected = diag.cwiseInverse() / diag.cwiseInverse().sum();
    worst_diag = std::max(worst_diag, (dsol.alpha - expected).cwiseAbs().maxCoeff());
  }
  ok = ok && worst_diag <= 1e-8;
  const double secs = seconds_since(start);
  ok = ok && secs < 30.0;
  return {ok, fmt("max(solver-lattice)=%.2e max_simplex_err=%.1e max_diag_err=%.1e time=%.1fs", worst_excess,
                  worst_simplex, worst_diag, secs)};
}

// AC5: K = 1 through the multi-source pipeline reproduces w* = 1/(1 + t N1).
Outcome ac5() {
  std::mt19937_64 rng(kSeed + 5);
  std::uniform_int_distribution<std::size_t> size(50, 20'000);
  std::uniform_real_distribution<double> c(0.0, 4.0);
  double worst = 0.0;
  for (int r = 0; r < 100; ++r) {
    const bool categorical = r % 2 == 0;
    const int dim = 1 + r % 5;
    const ModelFamily family = categorical ? ModelFamily::categorical(dim + 1) : ModelFamily::gaussian_iso(dim);
    const ParameterVector theta0 =
        categorical ? ParameterVector::Constant(dim, 1.0 / (dim + 1)) : ParameterVector::Zero(dim);
    const std::size_t n0 = std::max<std::size_t>(size(rng), 200);
    const SourceSpec spec{c(rng), size(rng), static_cast<std::uint64_t>(r)};
    const TaskEnsemble e = generate_ensemble(family, theta0, n0, {&spec, 1}, kSeed + static_cast<std::uint64_t>(r));
    const TransferPlan plan = optimal_plan(ensemble_qp_matrix(e), static_cast<double>(n0));
    const double closed = single_source_weight(source_discrepancy(e, 0), static_cast<double>(spec.budget));
    worst = std::max(worst, std::abs(plan.weights[0] - closed));
  }
  return {worst <= 1e-10, fmt("max |w_pipeline - w_closed| = %.2e over 100 instances", worst)};
}

// AC6: K = 3 categorical; plan vs 1e4 random weight vectors.
Outcome ac6() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<SourceSpec> specs{{1.0, 2000, 1}, {2.5, 4000, 2}, {5.0, 8000, 3}};
  const TaskEnsemble e =
      generate_ensemble(ModelFamily::categorical(5), ParameterVector::Constant(4, 0.2), 2000, specs, kSeed);
  VerifyOptions opts;
  opts.trials = 5000;
  opts.seed = kSeed;
  opts.random_plans = 10'000;
  opts.top_plans = 10;
  opts.plan_trials = 200;
  // Optimal weights lie in [0, 1]; random competitors drawn from the same range.
  opts.max_random_weight = 1.0;
  const auto report = verify_theorem("T2-weights", e, opts);
  const double secs = seconds_since(start);
  const json& plan = report.details.at("plan");
  double worst_margin = -1e300;
  for (const auto& c : report.details.at("top_random")) {
    worst_margin = std::max(worst_margin, plan.at("mc_mean").get<double>() - c.at("mc_mean").get<double>() - c.at("band").get<double>());
  }
  return {report.passed && secs < 900.0,
          fmt("plan pred=%.5e mc=%.5e(se %.1e) best_random_pred=%.5e analytic_ok=%d mc_ok=%d worst(mc-rand-band)=%.2e "
              "time=%.1fs",
              plan.at("predicted").get<double>(), plan.at("mc_mean").get<double>(), plan.at("mc_stderr").get<double>(),
              report.details.at("best_random_predicted").get<double>(),
              static_cast<int>(report.details.at("analytic_ok").get<bool>()),
              static_cast<int>(report.details.at("mc_ok").get<bool>()), worst_margin, secs)};
}

// AC7: mean of the weighted MLE within 3 standard errors of the weighted parameter average.
Outcome ac7() {
  const TaskEnsemble e = categorical_single(2000, 2000, 2.0);
  VerifyOptions opts;
  opts.trials = 2000;
  opts.seed = kSeed;
  const auto report = verify_theorem("L1-expectation", e, opts);
  const auto mean = report.details.at("mean").get<std::vector<double>>();
  const auto se = report.details.at("stderr").get<std::vector<double>>();
  const auto expected = report.details.at("expected").get<std::vector<double>>();
  std::string z;
  for (std::size_t i = 0; i < mean.size(); ++i) z += fmt(" z%zu=%.2f", i, (mean[i] - expected[i]) / se[i]);
  return {report.passed, "w=" + fmt("%.4f", report.details.at("weight").get<double>()) + z};
}

// AC8: E[KL] vs (1/2) tr(J C) within 10% at N0 = 5000.
Outcome ac8() {
  const TaskEnsemble e = categorical_single(5000, 5000, 2.0);
  VerifyOptions opts;
  opts.trials = 5000;
  opts.seed = kSeed;
  const auto report = verify_theorem("L2-bridge", e, opts);
  return {report.passed, fmt("E[KL]=%.5e half_tr(J C)=%.5e rel_gap=%.4f", report.details.at("mean_kl").get<double>(),
                             report.details.at("half_trace_j_mse").get<double>(),
                             report.details.at("relative_gap").get<double>())};
}

// AC9: linear scaling in d at matched t for gaussian_iso.
Outcome ac9() {
  const SourceSpec spec{1.5, 1000, 1};
  const TaskEnsemble e = generate_ensemble(ModelFamily::gaussian_iso(1), Eigen::VectorXd::Zero(1), 1000, {&spec, 1}, kSeed);
  VerifyOptions opts;
  opts.trials = 4000;
  opts.seed = kSeed;
  opts.dims = {1, 2, 4};
  const auto report = verify_theorem("P1-dim", e, opts);
  std::string detail;
  for (const auto& row : report.details.at("rows")) {
    detail += fmt("d=%d pred/d=%.5e mc/d=%.5e lin_err=%.1e; ", row.at("d").get<int>(), row.at("predicted_per_dim").get<double>(),
                  row.at("mc_per_dim").get<double>(), row.at("linear_relative_error").get<double>());
  }
  return {report.passed, detail};
}

// AC10: empirical vs analytic Fisher, and gram path vs dense path.
Outcome ac10() {
  const auto cat = ModelFamily::categorical(4);
  const Eigen::Vector3d theta(0.1, 0.2, 0.3);
  const auto xs = sample(cat, theta, 1'000'000, kSeed);
  const Eigen::MatrixXd emp = empirical_fisher(cat, theta, xs).dense();
  const Eigen::MatrixXd ana = analytic_fisher(cat, theta).dense();
  const double fisher_err = ((emp - ana).array() / ana.array().abs()).abs().maxCoeff();

  std::mt19937_64 rng(kSeed + 10);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int r = 0; r < 100; ++r) {
    const int features = 1 + static_cast<int>(rng() % 10);
    const int classes = 2 + static_cast<int>(rng() % 4);
    if (features * classes > 50) continue;
    const ModelFamily fam = ModelFamily::softmax_regression(features, classes);
    const int d = fam.dimension();
    const int k = 1 + static_cast<int>(rng() % 4);
    ParameterVector th(d);
    for (auto& v : th) v = 0.5 * normal(rng);
    const auto data = sample(fam, th, 300, kSeed + static_cast<std::uint64_t>(r));
    Eigen::MatrixXd cols(d, k);
    for (Eigen::Index i = 0; i < cols.size(); ++i) cols.data()[i] = normal(rng);
    const DirectionMatrix dirs(cols);
    const Eigen::MatrixXd gram = projected_gram(fam, th, data, dirs);
    const Eigen::MatrixXd dense = empirical_fisher(fam, th, data).projected(dirs);
    Eigen::VectorXd v(k);
    for (auto& x : v) x = normal(rng);
    const double qg = v.dot(gram * v);
    const double qd = v.dot(dense * v);
    worst = std::max(worst, std::abs(qg - qd) / std::max(std::abs(qd), 1e-300));
    worst = std::max(worst, (gram - dense).cwiseAbs().maxCoeff() / dense.cwiseAbs().maxCoeff());
  }
  return {fisher_err <= 0.05 && worst <= 1e-10,
          fmt("max rel entry err (1e6 samples)=%.4f; max gram-vs-dense rel err=%.1e", fisher_err, worst)};
}

struct PairedStats {
  double mean = 0.0;
  double se = 0.0;
};

PairedStats paired(const std::vector<double>& diffs) {
  double m = 0.0;
  for (double d : diffs) m += d;
  m /= static_cast<double>(diffs.size());
  double ss = 0.0;
  for (double d : diffs) ss += (d - m) * (d - m);
  return {m, std::sqrt(ss / static_cast<double>(diffs.size() - 1)) / std::sqrt(static_cast<double>(diffs.size()))};
}

// The loss is divided by the whole pool, so target-only steps shrink by N0/|pool|. Enough steps
// per epoch that every epoch, the target-only first one included, reaches its own optimum.
TrainConfig train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = 2.0;
  cfg.epochs = 6;
  cfg.steps_per_epoch = 2000;
  cfg.ridge = 0.5;
  cfg.seed = seed;
  return cfg;
}

// AC11: iterate-then-reweight beats target-only training, and the relevant source gets the
// larger weight; multi-task training helps both identical tasks.
Outcome ac11() {
  const ModelFamily fam = ModelFamily::softmax_regression(3, 3);
  std::vector<double> improvement;
  int ordered = 0, helped = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::vector<ToyTaskSpec> tasks{{0.0, 30, 2000}, {0.0, 1000, 0}, {4.0, 1000, 0}};
    const ToyProblem p = make_toy_problem(fam, 1.0, tasks, kSeed + s);
    const TrainConfig cfg = train_config(kSeed + s);
    const std::vector<Dataset> sources{p.train[1], p.train[2]};
    const std::vector<ParameterVector> params{pretrain_source(fam, p.train[1], cfg.ridge),
                                              pretrain_source(fam, p.train[2], cfg.ridge)};
    const TrainTrace uowq = train_multi_source(fam, p.train[0], sources, params, cfg, p.holdout[0]);
    const TrainTrace base = train_target_only(fam, p.train[0], cfg, p.holdout[0]);
    improvement.push_back(base.epochs.back().holdout_nll - uowq.epochs.back().holdout_nll);
    helped += improvement.back() > 0.0 ? 1 : 0;
    const auto& w = uowq.epochs.back().weights;
    ordered += w[0] > w[1] ? 1 : 0;
  }
  const PairedStats alg1 = paired(improvement);

  std::vector<double> task_gain[2];
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::vector<ToyTaskSpec> tasks{{0.0, 40, 2000}, {0.0, 40, 2000}};
    const ToyProblem p = make_toy_problem(fam, 1.0, tasks, kSeed + 100 + s);
    const TrainConfig cfg = train_config(kSeed + 100 + s);
    const auto joint = train_multi_task(fam, p.train, cfg, p.holdout);
    for (std::size_t k = 0; k < 2; ++k) {
      const TrainTrace alone = train_target_only(fam, p.train[k], cfg, p.holdout[k]);
      task_gain[k].push_back(alone.epochs.back().holdout_nll - joint[k].epochs.back().holdout_nll);
    }
  }
  const PairedStats t0 = paired(task_gain[0]);
  const PairedStats t1 = paired(task_gain[1]);
  const bool ok = alg1.mean > 3.0 * alg1.se && ordered >= 18 && t0.mean > 3.0 * t0.se && t1.mean > 3.0 * t1.se;
  return {ok, fmt("alg1 nll gain=%.4f(se %.4f) positive in %d/20, relevant>irrelevant in %d/20; alg2 gains task0=%.4f(se %.4f) "
                  "task1=%.4f(se %.4f)",
                  alg1.mean, alg1.se, helped, ordered, t0.mean, t0.se, t1.mean, t1.se)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every output file except timings.txt, keyed by file name.
std::vector<std::pair<std::string, std::string>> outputs(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name != "timings.txt") files.emplace_back(name, slurp(entry.path()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

// AC12: byte-identical reruns and thread-count invariance for every command.
Outcome ac12() {
  const fs::path dir = fs::temp_directory_path() / "uowq_acceptance_ac12";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const json ensemble = json::parse(R"({
    "target_theta": [0.2, 0.2, 0.2],
    "target_size": 1000,
    "sources": [{"regime_constant": 1.0, "budget": 1500, "direction_seed": 1},
                {"regime_constant": 3.0, "budget": 3000, "direction_seed": 2}]
  })");
  const json family = {{"name", "categorical"}, {"outcomes", 4}};
  const std::vector<std::pair<std::string, json>> runs{
      {"weights", {{"seed", 1}, {"family", family}, {"ensemble", ensemble}, {"weights", {{"diagnostic_fractions", {0.0, 0.5, 1.0}}}}}},
      {"simulate", {{"seed", 2}, {"family", family}, {"ensemble", ensemble}, {"simulate", {{"trials", 500}}}}},
      {"sweep",
       {{"seed", 3},
        {"family", family},
        {"ensemble", ensemble},
        {"sweeps", json::array({{{"axis", "weight"}, {"grid", {{"start", 0.0}, {"stop", 1.0}, {"step", 0.25}}}, {"trials", 300}},
                                {{"axis", "quantity"}, {"source", 1}, {"grid", {0, 1000, 3000}}, {"trials", 300}}})}}},
      {"verify",
       {{"seed", 4},
        {"family", family},
        {"ensemble", ensemble},
        {"verify", {{"theorems", {"L1-expectation", "T2-weights"}}, {"trials", 300}, {"random_plans", 200}, {"plan_trials", 50}}}}},
      {"train",
       {{"seed", 5},
        {"family", {{"name", "softmax_regression"}, {"features", 3}, {"classes", 3}}},
        {"train",
         {{"mode", "multi_source"},
          {"target", {{"size", 30}, {"holdout", 300}}},
          {"sources", json::array({{{"shift", 0.0}, {"size", 300}}, {{"shift", 4.0}, {"size", 300}}})},
          {"epochs", 5},
          {"steps_per_epoch", 5},
          {"ridge", 0.5}}}}}};

  int identical = 0, thread_invariant = 0;
  std::string failures;
  for (const auto& [command, cfg] : runs) {
    const fs::path cfg_path = dir / (command + ".json");
    std::ofstream(cfg_path) << cfg.dump(2);
    std::vector<fs::path> outs;
    for (const char* tag : {"a", "b", "t1", "t4"}) {
      const fs::path out = dir / (command + "_" + tag);
      std::string cmd = std::string(UOWQ_CLI_PATH) + " " + command + " --config " + cfg_path.string() + " --out " +
                        out.string() + " --gnuplot";
      if (std::string(tag) == "t1") cmd += " --threads 1";
      if (std::string(tag) == "t4") cmd += " --threads 4";
      cmd += " > /dev/null";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) failures += " " + command + ":exit" + std::to_string(rc);
      outs.push_back(out);
    }
    const auto a = outputs(outs[0]);
    if (!a.empty() && a == outputs(outs[1])) ++identical;
    else failures += " " + command + ":rerun-differs";
    if (!a.empty() && outputs(outs[2]) == outputs(outs[3]) && a == outputs(outs[2])) ++thread_invariant;
    else failures += " " + command + ":threads-differ";
  }
  const int n = static_cast<int>(runs.size());
  return {identical == n && thread_invariant == n && failures.empty(),
          fmt("byte-identical reruns %d/%d, --threads 1 vs 4 identical %d/%d", identical, n, thread_invariant, n) +
              failures};
}

}  // namespace

int main() {
  bool all = true;
  auto report = [&](const char* id, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.passed;
    std::cout << id << " " << (o.passed ? "PASS" : "FAIL") << " [" << fmt("%.1fs", seconds_since(start)) << "] "
              << o.detail << std::endl;
  };

  json t1;
  report("AC1", [&] { return ac1(t1); });
  report("AC2", [&] {
    if (t1.is_null()) return Outcome{false, "AC1 produced no sweep"};
    return ac2(t1);
  });
  report("AC3", ac3);
  report("AC4", ac4);
  report("AC5", ac5);
  report("AC6", ac6);
  report("AC7", ac7);
  report("AC8", ac8);
  report("AC9", ac9);
  report("AC10", ac10);
  report("AC11", ac11);
  report("AC12", ac12);
  std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << std::endl;
  return all ? 0 : 1;
}
