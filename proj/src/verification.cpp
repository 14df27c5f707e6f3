#include "uowq/verification.hpp"

#include "uowq/errors.hpp"
#include "uowq/kl_measure.hpp"
#include "uowq/random.hpp"
#include "uowq/simulation.hpp"
#include "uowq/transfer_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace uowq {
namespace {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json ensemble_summary(const TaskEnsemble& e) {
  json sources = json::array();
  for (const auto& s : e.sources) {
    sources.push_back({{"theta", to_json(s.theta)}, {"budget", s.budget}, {"regime_constant", s.regime_constant}});
  }
  return {{"family", std::string(e.family.name())},
          {"target_theta", to_json(e.target_theta)},
          {"target_size", e.target_size},
          {"sources", sources}};
}

json sweep_json(const SweepResult& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"axis_value", p.axis_value},
                      {"weight", p.weight},
                      {"mc_mean", p.mc.mean},
                      {"mc_stderr", p.mc.std_error},
                      {"predicted", p.predicted}});
  }
  return {{"axis", r.axis}, {"points", points}, {"mc_argmin", r.mc_argmin}, {"predicted_argmin", r.predicted_argmin}};
}

std::vector<double> source_only_weights(const TaskEnsemble& e, double w) {
  std::vector<double> weights(e.source_count(), 0.0);
  weights[0] = w;
  return weights;
}

double optimal_single_weight(const TaskEnsemble& e) {
  return single_source_weight(source_discrepancy(e, 0), static_cast<double>(e.sources[0].budget));
}

VerificationReport verify_t1_weight(const TaskEnsemble& e, const VerifyOptions& cfg) {
  std::vector<double> grid = cfg.weight_grid;
  if (grid.empty()) {
    for (int i = 0; i <= 40; ++i) grid.push_back(0.05 * i);
  }
  const double t = source_discrepancy(e, 0);
  const double w_star = optimal_single_weight(e);
  const SweepResult sweep = sweep_weight(e, 0, grid, cfg.trials, cfg.seed);

  std::size_t nearest = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (std::abs(grid[g] - w_star) < std::abs(grid[nearest] - w_star)) nearest = g;
  }
  const auto distance = static_cast<long long>(sweep.mc_argmin) - static_cast<long long>(nearest);
  const bool argmin_ok = std::llabs(distance) <= cfg.argmin_steps;

  const auto budgets = e.budgets();
  const auto weights = source_only_weights(e, w_star);
  const MonteCarloEstimate at_opt = mc_expected_kl(e, weights, budgets, cfg.trials, cfg.seed);
  const double predicted = predict_kl_single(static_cast<double>(e.target_size), static_cast<double>(budgets[0]),
                                             w_star, t, e.family.dimension()).total;
  const double gap = std::abs(at_opt.mean - predicted);
  const bool fidelity_ok = gap <= cfg.sigma * at_opt.std_error + cfg.relative_slack * predicted;

  VerificationReport report{"T1-weight", argmin_ok && fidelity_ok, {}};
  report.details = {{"t", t},
                    {"w_star", w_star},
                    {"nearest_grid_index", nearest},
                    {"argmin_distance_steps", distance},
                    {"argmin_ok", argmin_ok},
                    {"at_optimum", {{"mc_mean", at_opt.mean}, {"mc_stderr", at_opt.std_error}, {"predicted", predicted},
                                    {"relative_gap", gap / predicted}, {"ok", fidelity_ok}}},
                    {"sweep", sweep_json(sweep)}};
  return report;
}

VerificationReport verify_t1_quantity(const TaskEnsemble& e, const VerifyOptions& cfg) {
  const std::size_t budget = e.sources[0].budget;
  std::vector<std::size_t> grid = cfg.quantity_grid;
  if (grid.empty()) {
    for (std::size_t i = 1; i <= 10; ++i) grid.push_back(std::max<std::size_t>(1, budget * i / 10));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  const double n0 = static_cast<double>(e.target_size);
  const int d = e.family.dimension();
  const double t = source_discrepancy(e, 0);
  const SweepResult sweep = sweep_quantity(e, 0, grid, {}, cfg.trials, cfg.seed);

  bool predicted_ok = true;
  bool mc_ok = true;
  for (std::size_t g = 1; g < sweep.points.size(); ++g) {
    const auto& prev = sweep.points[g - 1];
    const auto& cur = sweep.points[g];
    if (!(cur.predicted < prev.predicted)) predicted_ok = false;
    const double band = cfg.sigma * std::hypot(cur.mc.std_error, prev.mc.std_error);
    if (cur.mc.mean > prev.mc.mean + band) mc_ok = false;
  }

  auto composed = [&](double n) { return predict_kl_single(n0, n, single_source_weight(t, n), t, d).total; };
  json derivative = json::array();
  bool derivative_ok = true;
  for (std::size_t n : grid) {
    if (n == 0) continue;
    const double nn = static_cast<double>(n);
    const double h = std::max(1e-4 * nn, 1e-3);
    const double lo = std::max(1.0, nn - h);
    const double hi = nn + h;
    const double fd = (composed(hi) - composed(lo)) / (hi - lo);
    const double slope = predicted_kl_quantity_slope(n0, 0.5 * (hi + lo), t, d);
    const double value = composed(nn);
    const double closed_value = predicted_kl_at_optimal_weight(n0, nn, t, d);
    const double slope_err = std::abs(fd - slope) / std::abs(slope);
    const double value_err = std::abs(value - closed_value) / closed_value;
    const bool ok = slope < 0.0 && slope_err <= cfg.derivative_tolerance && value_err <= 1e-12;
    derivative_ok = derivative_ok && ok;
    derivative.push_back({{"n", n},
                          {"finite_difference", fd},
                          {"closed_form_slope", slope},
                          {"slope_relative_error", slope_err},
                          {"value", value},
                          {"closed_form_value", closed_value},
                          {"value_relative_error", value_err}});
  }

  VerificationReport report{"T1-quantity", predicted_ok && mc_ok && derivative_ok, {}};
  report.details = {{"t", t},
                    {"predicted_strictly_decreasing", predicted_ok},
                    {"mc_decreasing_within_band", mc_ok},
                    {"derivative_ok", derivative_ok},
                    {"derivative_checks", derivative},
                    {"sweep", sweep_json(sweep)}};
  return report;
}

VerificationReport verify_p1_dim(const TaskEnsemble& base, const VerifyOptions& cfg) {
  if (cfg.dims.empty()) throw ArgumentError("P1-dim needs at least one dimension");
  const std::size_t n0 = base.target_size;
  const std::size_t n1 = base.sources[0].budget;
  const double t = source_discrepancy(base, 0);
  const double w = cfg.weight.value_or(single_source_weight(t, static_cast<double>(n1)));

  struct Row {
    int d;
    double predicted;
    MonteCarloEstimate mc;
  };
  std::vector<Row> rows;
  for (int d : cfg.dims) {
    if (d < 1) throw ArgumentError("P1-dim dimensions must be >= 1");
    const ModelFamily family = ModelFamily::gaussian_iso(d);
    const double c = std::sqrt(t * d * static_cast<double>(n0));
    const SourceSpec spec{c, n1, static_cast<std::uint64_t>(d)};
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(d));
    const TaskEnsemble scaled = generate_ensemble(family, Eigen::VectorXd::Zero(d), n0, {&spec, 1}, seed);
    const std::vector<double> weights{w};
    const std::vector<std::size_t> quantities{n1};
    const double predicted = predict_kl_single(static_cast<double>(n0), static_cast<double>(n1), w,
                                               source_discrepancy(scaled, 0), d).total;
    rows.push_back({d, predicted, mc_expected_kl(scaled, weights, quantities, cfg.trials, seed)});
  }

  const Row& ref = rows.front();
  bool linear_ok = true;
  bool mc_ok = true;
  json table = json::array();
  for (const Row& r : rows) {
    const double scale = static_cast<double>(r.d) / ref.d;
    const double linear_err = std::abs(r.predicted - scale * ref.predicted) / (scale * ref.predicted);
    const double ratio_gap = std::abs(r.mc.mean / scale - ref.mc.mean);
    const double band = cfg.sigma * std::hypot(r.mc.std_error / scale, ref.mc.std_error);
    linear_ok = linear_ok && linear_err <= 1e-12;
    mc_ok = mc_ok && ratio_gap <= band;
    table.push_back({{"d", r.d},
                     {"predicted", r.predicted},
                     {"predicted_per_dim", r.predicted / r.d},
                     {"linear_relative_error", linear_err},
                     {"mc_mean", r.mc.mean},
                     {"mc_stderr", r.mc.std_error},
                     {"mc_per_dim", r.mc.mean / r.d},
                     {"mc_scaled_gap", ratio_gap},
                     {"band", band}});
  }
  VerificationReport report{"P1-dim", linear_ok && mc_ok, {}};
  report.details = {{"t", t}, {"weight", w}, {"predicted_linear", linear_ok}, {"mc_ratios_ok", mc_ok}, {"rows", table}};
  return report;
}

VerificationReport verify_t2_weights(const TaskEnsemble& e, const VerifyOptions& cfg) {
  const std::size_t k = e.source_count();
  const auto budgets = e.budgets();
  const QpMatrix m = ensemble_qp_matrix(e);
  const TransferPlan plan = optimal_plan(m, static_cast<double>(e.target_size));
  const std::vector<double> plan_weights(plan.weights.data(), plan.weights.data() + plan.weights.size());
  const double plan_predicted = predict_plan_kl(e, plan_weights, budgets);

  Rng rng = make_rng(derive_seed(cfg.seed, ~std::uint64_t{0}));
  std::uniform_real_distribution<double> uniform(0.0, cfg.max_random_weight);
  std::vector<std::vector<double>> random(cfg.random_plans, std::vector<double>(k));
  std::vector<double> random_predicted(cfg.random_plans);
  for (std::size_t r = 0; r < cfg.random_plans; ++r) {
    for (auto& w : random[r]) w = uniform(rng);
    random_predicted[r] = predict_plan_kl(e, random[r], budgets);
  }
  const double best_random = cfg.random_plans ? *std::min_element(random_predicted.begin(), random_predicted.end())
                                              : plan_predicted;
  const bool analytic_ok = plan_predicted <= best_random * (1.0 + 1e-12);

  std::vector<std::size_t> order(cfg.random_plans);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t top = std::min(cfg.top_plans, cfg.random_plans);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return random_predicted[a] < random_predicted[b]; });

  const MonteCarloEstimate plan_mc = mc_expected_kl(e, plan_weights, budgets, cfg.trials, cfg.seed);
  bool mc_ok = true;
  json comparisons = json::array();
  for (std::size_t j = 0; j < top; ++j) {
    const auto& w = random[order[j]];
    const MonteCarloEstimate mc = mc_expected_kl(e, w, budgets, cfg.plan_trials, cfg.seed);
    const double band = cfg.sigma * std::hypot(plan_mc.std_error, mc.std_error);
    const bool ok = plan_mc.mean <= mc.mean + band;
    mc_ok = mc_ok && ok;
    comparisons.push_back({{"weights", w},
                           {"predicted", random_predicted[order[j]]},
                           {"mc_mean", mc.mean},
                           {"mc_stderr", mc.std_error},
                           {"band", band},
                           {"ok", ok}});
  }

  VerificationReport report{"T2-weights", analytic_ok && mc_ok, {}};
  report.details = {{"plan",
                     {{"alpha", to_json(plan.alpha)},
                      {"weights", plan_weights},
                      {"s", plan.s},
                      {"t", plan.t},
                      {"predicted", plan_predicted},
                      {"mc_mean", plan_mc.mean},
                      {"mc_stderr", plan_mc.std_error}}},
                    {"best_random_predicted", best_random},
                    {"random_plans", cfg.random_plans},
                    {"analytic_ok", analytic_ok},
                    {"mc_ok", mc_ok},
                    {"top_random", comparisons}};
  return report;
}

VerificationReport verify_l1(const TaskEnsemble& e, const VerifyOptions& cfg) {
  const double w = cfg.weight.value_or(optimal_single_weight(e));
  const auto budgets = e.budgets();
  const auto estimates = mc_estimates(e, source_only_weights(e, w), budgets, cfg.trials, cfg.seed);
  const double n0 = static_cast<double>(e.target_size);
  const double wn = w * static_cast<double>(budgets[0]);
  const Eigen::VectorXd expected = (n0 * e.target_theta + wn * e.sources[0].theta) / (n0 + wn);

  const Eigen::Index d = e.target_theta.size();
  const double trials = static_cast<double>(estimates.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& est : estimates) mean += est;
  mean /= trials;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& est : estimates) var += (est - mean).cwiseAbs2();
  const Eigen::VectorXd se = (var / (trials - 1.0)).cwiseSqrt() / std::sqrt(trials);
  bool ok = true;
  for (Eigen::Index i = 0; i < d; ++i) ok = ok && std::abs(mean[i] - expected[i]) <= cfg.sigma * se[i];

  VerificationReport report{"L1-expectation", ok, {}};
  report.details = {{"weight", w}, {"mean", to_json(mean)}, {"stderr", to_json(se)}, {"expected", to_json(expected)}};
  return report;
}

VerificationReport verify_l2(const TaskEnsemble& e, const VerifyOptions& cfg) {
  const double w = cfg.weight.value_or(optimal_single_weight(e));
  const auto estimates = mc_estimates(e, source_only_weights(e, w), e.budgets(), cfg.trials, cfg.seed);
  const BridgeComparison bridge = mse_kl_bridge(e.family, e.target_theta, estimates);
  const double rel = std::abs(bridge.lhs - bridge.rhs) / bridge.rhs;
  VerificationReport report{"L2-bridge", rel <= cfg.bridge_tolerance, {}};
  report.details = {{"weight", w}, {"mean_kl", bridge.lhs}, {"half_trace_j_mse", bridge.rhs}, {"relative_gap", rel}};
  return report;
}

}  // namespace

const std::vector<std::string>& theorem_ids() {
  static const std::vector<std::string> ids{"T1-weight", "T1-quantity", "P1-dim", "T2-weights", "L1-expectation", "L2-bridge"};
  return ids;
}

VerificationReport verify_theorem(const std::string& id, const TaskEnsemble& e, const VerifyOptions& cfg) {
  e.validate();
  if (cfg.trials < 2) throw ArgumentError("verification needs at least 2 trials");
  VerificationReport report;
  if (id == "T1-weight") {
    report = verify_t1_weight(e, cfg);
  } else if (id == "T1-quantity") {
    report = verify_t1_quantity(e, cfg);
  } else if (id == "P1-dim") {
    report = verify_p1_dim(e, cfg);
  } else if (id == "T2-weights") {
    report = verify_t2_weights(e, cfg);
  } else if (id == "L1-expectation") {
    report = verify_l1(e, cfg);
  } else if (id == "L2-bridge") {
    report = verify_l2(e, cfg);
  } else {
    throw ArgumentError("unknown theorem id '" + id + "'");
  }
  report.details["ensemble"] = ensemble_summary(e);
  report.details["trials"] = cfg.trials;
  report.details["seed"] = cfg.seed;
  return report;
}

}  // namespace uowq
