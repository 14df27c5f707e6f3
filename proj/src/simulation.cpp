#include "uowq/simulation.hpp"

#include "uowq/errors.hpp"
#include "uowq/fisher.hpp"
#include "uowq/parallel.hpp"
#include "uowq/random.hpp"
#include "uowq/weighted_mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace uowq {
namespace {

constexpr int kDirectionRetries = 100;

void require_source(const TaskEnsemble& ensemble, std::size_t source) {
  if (source >= ensemble.source_count()) {
    throw ArgumentError("source index " + std::to_string(source) + " out of range");
  }
}

template <class T>
void require_increasing(std::span<const T> grid, const char* what) {
  if (grid.empty()) throw ArgumentError(std::string(what) + " grid is empty");
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (!(grid[g] > grid[g - 1])) throw ArgumentError(std::string(what) + " grid must be strictly increasing");
  }
}

std::size_t argmin_of(const std::vector<double>& values) {
  return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
}

void accumulate(SufficientStatistic& into, const SufficientStatistic& add) {
  if (into.sum.size() == 0) into.sum = Eigen::VectorXd::Zero(add.sum.size());
  into.count += add.count;
  into.sum += add.sum;
}

// Turns a trials x points table of KL values into per-point summaries and argmins.
void fill_summaries(SweepResult& result, const std::vector<double>& table, std::size_t trials, std::uint64_t seed) {
  const std::size_t points = result.points.size();
  std::vector<double> column(trials);
  std::vector<double> mc_means(points);
  std::vector<double> predicted(points);
  for (std::size_t g = 0; g < points; ++g) {
    for (std::size_t r = 0; r < trials; ++r) column[r] = table[r * points + g];
    result.points[g].mc = summarize(column, seed);
    mc_means[g] = result.points[g].mc.mean;
    predicted[g] = result.points[g].predicted;
  }
  result.mc_argmin = argmin_of(mc_means);
  result.predicted_argmin = argmin_of(predicted);
}

}  // namespace

TaskEnsemble generate_ensemble(const ModelFamily& family, const ParameterVector& target_theta,
                               std::size_t target_size, std::span<const SourceSpec> specs,
                               std::uint64_t master_seed) {
  if (specs.empty()) throw ArgumentError("ensemble needs at least one source spec");
  if (target_size == 0) throw ArgumentError("ensemble target needs N_0 >= 1");
  family.validate(target_theta);
  if (!family.is_interior(target_theta)) throw ParameterError("target parameter must lie in the interior");

  TaskEnsemble ensemble{family, target_theta, target_size, {}};
  const double root_n0 = std::sqrt(static_cast<double>(target_size));
  const Eigen::Index d = target_theta.size();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const SourceSpec& spec = specs[i];
    if (!std::isfinite(spec.regime_constant) || spec.regime_constant < 0.0) {
      throw ArgumentError("regime constant of source " + std::to_string(i) + " must be finite and >= 0");
    }
    if (spec.budget == 0) throw ArgumentError("source " + std::to_string(i) + " needs N_i >= 1");
    ParameterVector theta = target_theta;
    if (spec.regime_constant > 0.0) {
      const double radius = spec.regime_constant / root_n0;
      bool placed = false;
      for (int attempt = 0; attempt < kDirectionRetries && !placed; ++attempt) {
        Rng rng = make_rng(master_seed, spec.direction_seed, static_cast<std::uint64_t>(attempt));
        std::normal_distribution<double> normal;
        Eigen::VectorXd u(d);
        for (Eigen::Index k = 0; k < d; ++k) u[k] = normal(rng);
        if (u.norm() == 0.0) continue;
        theta = target_theta + radius * u.normalized();
        placed = family.is_interior(theta);
      }
      if (!placed) {
        throw RegimeError("could not place source " + std::to_string(i) + " at distance " + std::to_string(radius) +
                          " inside the parameter region after 100 draws");
      }
    }
    const double c = root_n0 * (theta - target_theta).norm();
    ensemble.sources.push_back({std::move(theta), spec.budget, c});
  }
  return ensemble;
}

Eigen::MatrixXd ensemble_gram(const TaskEnsemble& ensemble) {
  const FisherOperator j = analytic_fisher(ensemble.family, ensemble.target_theta);
  const auto thetas = ensemble.source_thetas();
  return j.projected(DirectionMatrix::from_parameters(ensemble.target_theta, thetas));
}

QpMatrix ensemble_qp_matrix(const TaskEnsemble& ensemble) {
  const auto budgets = ensemble.budgets();
  return qp_matrix_from_gram(ensemble_gram(ensemble), budgets, ensemble.family.dimension());
}

double source_discrepancy(const TaskEnsemble& ensemble, std::size_t source) {
  require_source(ensemble, source);
  const FisherOperator j = analytic_fisher(ensemble.family, ensemble.target_theta);
  const Eigen::VectorXd delta = ensemble.sources[source].theta - ensemble.target_theta;
  return j.quadratic_form(delta) / static_cast<double>(ensemble.family.dimension());
}

double predict_plan_kl(const TaskEnsemble& ensemble, std::span<const double> weights,
                       std::span<const std::size_t> quantities) {
  const std::size_t k = ensemble.source_count();
  if (weights.size() != k || quantities.size() != k) throw ArgumentError("plan needs one weight and quantity per source");
  const int d = ensemble.family.dimension();
  const double n0 = static_cast<double>(ensemble.target_size);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < k; ++i) {
    if (weights[i] > 0.0 && quantities[i] > 0) active.push_back(i);
  }
  if (active.empty()) return 0.5 * d / n0;
  const Eigen::MatrixXd gram = ensemble_gram(ensemble);
  const auto a = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd m(a, a);
  std::vector<double> n(active.size());
  std::vector<double> w(active.size());
  for (Eigen::Index r = 0; r < a; ++r) {
    const std::size_t i = active[static_cast<std::size_t>(r)];
    n[static_cast<std::size_t>(r)] = static_cast<double>(quantities[i]);
    w[static_cast<std::size_t>(r)] = weights[i];
    for (Eigen::Index c = 0; c < a; ++c) {
      m(r, c) = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(active[static_cast<std::size_t>(c)])) / d;
    }
    m(r, r) += 1.0 / n[static_cast<std::size_t>(r)];
  }
  return predict_kl_multi(n0, n, w, m, d).total;
}

SweepResult sweep_weight(const TaskEnsemble& ensemble, std::size_t source, std::span<const double> grid,
                         std::size_t trials, std::uint64_t seed, std::span<const double> pinned) {
  ensemble.validate();
  require_source(ensemble, source);
  require_increasing(grid, "weight");
  if (trials < 2) throw ArgumentError("a sweep needs at least 2 trials");
  if (grid.front() < 0.0 || !std::isfinite(grid.back())) throw ArgumentError("weights must be finite and >= 0");
  const std::size_t k = ensemble.source_count();
  std::vector<double> base(k, 0.0);
  if (!pinned.empty()) {
    if (pinned.size() != k) throw ArgumentError("pinned weights need one entry per source");
    base.assign(pinned.begin(), pinned.end());
  }
  base[source] = 0.0;
  for (double w : base) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("pinned weights must be finite and >= 0");
  }
  const bool single = std::all_of(base.begin(), base.end(), [](double w) { return w == 0.0; });
  const auto budgets = ensemble.budgets();
  const int d = ensemble.family.dimension();
  const double n0 = static_cast<double>(ensemble.target_size);
  const double t = source_discrepancy(ensemble, source);

  SweepResult result;
  result.axis = "weight";
  for (double w : grid) {
    std::vector<double> plan = base;
    plan[source] = w;
    const double predicted = single ? predict_kl_single(n0, static_cast<double>(budgets[source]), w, t, d).total
                                    : predict_plan_kl(ensemble, plan, budgets);
    result.points.push_back({w, w, {}, predicted});
  }

  const std::size_t points = grid.size();
  std::vector<double> table(trials * points);
  parallel::for_each_index(trials, [&](std::size_t trial) {
    Rng target_rng = make_rng(seed, trial, 0);
    const SufficientStatistic target = draw_statistic(ensemble.family, ensemble.target_theta, ensemble.target_size, target_rng);
    std::vector<SufficientStatistic> stats(k);
    for (std::size_t i = 0; i < k; ++i) {
      if (i != source && base[i] == 0.0) continue;
      Rng source_rng = make_rng(seed, trial, i + 1);
      stats[i] = draw_statistic(ensemble.family, ensemble.sources[i].theta, budgets[i], source_rng);
    }
    std::vector<double> plan = base;
    for (std::size_t g = 0; g < points; ++g) {
      plan[source] = grid[g];
      const ParameterVector estimate = fit_from_statistics(ensemble.family, target, stats, plan);
      table[trial * points + g] = kl_exact(ensemble.family, ensemble.target_theta, estimate);
    }
  });
  fill_summaries(result, table, trials, seed);
  return result;
}

SweepResult sweep_quantity(const TaskEnsemble& ensemble, std::size_t source, std::span<const std::size_t> grid,
                           WeightRule rule, std::size_t trials, std::uint64_t seed) {
  ensemble.validate();
  require_source(ensemble, source);
  require_increasing(grid, "quantity");
  if (trials < 2) throw ArgumentError("a sweep needs at least 2 trials");
  const std::size_t budget = ensemble.sources[source].budget;
  if (grid.back() > budget) throw ArgumentError("quantity grid exceeds the source budget");
  if (rule.kind == WeightRule::Kind::fixed && (!(rule.weight >= 0.0) || !std::isfinite(rule.weight))) {
    throw ArgumentError("fixed weight must be finite and >= 0");
  }
  const int d = ensemble.family.dimension();
  const double n0 = static_cast<double>(ensemble.target_size);
  const double t = source_discrepancy(ensemble, source);
  const std::size_t k = ensemble.source_count();

  SweepResult result;
  result.axis = "quantity";
  for (std::size_t n : grid) {
    const double nn = static_cast<double>(n);
    double w = rule.weight;
    if (rule.kind == WeightRule::Kind::optimal) w = n > 0 ? single_source_weight(t, nn) : 0.0;
    result.points.push_back({nn, w, {}, predict_kl_single(n0, nn, w, t, d).total});
  }

  const std::size_t points = grid.size();
  std::vector<double> table(trials * points);
  parallel::for_each_index(trials, [&](std::size_t trial) {
    Rng target_rng = make_rng(seed, trial, 0);
    const SufficientStatistic target = draw_statistic(ensemble.family, ensemble.target_theta, ensemble.target_size, target_rng);
    Rng source_rng = make_rng(seed, trial, source + 1);
    std::vector<SufficientStatistic> stats(k);
    std::vector<double> plan(k, 0.0);
    std::size_t drawn = 0;
    for (std::size_t g = 0; g < points; ++g) {
      accumulate(stats[source], draw_statistic(ensemble.family, ensemble.sources[source].theta, grid[g] - drawn, source_rng));
      drawn = grid[g];
      plan[source] = result.points[g].weight;
      const ParameterVector estimate = fit_from_statistics(ensemble.family, target, stats, plan);
      table[trial * points + g] = kl_exact(ensemble.family, ensemble.target_theta, estimate);
    }
  });
  fill_summaries(result, table, trials, seed);
  return result;
}

SimplexGridResult brute_force_simplex(const Eigen::MatrixXd& m, double step) {
  const Eigen::Index k = m.rows();
  if (k == 0 || m.cols() != k) throw ArgumentError("brute-force simplex needs a square non-empty matrix");
  if (k > 4) throw ScaleError("brute-force simplex is limited to K <= 4");
  if (!(step > 0.0 && step <= 0.1)) throw ArgumentError("lattice step must lie in (0, 0.1]");
  const long long total = std::llround(1.0 / step);
  if (k >= 3 && std::pow(static_cast<double>(total + 1), static_cast<double>(k - 2)) > 1e8) {
    throw ScaleError("lattice too fine for brute-force enumeration");
  }
  const double s = static_cast<double>(total);

  SimplexGridResult best;
  best.objective = std::numeric_limits<double>::infinity();
  if (k == 1) {
    best.alpha = Eigen::VectorXd::Ones(1);
    best.objective = m(0, 0);
    return best;
  }

  // Enumerate the first K-2 lattice coordinates; the last two (x, r - x) give a convex
  // quadratic in x whose lattice minimum is at the floor or ceiling of its real minimizer.
  const Eigen::Index free = k - 2;
  std::vector<long long> prefix(static_cast<std::size_t>(free), 0);
  Eigen::VectorXd u(k);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  v[k - 2] = 1.0;
  v[k - 1] = -1.0;
  const Eigen::VectorXd mv = m * v;
  const double vmv = v.dot(mv);
  Eigen::VectorXd candidate(k);

  auto evaluate_prefix = [&](long long used) {
    const long long r = total - used;
    for (Eigen::Index i = 0; i < free; ++i) u[i] = static_cast<double>(prefix[static_cast<std::size_t>(i)]);
    u[k - 2] = 0.0;
    u[k - 1] = static_cast<double>(r);
    const double umu = u.dot(m * u);
    const double vmu = mv.dot(u);
    // Flat direction: the quadratic is linear in x, so an endpoint is optimal.
    long long options[2] = {0, r};
    if (vmv > 0.0) {
      const double x = std::clamp(-vmu / vmv, 0.0, static_cast<double>(r));
      options[0] = static_cast<long long>(std::floor(x));
      options[1] = std::min(r, options[0] + 1);
    }
    for (long long option : options) {
      const double x = static_cast<double>(option);
      const double value = (umu + 2.0 * x * vmu + x * x * vmv) / (s * s);
      if (value < best.objective) {
        best.objective = value;
        candidate = u + x * v;
        best.alpha = candidate / s;
      }
    }
  };

  // Odometer over prefixes with sum <= total.
  for (;;) {
    long long used = 0;
    for (long long p : prefix) used += p;
    evaluate_prefix(used);
    Eigen::Index pos = free - 1;
    while (pos >= 0) {
      auto& slot = prefix[static_cast<std::size_t>(pos)];
      ++slot;
      long long sum = 0;
      for (long long p : prefix) sum += p;
      if (sum <= total) break;
      slot = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  best.objective = best.alpha.dot(m * best.alpha);
  return best;
}

}  // namespace uowq
