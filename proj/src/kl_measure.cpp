#include "uowq/kl_measure.hpp"

#include "uowq/errors.hpp"
#include "uowq/fisher.hpp"
#include "uowq/parallel.hpp"
#include "uowq/weighted_mle.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace uowq {
namespace {

void check_plan_shape(const TaskEnsemble& ensemble, std::span<const double> weights,
                      std::span<const std::size_t> quantities) {
  if (weights.size() != ensemble.source_count() || quantities.size() != ensemble.source_count()) {
    throw ArgumentError("plan needs one weight and one quantity per source");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) throw ArgumentError("plan weights must be finite and >= 0");
    if (quantities[i] > ensemble.sources[i].budget) {
      throw ArgumentError("quantity for source " + std::to_string(i) + " exceeds its budget");
    }
  }
}

}  // namespace

double kl_exact(const ModelFamily& family, const ParameterVector& p, const ParameterVector& q) {
  family.validate(p);
  family.validate(q);
  switch (family.kind()) {
    case FamilyKind::categorical: {
      const Eigen::VectorXd pp = categorical_probabilities(p);
      const Eigen::VectorXd qq = categorical_probabilities(q);
      double kl = 0.0;
      for (Eigen::Index j = 0; j < pp.size(); ++j) {
        if (pp[j] <= 0.0) continue;
        if (qq[j] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += pp[j] * std::log(pp[j] / qq[j]);
      }
      return std::max(kl, 0.0);
    }
    case FamilyKind::gaussian_iso:
      return 0.5 * (p - q).squaredNorm();
    case FamilyKind::softmax_regression:
      break;
  }
  throw UnsupportedError("exact KL is available for categorical and gaussian_iso families only");
}

KlPrediction predict_kl_single(double n0, double n1, double w1, double t, int d) {
  KlPrediction out;
  const double denom = (n0 + w1 * n1) * (n0 + w1 * n1);
  out.variance_term = (n0 + w1 * w1 * n1) / denom;
  out.bias_term = w1 * w1 * n1 * n1 * t / denom;
  out.total = 0.5 * d * (out.variance_term + out.bias_term);
  return out;
}

KlPrediction predict_kl_multi(double n0, std::span<const double> budgets, std::span<const double> weights,
                              const Eigen::MatrixXd& qp_matrix, int d) {
  const auto k = static_cast<Eigen::Index>(budgets.size());
  if (static_cast<Eigen::Index>(weights.size()) != k || qp_matrix.rows() != k || qp_matrix.cols() != k) {
    throw ArgumentError("predict_kl_multi: budgets, weights and QP matrix sizes disagree");
  }
  Eigen::VectorXd b(k);
  for (Eigen::Index i = 0; i < k; ++i) b[i] = weights[static_cast<std::size_t>(i)] * budgets[static_cast<std::size_t>(i)];
  const double s = b.sum();
  KlPrediction out;
  const double denom = (n0 + s) * (n0 + s);
  out.variance_term = n0 / denom;
  if (s > 0.0) {
    const Eigen::VectorXd alpha = b / s;
    const double t = alpha.dot(qp_matrix * alpha);
    out.bias_term = s * s * t / denom;
  }
  out.total = 0.5 * d * (out.variance_term + out.bias_term);
  return out;
}

MonteCarloEstimate summarize(std::span<const double> values, std::uint64_t master_seed) {
  if (values.size() < 2) throw ArgumentError("Monte Carlo summary needs at least 2 trials");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sample_std = std::sqrt(ss / (n - 1.0));
  return {mean, sample_std / std::sqrt(n), values.size(), master_seed};
}

ParameterVector mc_trial_estimate(const TaskEnsemble& ensemble, std::span<const double> weights,
                                  std::span<const std::size_t> quantities, std::uint64_t master_seed,
                                  std::size_t trial) {
  const ModelFamily& family = ensemble.family;
  Rng target_rng = make_rng(master_seed, trial, 0);
  const SufficientStatistic target = draw_statistic(family, ensemble.target_theta, ensemble.target_size, target_rng);
  std::vector<SufficientStatistic> stats;
  std::vector<double> used_weights;
  for (std::size_t i = 0; i < ensemble.source_count(); ++i) {
    if (weights[i] == 0.0 || quantities[i] == 0) continue;
    Rng source_rng = make_rng(master_seed, trial, i + 1);
    stats.push_back(draw_statistic(family, ensemble.sources[i].theta, quantities[i], source_rng));
    used_weights.push_back(weights[i]);
  }
  return fit_from_statistics(family, target, stats, used_weights);
}

std::vector<ParameterVector> mc_estimates(const TaskEnsemble& ensemble, std::span<const double> weights,
                                          std::span<const std::size_t> quantities, std::size_t trials,
                                          std::uint64_t master_seed) {
  ensemble.validate();
  check_plan_shape(ensemble, weights, quantities);
  std::vector<ParameterVector> out(trials);
  parallel::for_each_index(trials, [&](std::size_t trial) {
    try {
      out[trial] = mc_trial_estimate(ensemble, weights, quantities, master_seed, trial);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("trial " + std::to_string(trial) + ": " + e.what(), e.last_iterate(), e.residual());
    }
  });
  return out;
}

MonteCarloEstimate mc_expected_kl(const TaskEnsemble& ensemble, std::span<const double> weights,
                                  std::span<const std::size_t> quantities, std::size_t trials,
                                  std::uint64_t master_seed) {
  if (trials < 2) throw ArgumentError("Monte Carlo needs at least 2 trials");
  ensemble.validate();
  check_plan_shape(ensemble, weights, quantities);
  std::vector<double> kl(trials);
  parallel::for_each_index(trials, [&](std::size_t trial) {
    const ParameterVector estimate = mc_trial_estimate(ensemble, weights, quantities, master_seed, trial);
    kl[trial] = kl_exact(ensemble.family, ensemble.target_theta, estimate);
  });
  return summarize(kl, master_seed);
}

BridgeComparison mse_kl_bridge(const ModelFamily& family, const ParameterVector& theta0,
                               std::span<const ParameterVector> estimates) {
  if (estimates.size() < 2) throw ArgumentError("KL/MSE bridge needs at least 2 estimates");
  const Eigen::MatrixXd j = analytic_fisher(family, theta0).dense();
  const Eigen::Index d = theta0.size();
  Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(d, d);
  double kl_sum = 0.0;
  for (const auto& est : estimates) {
    const Eigen::VectorXd delta = est - theta0;
    second_moment.noalias() += delta * delta.transpose();
    kl_sum += kl_exact(family, theta0, est);
  }
  const double n = static_cast<double>(estimates.size());
  second_moment /= n;
  return {kl_sum / n, 0.5 * (j * second_moment).trace()};
}

}  // namespace uowq
