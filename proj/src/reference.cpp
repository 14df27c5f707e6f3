#include "uowq/reference.hpp"

#include "uowq/errors.hpp"

#include <vector>

namespace uowq::reference {

Eigen::MatrixXd empirical_fisher(const ModelFamily& family, const ParameterVector& theta,
                                 std::span<const Sample> samples) {
  if (samples.empty()) throw ArgumentError("empirical Fisher needs at least one sample");
  const int d = family.dimension();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : samples) {
    const Eigen::VectorXd g = score(family, theta, x);
    sum.noalias() += g * g.transpose();
  }
  return sum / static_cast<double>(samples.size());
}

Eigen::MatrixXd projected_gram(const ModelFamily& family, const ParameterVector& theta,
                               std::span<const Sample> samples, const DirectionMatrix& directions) {
  if (samples.empty()) throw ArgumentError("projected gram needs at least one sample");
  const auto& cols = directions.columns();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(cols.cols(), cols.cols());
  for (const auto& x : samples) {
    const Eigen::VectorXd p = cols.transpose() * score(family, theta, x);
    sum.noalias() += p * p.transpose();
  }
  return sum / static_cast<double>(samples.size());
}

MonteCarloEstimate mc_expected_kl(const TaskEnsemble& ensemble, std::span<const double> weights,
                                  std::span<const std::size_t> quantities, std::size_t trials,
                                  std::uint64_t master_seed) {
  ensemble.validate();
  if (weights.size() != ensemble.source_count() || quantities.size() != ensemble.source_count()) {
    throw ArgumentError("weights and quantities need one entry per source");
  }
  if (trials < 2) throw ArgumentError("Monte Carlo needs at least two trials");
  std::vector<double> kl(trials);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const ParameterVector estimate = mc_trial_estimate(ensemble, weights, quantities, master_seed, trial);
    kl[trial] = kl_exact(ensemble.family, ensemble.target_theta, estimate);
  }
  return summarize(kl, master_seed);
}

}  // namespace uowq::reference
