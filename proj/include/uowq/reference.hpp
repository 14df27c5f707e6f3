#pragma once

// Serial versions of the OpenMP kernels. They accumulate in plain index order and exist to
// check the parallel code paths and to serve as the benchmark baseline.

#include "uowq/ensemble.hpp"
#include "uowq/fisher.hpp"
#include "uowq/kl_measure.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace uowq::reference {

Eigen::MatrixXd empirical_fisher(const ModelFamily& family, const ParameterVector& theta,
                                 std::span<const Sample> samples);

Eigen::MatrixXd projected_gram(const ModelFamily& family, const ParameterVector& theta,
                               std::span<const Sample> samples, const DirectionMatrix& directions);

MonteCarloEstimate mc_expected_kl(const TaskEnsemble& ensemble, std::span<const double> weights,
                                  std::span<const std::size_t> quantities, std::size_t trials,
                                  std::uint64_t master_seed);

}  // namespace uowq::reference
