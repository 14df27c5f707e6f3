#pragma once

// Weighted maximum-likelihood estimation:
//
//   theta_hat = argmax  sum_{x in target} log P(x; theta) + sum_i w_i sum_{x in source_i} log P(x; theta)
//
// Closed forms exist for the categorical (weighted empirical mixture) and Gaussian (weighted
// mean) families; softmax regression is fitted by damped Newton or gradient ascent.

#include "uowq/model_zoo.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace uowq {

struct SourceBlock {
  std::vector<Sample> samples;
  double weight = 0.0;
  // Declared source budget N_i; samples.size() may not exceed it.
  std::optional<std::size_t> budget;
};

struct WeightedDataset {
  std::vector<Sample> target;
  std::vector<SourceBlock> sources;

  // Throws ArgumentError on an empty target, a negative or non-finite weight, or a block
  // larger than its budget.
  void validate() const;
  double total_weight() const;
};

enum class MleMethod { automatic, closed_form, iterative };

struct MleOptions {
  MleMethod method = MleMethod::automatic;
  // Bound on the gradient norm of the normalized objective (log-likelihood divided by the
  // total weight N_0 + sum_i w_i n_i).
  double tolerance = 1e-10;
  int max_iter = 10'000;
  // Adds -ridge * ||theta||^2 to the normalized objective.
  double ridge = 0.0;
  // Dimension above which Newton steps are replaced by gradient ascent.
  int newton_max_dim = 200;
  std::optional<ParameterVector> initial;
};

struct MleFit {
  ParameterVector theta;
  int iterations = 0;
  double gradient_norm = 0.0;
  MleMethod method = MleMethod::closed_form;
};

MleFit fit_weighted_mle(const ModelFamily& family, const WeightedDataset& data, const MleOptions& opts = {});

// Closed-form weighted MLE from sufficient statistics; the Monte Carlo paths use this.
// `source_weights` pairs with `sources` element-wise.
ParameterVector fit_from_statistics(const ModelFamily& family, const SufficientStatistic& target,
                                    std::span<const SufficientStatistic> sources,
                                    std::span<const double> source_weights);

// Normalized weighted objective, its gradient and Hessian at theta (ridge included).
struct WeightedObjective {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // empty unless requested
};
WeightedObjective evaluate_weighted_objective(const ModelFamily& family, const WeightedDataset& data,
                                              const ParameterVector& theta, double ridge, bool with_hessian);

// The estimator viewed as a plain MLE against the mixture
//   P_mix = N_0/(N_0 + sum w_i n_i) P_hat_target + sum_i w_i n_i/(N_0 + sum w_i n_i) P_hat_i.
struct MixtureDistribution {
  // Entry 0 is the target, entry i the i-th source block.
  Eigen::VectorXd component_weights;
  Eigen::VectorXd probabilities;
};

MixtureDistribution mixture_view(const ModelFamily& family, const WeightedDataset& data);

}  // namespace uowq
