#pragma once

// Iterate-then-reweight training for softmax regression.
//
// Multi-source: epoch 1 trains on target data only (all source weights start at zero); from
// then on, every `weight_update_period` epochs the plan (alpha*, s*, w*) is recomputed from the
// current target parameters, Theta = [theta_k - theta_0] and the empirical Fisher over the
// target data.
//
// Multi-task: every task is both a target and a source; tasks are updated round-robin, each
// with its own cross-task weights.
//
// The training objective for target T and sources k is
//   ( sum_T nll + sum_k w_k sum_{S_k} nll + ridge ||theta||^2 ) / (|T| + sum_k |S_k|),
// i.e. normalized by the unweighted pooled count. The normalization only rescales the step.

#include "uowq/model_zoo.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace uowq {

using Dataset = std::vector<Sample>;

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 30;
  int weight_update_period = 1;
  int steps_per_epoch = 1;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  // Standard deviation of the Gaussian initial parameters (0: start at zero).
  double init_scale = 0.0;
  // Training stops once an epoch moves theta by at most this much.
  double stop_tolerance = 1e-8;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  std::vector<double> weights;
  double grad_norm = 0.0;
  double holdout_nll = 0.0;
  double holdout_accuracy = 0.0;
  // Plan behind `weights`; empty alpha until the first recomputation.
  std::vector<double> alpha;
  double s = 0.0;
  double t = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  ParameterVector theta;
  std::string stop_reason;  // "epochs" or "converged"
};

struct WeightedBlock {
  std::span<const Sample> samples;
  double weight = 0.0;
};

// (sum_target nll + sum_k w_k sum_k nll) / (|target| + sum_k |block_k|).
double weighted_loss(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> target,
                     std::span<const WeightedBlock> sources);
// Gradient of weighted_loss with respect to theta.
Eigen::VectorXd weighted_loss_gradient(const ModelFamily& family, const ParameterVector& theta,
                                       std::span<const Sample> target, std::span<const WeightedBlock> sources);

double mean_nll(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> data);
double accuracy(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> data);

// Ridge-penalized MLE of a source model on its full dataset (penalty ridge ||theta||^2 on the
// summed log-likelihood).
ParameterVector pretrain_source(const ModelFamily& family, std::span<const Sample> data, double ridge);

TrainTrace train_multi_source(const ModelFamily& family, std::span<const Sample> target,
                              std::span<const Dataset> sources, std::span<const ParameterVector> source_params,
                              const TrainConfig& cfg, std::span<const Sample> holdout = {});

// Baseline: the same loop with no source data at all.
TrainTrace train_target_only(const ModelFamily& family, std::span<const Sample> target, const TrainConfig& cfg,
                             std::span<const Sample> holdout = {});

// One trace per task; trace k's weights list the other tasks in index order. `holdouts` is
// either empty or has one entry per task.
std::vector<TrainTrace> train_multi_task(const ModelFamily& family, std::span<const Dataset> datasets,
                                         const TrainConfig& cfg, std::span<const Dataset> holdouts = {});

// Synthetic softmax-regression tasks: a base parameter with N(0, theta_scale^2) entries, task k
// at base + shift_k u_k with u_k uniform on the unit sphere of class-centered directions, and independent train and
// holdout sets per task. The result is a pure function of the arguments.
struct ToyTaskSpec {
  double shift = 0.0;
  std::size_t size = 0;
  std::size_t holdout = 0;
};

struct ToyProblem {
  ParameterVector base_theta;
  std::vector<ParameterVector> thetas;
  std::vector<Dataset> train;
  std::vector<Dataset> holdout;
};

ToyProblem make_toy_problem(const ModelFamily& family, double theta_scale, std::span<const ToyTaskSpec> tasks,
                            std::uint64_t seed);

// Labeled data for softmax regression: features (x, 1) with x ~ N(0, I_{p-1}) and the last
// coordinate a bias term, labels drawn from softmax(W z).
Dataset make_classification_data(const ModelFamily& family, const ParameterVector& theta, std::size_t n, Rng& rng);

}  // namespace uowq
