#pragma once

// The generalization measure E[ D(P_theta0 || P_theta_hat) ]: exact KL for closed-form
// families, Monte Carlo over repeated estimation, and the asymptotic predictions.

#include "uowq/ensemble.hpp"
#include "uowq/model_zoo.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace uowq {

// Asymptotic KL split into its variance and bias parts; total = (d/2)(variance + bias).
struct KlPrediction {
  double variance_term = 0.0;
  double bias_term = 0.0;
  double total = 0.0;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
};

double kl_exact(const ModelFamily& family, const ParameterVector& p, const ParameterVector& q);

// Single source with n_1 samples at weight w_1 and discrepancy t = Delta^T J Delta / d:
//   (d/2) [ (N0 + w^2 n) / (N0 + w n)^2  +  w^2 n^2 t / (N0 + w n)^2 ].
KlPrediction predict_kl_single(double n0, double n1, double w1, double t, int d);

// K sources with budgets N_i, weights w_i and QP matrix M:
//   b_i = w_i N_i, s = sum b_i, alpha = b / s, t = alpha^T M alpha,
//   total = (d/2) [ N0 / (N0 + s)^2 + s^2 t / (N0 + s)^2 ].
// At s = 0 the bias term is defined as 0.
KlPrediction predict_kl_multi(double n0, std::span<const double> budgets, std::span<const double> weights,
                              const Eigen::MatrixXd& qp_matrix, int d);

// Mean and standard error of a list of per-trial values (fixed summation order).
MonteCarloEstimate summarize(std::span<const double> values, std::uint64_t master_seed);

// Per trial: fresh target and source data, weighted MLE, KL(theta_0 || theta_hat).
// Trial i uses streams derived from (master_seed, i), so the result does not depend on
// how trials are scheduled across threads.
std::vector<ParameterVector> mc_estimates(const TaskEnsemble& ensemble, std::span<const double> weights,
                                          std::span<const std::size_t> quantities, std::size_t trials,
                                          std::uint64_t master_seed);

MonteCarloEstimate mc_expected_kl(const TaskEnsemble& ensemble, std::span<const double> weights,
                                  std::span<const std::size_t> quantities, std::size_t trials,
                                  std::uint64_t master_seed);

// Estimate of trial `trial`: the kernel shared by the parallel and reference loops.
ParameterVector mc_trial_estimate(const TaskEnsemble& ensemble, std::span<const double> weights,
                                  std::span<const std::size_t> quantities, std::uint64_t master_seed,
                                  std::size_t trial);

struct BridgeComparison {
  double lhs = 0.0;  // mean KL(theta_0 || theta_hat)
  double rhs = 0.0;  // (1/2) tr(J(theta_0) C), C the second moment of theta_hat - theta_0
};

BridgeComparison mse_kl_bridge(const ModelFamily& family, const ParameterVector& theta0,
                               std::span<const ParameterVector> estimates);

}  // namespace uowq
