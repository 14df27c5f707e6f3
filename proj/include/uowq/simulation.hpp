#pragma once

// Synthetic ensembles in the small-shift regime ||theta_i - theta_0|| = c_i / sqrt(N_0),
// seeded Monte Carlo sweeps, and brute-force oracles for the optimizer.

#include "uowq/ensemble.hpp"
#include "uowq/kl_measure.hpp"
#include "uowq/transfer_optimizer.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace uowq {

struct SourceSpec {
  double regime_constant = 0.0;
  std::size_t budget = 0;
  std::uint64_t direction_seed = 0;
};

// theta_i = theta_0 + (c_i / sqrt(N_0)) u_i with u_i uniform on the unit sphere. Directions
// that leave the interior of the parameter region are redrawn up to 100 times, after which a
// RegimeError is thrown.
TaskEnsemble generate_ensemble(const ModelFamily& family, const ParameterVector& target_theta,
                               std::size_t target_size, std::span<const SourceSpec> specs,
                               std::uint64_t master_seed);

// Theta^T J(theta_0) Theta with the analytic Fisher at the target.
Eigen::MatrixXd ensemble_gram(const TaskEnsemble& ensemble);
QpMatrix ensemble_qp_matrix(const TaskEnsemble& ensemble);
// Single-source discrepancy t_i = Delta_i^T J Delta_i / d.
double source_discrepancy(const TaskEnsemble& ensemble, std::size_t source);

// Predicted KL of an arbitrary (weights, quantities) plan; sources with w_i n_i = 0 drop out.
double predict_plan_kl(const TaskEnsemble& ensemble, std::span<const double> weights,
                       std::span<const std::size_t> quantities);

struct SweepPoint {
  double axis_value = 0.0;
  double weight = 0.0;
  MonteCarloEstimate mc;
  double predicted = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
  std::size_t mc_argmin = 0;
  std::size_t predicted_argmin = 0;
};

// Sweeps w_i over `grid` with full quantities. Other sources keep `pinned` weights (all zero
// when empty). Every grid point reuses the same per-trial data, so differences between points
// are not blurred by independent sampling noise.
SweepResult sweep_weight(const TaskEnsemble& ensemble, std::size_t source, std::span<const double> grid,
                         std::size_t trials, std::uint64_t seed, std::span<const double> pinned = {});

struct WeightRule {
  enum class Kind { fixed, optimal };
  Kind kind = Kind::optimal;
  double weight = 1.0;  // used by Kind::fixed
};

// Sweeps the quantity n_i of one source (other sources off). Within a trial the source data for
// a larger n extends the data for the smaller one.
SweepResult sweep_quantity(const TaskEnsemble& ensemble, std::size_t source, std::span<const std::size_t> grid,
                           WeightRule rule, std::size_t trials, std::uint64_t seed);

struct SimplexGridResult {
  Eigen::VectorXd alpha;
  double objective = 0.0;
};

// Exact minimum of a^T M a over the lattice { k / S : k in N^K, sum k = S }, S = round(1/step).
// K <= 4; larger K raises ScaleError.
SimplexGridResult brute_force_simplex(const Eigen::MatrixXd& m, double step);

}  // namespace uowq
