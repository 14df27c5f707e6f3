#pragma once

// Oracle comparisons for the analytic results, each returning a pass/fail verdict together
// with every number that went into it.
//
//   T1-weight       Monte Carlo argmin of a weight sweep vs w* = 1/(1 + t N_1)
//   T1-quantity     decreasing KL in n_1 under w*(n_1); analytic slope vs finite differences
//   P1-dim          linear scaling of the KL in d at fixed t (gaussian_iso)
//   T2-weights      optimal plan vs random weight vectors, analytically and by Monte Carlo
//   L1-expectation  mean of the weighted MLE vs the weighted average of parameters
//   L2-bridge       E[KL] vs (1/2) tr(J E[(theta_hat - theta_0)(theta_hat - theta_0)^T])

#include "uowq/ensemble.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uowq {

struct VerifyOptions {
  std::size_t trials = 4000;
  std::uint64_t seed = 0;
  std::vector<double> weight_grid;           // T1-weight; default 0..2 step 0.05
  std::vector<std::size_t> quantity_grid;    // T1-quantity; default 10 points up to N_1
  std::vector<int> dims{1, 2, 4};            // P1-dim
  std::optional<double> weight;              // L1/L2 source weight; default w*
  std::size_t random_plans = 10'000;         // T2-weights
  std::size_t top_plans = 10;
  std::size_t plan_trials = 200;
  double max_random_weight = 3.0;
  int argmin_steps = 2;
  double sigma = 3.0;
  double relative_slack = 0.15;
  double bridge_tolerance = 0.10;
  double derivative_tolerance = 1e-6;
};

struct VerificationReport {
  std::string theorem;
  bool passed = false;
  nlohmann::json details;
};

const std::vector<std::string>& theorem_ids();

// Throws ArgumentError for an unknown id.
VerificationReport verify_theorem(const std::string& id, const TaskEnsemble& ensemble, const VerifyOptions& opts);

}  // namespace uowq
