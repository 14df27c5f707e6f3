#pragma once

#include "uowq/model_zoo.hpp"

#include <cstddef>
#include <vector>

namespace uowq {

struct SourceTask {
  ParameterVector theta;
  std::size_t budget = 0;
  // sqrt(N_0) * ||theta - theta_0||.
  double regime_constant = 0.0;
};

// One target task (theta_0, N_0) and K source tasks (theta_i, N_i) of a common family.
struct TaskEnsemble {
  ModelFamily family;
  ParameterVector target_theta;
  std::size_t target_size = 0;
  std::vector<SourceTask> sources;

  std::size_t source_count() const noexcept { return sources.size(); }
  std::vector<ParameterVector> source_thetas() const;
  std::vector<std::size_t> budgets() const;
  // Throws ArgumentError when K = 0, a size is zero, parameters are invalid, or a recorded
  // regime constant disagrees with the parameters by more than 1e-10.
  void validate() const;
};

}  // namespace uowq
