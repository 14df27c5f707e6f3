#include "uowq/ensemble.hpp"

#include "uowq/errors.hpp"

#include <cmath>
#include <string>

namespace uowq {

std::vector<ParameterVector> TaskEnsemble::source_thetas() const {
  std::vector<ParameterVector> out;
  out.reserve(sources.size());
  for (const auto& s : sources) out.push_back(s.theta);
  return out;
}

std::vector<std::size_t> TaskEnsemble::budgets() const {
  std::vector<std::size_t> out;
  out.reserve(sources.size());
  for (const auto& s : sources) out.push_back(s.budget);
  return out;
}

void TaskEnsemble::validate() const {
  if (sources.empty()) throw ArgumentError("ensemble needs at least one source");
  if (target_size == 0) throw ArgumentError("ensemble target needs N_0 >= 1");
  family.validate(target_theta);
  const double root_n0 = std::sqrt(static_cast<double>(target_size));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& s = sources[i];
    if (s.budget == 0) throw ArgumentError("source " + std::to_string(i) + " needs N_i >= 1");
    family.validate(s.theta);
    const double c = root_n0 * (s.theta - target_theta).norm();
    if (std::abs(c - s.regime_constant) > 1e-10 * std::max(1.0, c)) {
      throw ArgumentError("source " + std::to_string(i) + " regime constant does not match its parameters");
    }
  }
}

}  // namespace uowq
