#include "uowq/weighted_mle.hpp"

#include "uowq/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace uowq {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A weighted sample list with zero-weight sources removed.
struct WeightedPool {
  std::vector<std::pair<const Sample*, double>> items;
  double total = 0.0;
};

WeightedPool pool_of(const WeightedDataset& data) {
  WeightedPool pool;
  for (const auto& x : data.target) pool.items.emplace_back(&x, 1.0);
  for (const auto& block : data.sources) {
    if (block.weight == 0.0) continue;
    for (const auto& x : block.samples) pool.items.emplace_back(&x, block.weight);
  }
  for (const auto& [x, w] : pool.items) pool.total += w;
  return pool;
}

// Weighted outcome counts (categorical) or weighted observation sum (Gaussian).
Eigen::VectorXd weighted_aggregate(const ModelFamily& family, const WeightedPool& pool) {
  const Eigen::Index size = family.kind() == FamilyKind::categorical ? family.outcomes() : family.dimension();
  Eigen::VectorXd agg = Eigen::VectorXd::Zero(size);
  for (const auto& [x, w] : pool.items) {
    if (!family.in_support(*x)) throw DomainError("sample outside the support of " + std::string(family.name()));
    if (family.kind() == FamilyKind::categorical) {
      agg[std::get<int>(*x)] += w;
    } else {
      agg += w * std::get<Eigen::VectorXd>(*x);
    }
  }
  return agg;
}

WeightedObjective categorical_objective(const ModelFamily& family, const Eigen::VectorXd& counts, double total,
                                        const ParameterVector& theta, double ridge, bool with_hessian) {
  WeightedObjective obj;
  const int d = family.dimension();
  obj.gradient = Eigen::VectorXd::Zero(d);
  if (!theta.allFinite() || theta.size() != d) {
    obj.value = kNegInf;
    return obj;
  }
  const Eigen::VectorXd p = categorical_probabilities(theta);
  double value = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (counts[j] == 0.0) continue;
    if (p[j] <= 0.0) {
      obj.value = kNegInf;
      return obj;
    }
    value += counts[j] * std::log(p[j]);
  }
  if (theta.minCoeff() < 0.0 || p[d] < 0.0) {
    obj.value = kNegInf;
    return obj;
  }
  obj.value = value / total - ridge * theta.squaredNorm();
  const double last = counts[d] > 0.0 ? counts[d] / p[d] : 0.0;
  for (int j = 0; j < d; ++j) {
    const double own = counts[j] > 0.0 ? counts[j] / p[j] : 0.0;
    obj.gradient[j] = (own - last) / total - 2.0 * ridge * theta[j];
  }
  if (with_hessian) {
    const double last2 = counts[d] > 0.0 ? counts[d] / (p[d] * p[d]) : 0.0;
    obj.hessian = Eigen::MatrixXd::Constant(d, d, -last2 / total);
    for (int j = 0; j < d; ++j) {
      const double own2 = counts[j] > 0.0 ? counts[j] / (p[j] * p[j]) : 0.0;
      obj.hessian(j, j) -= own2 / total + 2.0 * ridge;
    }
  }
  return obj;
}

WeightedObjective gaussian_objective(const Eigen::VectorXd& weighted_sum, double total, const ParameterVector& theta,
                                     double ridge, bool with_hessian) {
  // Up to an additive constant: -(1/2) ||theta - mean||^2 with mean = weighted_sum / total.
  WeightedObjective obj;
  const Eigen::VectorXd mean = weighted_sum / total;
  obj.value = -0.5 * (theta - mean).squaredNorm() - ridge * theta.squaredNorm();
  obj.gradient = mean - theta - 2.0 * ridge * theta;
  if (with_hessian) {
    obj.hessian = -(1.0 + 2.0 * ridge) * Eigen::MatrixXd::Identity(theta.size(), theta.size());
  }
  return obj;
}

WeightedObjective pooled_objective(const ModelFamily& family, const WeightedPool& pool, const ParameterVector& theta,
                                   double ridge, bool with_hessian) {
  WeightedObjective obj;
  const int d = family.dimension();
  obj.gradient = Eigen::VectorXd::Zero(d);
  if (with_hessian) obj.hessian = Eigen::MatrixXd::Zero(d, d);
  double value = 0.0;
  for (const auto& [x, w] : pool.items) {
    value += w * log_density(family, theta, *x);
    obj.gradient += w * score(family, theta, *x);
    if (with_hessian) obj.hessian += w * log_density_hessian(family, theta, *x);
  }
  obj.value = value / pool.total - ridge * theta.squaredNorm();
  obj.gradient = obj.gradient / pool.total - 2.0 * ridge * theta;
  if (with_hessian) {
    obj.hessian /= pool.total;
    obj.hessian.diagonal().array() -= 2.0 * ridge;
  }
  return obj;
}

class ObjectiveFn {
 public:
  ObjectiveFn(const ModelFamily& family, const WeightedDataset& data, double ridge)
      : family_(family), pool_(pool_of(data)), ridge_(ridge) {
    if (family.has_closed_form()) aggregate_ = weighted_aggregate(family, pool_);
  }

  WeightedObjective operator()(const ParameterVector& theta, bool with_hessian) const {
    switch (family_.kind()) {
      case FamilyKind::categorical:
        return categorical_objective(family_, aggregate_, pool_.total, theta, ridge_, with_hessian);
      case FamilyKind::gaussian_iso:
        return gaussian_objective(aggregate_, pool_.total, theta, ridge_, with_hessian);
      case FamilyKind::softmax_regression:
        return pooled_objective(family_, pool_, theta, ridge_, with_hessian);
    }
    return {};
  }

  double total() const { return pool_.total; }
  const Eigen::VectorXd& aggregate() const { return aggregate_; }

 private:
  const ModelFamily& family_;
  WeightedPool pool_;
  double ridge_;
  Eigen::VectorXd aggregate_;
};

ParameterVector default_start(const ModelFamily& family) {
  if (family.kind() == FamilyKind::categorical) {
    return ParameterVector::Constant(family.dimension(), 1.0 / family.outcomes());
  }
  return ParameterVector::Zero(family.dimension());
}

Eigen::VectorXd newton_direction(const WeightedObjective& obj) {
  // Solve (-H + mu I) delta = g, raising mu until the factorization is positive definite.
  const Eigen::Index d = obj.gradient.size();
  const Eigen::MatrixXd neg = -obj.hessian;
  double mu = 1e-12 * (1.0 + neg.diagonal().cwiseAbs().sum() / static_cast<double>(d));
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(neg + mu * Eigen::MatrixXd::Identity(d, d));
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd delta = llt.solve(obj.gradient);
      if (delta.allFinite()) return delta;
    }
    mu *= 10.0;
  }
  return obj.gradient;
}

MleFit iterate(const ModelFamily& family, const ObjectiveFn& f, const MleOptions& opts) {
  const bool newton = family.dimension() <= opts.newton_max_dim;
  ParameterVector theta = opts.initial ? *opts.initial : default_start(family);
  if (theta.size() != family.dimension()) throw ArgumentError("initial point has the wrong dimension");
  double ascent_step = 1.0;
  WeightedObjective obj = f(theta, newton);
  if (!std::isfinite(obj.value)) throw ArgumentError("initial point has non-finite objective");
  for (int it = 0; it < opts.max_iter; ++it) {
    const double gnorm = obj.gradient.norm();
    if (gnorm <= opts.tolerance) return {theta, it, gnorm, MleMethod::iterative};

    const Eigen::VectorXd direction = newton ? newton_direction(obj) : Eigen::VectorXd(obj.gradient);
    const double slope = obj.gradient.dot(direction);
    double step = newton ? 1.0 : ascent_step;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt, step *= 0.5) {
      const ParameterVector trial = theta + step * direction;
      WeightedObjective next = f(trial, newton);
      if (!std::isfinite(next.value)) continue;
      const bool armijo = next.value >= obj.value + 1e-4 * step * slope;
      // Near the optimum the value can stall at rounding level while the gradient still shrinks.
      const bool stalled = next.value >= obj.value - 1e-14 * (1.0 + std::abs(obj.value)) &&
                           next.gradient.norm() < gnorm;
      if (armijo || stalled) {
        theta = trial;
        obj = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw ConvergenceError("weighted MLE line search failed at iteration " + std::to_string(it), theta, gnorm);
    }
    if (!newton) ascent_step = std::min(step * 2.0, 1e6);
  }
  const double gnorm = obj.gradient.norm();
  if (gnorm <= opts.tolerance) return {theta, opts.max_iter, gnorm, MleMethod::iterative};
  throw ConvergenceError("weighted MLE did not converge in " + std::to_string(opts.max_iter) +
                             " iterations (gradient norm " + std::to_string(gnorm) + ")",
                         theta, gnorm);
}

}  // namespace

void WeightedDataset::validate() const {
  if (target.empty()) throw ArgumentError("weighted dataset needs at least one target sample");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& block = sources[i];
    if (!std::isfinite(block.weight) || block.weight < 0.0) {
      throw ArgumentError("source " + std::to_string(i) + " has a negative or non-finite weight");
    }
    if (block.budget && block.samples.size() > *block.budget) {
      throw ArgumentError("source " + std::to_string(i) + " uses more samples than its budget");
    }
  }
}

double WeightedDataset::total_weight() const {
  double total = static_cast<double>(target.size());
  for (const auto& block : sources) total += block.weight * static_cast<double>(block.samples.size());
  return total;
}

WeightedObjective evaluate_weighted_objective(const ModelFamily& family, const WeightedDataset& data,
                                              const ParameterVector& theta, double ridge, bool with_hessian) {
  data.validate();
  return ObjectiveFn(family, data, ridge)(theta, with_hessian);
}

MleFit fit_weighted_mle(const ModelFamily& family, const WeightedDataset& data, const MleOptions& opts) {
  data.validate();
  if (opts.ridge < 0.0) throw ArgumentError("ridge must be nonnegative");
  MleMethod method = opts.method;
  if (method == MleMethod::automatic) {
    method = family.has_closed_form() && opts.ridge == 0.0 ? MleMethod::closed_form : MleMethod::iterative;
  }
  if (method == MleMethod::closed_form && (!family.has_closed_form() || opts.ridge != 0.0)) {
    throw UnsupportedError("closed-form MLE needs a categorical or gaussian_iso family and no ridge");
  }

  const ObjectiveFn f(family, data, opts.ridge);
  if (method == MleMethod::iterative) return iterate(family, f, opts);

  MleFit fit;
  fit.method = MleMethod::closed_form;
  const Eigen::VectorXd estimate = f.aggregate() / f.total();
  fit.theta = family.kind() == FamilyKind::categorical ? categorical_parameters(estimate) : estimate;
  if (family.is_interior(fit.theta)) fit.gradient_norm = f(fit.theta, false).gradient.norm();
  return fit;
}

ParameterVector fit_from_statistics(const ModelFamily& family, const SufficientStatistic& target,
                                    std::span<const SufficientStatistic> sources,
                                    std::span<const double> source_weights) {
  if (!family.has_closed_form()) throw UnsupportedError("closed-form MLE needs a categorical or gaussian_iso family");
  if (sources.size() != source_weights.size()) throw ArgumentError("one weight per source statistic required");
  if (target.count < 1.0) throw ArgumentError("target statistic needs at least one sample");
  Eigen::VectorXd sum = target.sum;
  double total = target.count;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const double w = source_weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("source weights must be finite and nonnegative");
    if (w == 0.0 || sources[i].count == 0.0) continue;
    if (sources[i].sum.size() != sum.size()) throw ArgumentError("statistic size mismatch");
    sum += w * sources[i].sum;
    total += w * sources[i].count;
  }
  const Eigen::VectorXd estimate = sum / total;
  return family.kind() == FamilyKind::categorical ? categorical_parameters(estimate) : estimate;
}

MixtureDistribution mixture_view(const ModelFamily& family, const WeightedDataset& data) {
  if (family.kind() != FamilyKind::categorical) throw UnsupportedError("mixture view is defined for categorical families");
  data.validate();
  const double total = data.total_weight();
  MixtureDistribution mix;
  mix.component_weights.resize(static_cast<Eigen::Index>(data.sources.size() + 1));
  mix.probabilities = Eigen::VectorXd::Zero(family.outcomes());

  auto accumulate = [&](const std::vector<Sample>& samples, double coefficient) {
    if (samples.empty() || coefficient == 0.0) return;
    const SufficientStatistic stat = statistic_of(family, samples);
    mix.probabilities += coefficient * stat.sum / stat.count;
  };
  const double target_coefficient = static_cast<double>(data.target.size()) / total;
  mix.component_weights[0] = target_coefficient;
  accumulate(data.target, target_coefficient);
  for (std::size_t i = 0; i < data.sources.size(); ++i) {
    const auto& block = data.sources[i];
    const double coefficient = block.weight * static_cast<double>(block.samples.size()) / total;
    mix.component_weights[static_cast<Eigen::Index>(i + 1)] = coefficient;
    accumulate(block.samples, coefficient);
  }
  return mix;
}

}  // namespace uowq
