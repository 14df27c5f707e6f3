#include "uowq/trainer.hpp"

#include "uowq/errors.hpp"
#include "uowq/fisher.hpp"
#include "uowq/transfer_optimizer.hpp"
#include "uowq/weighted_mle.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace uowq {
namespace {

struct Plan {
  std::vector<double> weights;
  std::vector<double> alpha;
  double s = 0.0;
  double t = 0.0;
};

void require_softmax(const ModelFamily& family) {
  if (family.kind() != FamilyKind::softmax_regression) {
    throw UnsupportedError("the trainer works with the softmax_regression family");
  }
}

std::size_t pooled_count(std::span<const Sample> target, std::span<const WeightedBlock> sources) {
  std::size_t n = target.size();
  for (const auto& b : sources) n += b.samples.size();
  return n;
}

ParameterVector initial_theta(const ModelFamily& family, const TrainConfig& cfg, std::uint64_t stream) {
  ParameterVector theta = ParameterVector::Zero(family.dimension());
  if (cfg.init_scale > 0.0) {
    Rng rng = make_rng(cfg.seed, stream);
    std::normal_distribution<double> normal(0.0, cfg.init_scale);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = normal(rng);
  }
  return theta;
}

// Plan for a target at theta against the given source parameters and budgets.
Plan compute_plan(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> target,
                  std::span<const ParameterVector> others, std::span<const std::size_t> budgets) {
  const DirectionMatrix directions = DirectionMatrix::from_parameters(theta, others);
  const Eigen::MatrixXd gram = projected_gram(family, theta, target, directions);
  const QpMatrix m = qp_matrix_from_gram(gram, budgets, family.dimension());
  const TransferPlan plan = optimal_plan(m, static_cast<double>(target.size()));
  Plan out;
  out.weights.assign(plan.weights.data(), plan.weights.data() + plan.weights.size());
  out.alpha.assign(plan.alpha.data(), plan.alpha.data() + plan.alpha.size());
  out.s = plan.s;
  out.t = plan.t;
  return out;
}

[[noreturn]] void rethrow_with_context(const std::string& where) {
  try {
    throw;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(where + ": " + e.what(), e.last_iterate(), e.residual());
  } catch (const ArgumentError& e) {
    throw ArgumentError(where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
}

double objective(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> target,
                 std::span<const WeightedBlock> blocks, double ridge) {
  const double pool = static_cast<double>(pooled_count(target, blocks));
  return weighted_loss(family, theta, target, blocks) + ridge * theta.squaredNorm() / pool;
}

// Runs the epoch's gradient steps in place and returns the norm of the last gradient.
double gradient_steps(const ModelFamily& family, ParameterVector& theta, std::span<const Sample> target,
                      std::span<const WeightedBlock> blocks, const TrainConfig& cfg) {
  const double pool = static_cast<double>(pooled_count(target, blocks));
  double norm = 0.0;
  for (int step = 0; step < cfg.steps_per_epoch; ++step) {
    Eigen::VectorXd grad = weighted_loss_gradient(family, theta, target, blocks);
    grad += (2.0 * cfg.ridge / pool) * theta;
    norm = grad.norm();
    theta -= cfg.learning_rate * grad;
  }
  return norm;
}

EpochRecord make_record(const ModelFamily& family, int epoch, const ParameterVector& theta,
                        std::span<const Sample> target, std::span<const WeightedBlock> blocks, const Plan& plan,
                        double grad_norm, double ridge, std::span<const Sample> holdout) {
  EpochRecord r;
  r.epoch = epoch;
  r.loss = objective(family, theta, target, blocks, ridge);
  r.weights = plan.weights;
  r.grad_norm = grad_norm;
  r.alpha = plan.alpha;
  r.s = plan.s;
  r.t = plan.t;
  if (holdout.empty()) {
    r.holdout_nll = std::numeric_limits<double>::quiet_NaN();
    r.holdout_accuracy = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.holdout_nll = mean_nll(family, theta, holdout);
    r.holdout_accuracy = accuracy(family, theta, holdout);
  }
  return r;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning_rate must be > 0");
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (weight_update_period < 1) throw ArgumentError("weight_update_period must be >= 1");
  if (steps_per_epoch < 1) throw ArgumentError("steps_per_epoch must be >= 1");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ArgumentError("ridge must be >= 0");
  if (!(init_scale >= 0.0)) throw ArgumentError("init_scale must be >= 0");
  if (!(stop_tolerance >= 0.0)) throw ArgumentError("stop_tolerance must be >= 0");
}

double weighted_loss(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> target,
                     std::span<const WeightedBlock> sources) {
  if (target.empty()) throw ArgumentError("weighted loss needs target data");
  double total = 0.0;
  for (const auto& x : target) total -= log_density(family, theta, x);
  for (const auto& b : sources) {
    if (b.weight == 0.0) continue;
    double block = 0.0;
    for (const auto& x : b.samples) block -= log_density(family, theta, x);
    total += b.weight * block;
  }
  return total / static_cast<double>(pooled_count(target, sources));
}

Eigen::VectorXd weighted_loss_gradient(const ModelFamily& family, const ParameterVector& theta,
                                       std::span<const Sample> target, std::span<const WeightedBlock> sources) {
  if (target.empty()) throw ArgumentError("weighted loss needs target data");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  for (const auto& x : target) grad -= score(family, theta, x);
  for (const auto& b : sources) {
    if (b.weight == 0.0) continue;
    Eigen::VectorXd block = Eigen::VectorXd::Zero(theta.size());
    for (const auto& x : b.samples) block -= score(family, theta, x);
    grad += b.weight * block;
  }
  return grad / static_cast<double>(pooled_count(target, sources));
}

double mean_nll(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> data) {
  if (data.empty()) throw ArgumentError("mean NLL needs data");
  double total = 0.0;
  for (const auto& x : data) total -= log_density(family, theta, x);
  return total / static_cast<double>(data.size());
}

double accuracy(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> data) {
  require_softmax(family);
  if (data.empty()) throw ArgumentError("accuracy needs data");
  std::size_t hits = 0;
  for (const auto& x : data) {
    const auto& lf = std::get<LabeledFeature>(x);
    Eigen::Index best = 0;
    class_probabilities(family, theta, lf.features).maxCoeff(&best);
    if (best == lf.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

ParameterVector pretrain_source(const ModelFamily& family, std::span<const Sample> data, double ridge) {
  if (data.empty()) throw ArgumentError("cannot pretrain a source model on empty data");
  WeightedDataset dataset{{data.begin(), data.end()}, {}};
  MleOptions opts;
  opts.method = MleMethod::iterative;
  opts.ridge = ridge / static_cast<double>(data.size());
  opts.tolerance = 1e-9;
  return fit_weighted_mle(family, dataset, opts).theta;
}

TrainTrace train_multi_source(const ModelFamily& family, std::span<const Sample> target,
                              std::span<const Dataset> sources, std::span<const ParameterVector> source_params,
                              const TrainConfig& cfg, std::span<const Sample> holdout) {
  require_softmax(family);
  cfg.validate();
  if (target.empty()) throw ArgumentError("target data is empty");
  if (sources.size() != source_params.size()) throw ArgumentError("need one pretrained parameter per source");
  const std::size_t k = sources.size();
  std::vector<std::size_t> budgets;
  for (std::size_t i = 0; i < k; ++i) {
    if (sources[i].empty()) throw ArgumentError("source " + std::to_string(i) + " has no data");
    family.validate(source_params[i]);
    budgets.push_back(sources[i].size());
  }

  TrainTrace trace;
  ParameterVector theta = initial_theta(family, cfg, 0);
  Plan plan;
  plan.weights.assign(k, 0.0);
  std::vector<WeightedBlock> blocks(k);
  trace.stop_reason = "epochs";
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (k > 0 && epoch > 1 && (epoch - 1) % cfg.weight_update_period == 0) {
      try {
        plan = compute_plan(family, theta, target, source_params, budgets);
      } catch (const Error&) {
        rethrow_with_context("epoch " + std::to_string(epoch));
      }
    }
    for (std::size_t i = 0; i < k; ++i) blocks[i] = {sources[i], plan.weights[i]};
    const ParameterVector before = theta;
    const double grad_norm = gradient_steps(family, theta, target, blocks, cfg);
    trace.epochs.push_back(make_record(family, epoch, theta, target, blocks, plan, grad_norm, cfg.ridge, holdout));
    if ((theta - before).norm() <= cfg.stop_tolerance) {
      trace.stop_reason = "converged";
      break;
    }
  }
  trace.theta = theta;
  return trace;
}

TrainTrace train_target_only(const ModelFamily& family, std::span<const Sample> target, const TrainConfig& cfg,
                             std::span<const Sample> holdout) {
  return train_multi_source(family, target, {}, {}, cfg, holdout);
}

std::vector<TrainTrace> train_multi_task(const ModelFamily& family, std::span<const Dataset> datasets,
                                         const TrainConfig& cfg, std::span<const Dataset> holdouts) {
  require_softmax(family);
  cfg.validate();
  const std::size_t k = datasets.size();
  if (k < 2) throw ArgumentError("multi-task training needs at least 2 tasks");
  if (!holdouts.empty() && holdouts.size() != k) throw ArgumentError("need one holdout set per task or none");
  for (std::size_t i = 0; i < k; ++i) {
    if (datasets[i].empty()) throw ArgumentError("task " + std::to_string(i) + " has no data");
  }

  std::vector<ParameterVector> theta(k);
  std::vector<Plan> plans(k);
  std::vector<TrainTrace> traces(k);
  for (std::size_t i = 0; i < k; ++i) {
    theta[i] = initial_theta(family, cfg, i);
    plans[i].weights.assign(k - 1, 0.0);
    traces[i].stop_reason = "epochs";
  }

  std::vector<WeightedBlock> blocks(k - 1);
  std::vector<ParameterVector> others(k - 1);
  std::vector<std::size_t> budgets(k - 1);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    bool all_converged = true;
    for (std::size_t task = 0; task < k; ++task) {
      for (std::size_t j = 0, slot = 0; j < k; ++j) {
        if (j == task) continue;
        others[slot] = theta[j];
        budgets[slot] = datasets[j].size();
        ++slot;
      }
      if (epoch > 1 && (epoch - 1) % cfg.weight_update_period == 0) {
        try {
          plans[task] = compute_plan(family, theta[task], datasets[task], others, budgets);
        } catch (const Error&) {
          rethrow_with_context("task " + std::to_string(task) + ", epoch " + std::to_string(epoch));
        }
      }
      for (std::size_t j = 0, slot = 0; j < k; ++j) {
        if (j == task) continue;
        blocks[slot] = {datasets[j], plans[task].weights[slot]};
        ++slot;
      }
      const ParameterVector before = theta[task];
      const double grad_norm = gradient_steps(family, theta[task], datasets[task], blocks, cfg);
      const std::span<const Sample> holdout = holdouts.empty() ? std::span<const Sample>{} : std::span<const Sample>(holdouts[task]);
      traces[task].epochs.push_back(
          make_record(family, epoch, theta[task], datasets[task], blocks, plans[task], grad_norm, cfg.ridge, holdout));
      all_converged = all_converged && (theta[task] - before).norm() <= cfg.stop_tolerance;
    }
    if (all_converged) {
      for (auto& tr : traces) tr.stop_reason = "converged";
      break;
    }
  }
  for (std::size_t i = 0; i < k; ++i) traces[i].theta = theta[i];
  return traces;
}

Dataset make_classification_data(const ModelFamily& family, const ParameterVector& theta, std::size_t n, Rng& rng) {
  require_softmax(family);
  family.validate(theta);
  const int p = family.features();
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Dataset data;
  data.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd z(p);
    for (int j = 0; j + 1 < p; ++j) z[j] = normal(rng);
    z[p - 1] = 1.0;
    const Eigen::VectorXd probs = class_probabilities(family, theta, z);
    const double u = uniform(rng);
    double cumulative = 0.0;
    int label = static_cast<int>(probs.size()) - 1;
    for (Eigen::Index c = 0; c < probs.size(); ++c) {
      cumulative += probs[c];
      if (u < cumulative) {
        label = static_cast<int>(c);
        break;
      }
    }
    data.push_back(LabeledFeature{std::move(z), label});
  }
  return data;
}

ToyProblem make_toy_problem(const ModelFamily& family, double theta_scale, std::span<const ToyTaskSpec> tasks,
                            std::uint64_t seed) {
  require_softmax(family);
  if (!(theta_scale >= 0.0)) throw ArgumentError("theta_scale must be >= 0");
  ToyProblem problem;
  const int d = family.dimension();
  problem.base_theta = ParameterVector::Zero(d);
  if (theta_scale > 0.0) {
    Rng rng = make_rng(seed, 1);
    std::normal_distribution<double> normal(0.0, theta_scale);
    for (int i = 0; i < d; ++i) problem.base_theta[i] = normal(rng);
  }
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const ToyTaskSpec& spec = tasks[k];
    if (!(spec.shift >= 0.0)) throw ArgumentError("task shifts must be >= 0");
    if (spec.size == 0) throw ArgumentError("task " + std::to_string(k) + " needs at least one training sample");
    ParameterVector theta = problem.base_theta;
    if (spec.shift > 0.0) {
      Rng rng = make_rng(seed, 2, k);
      std::normal_distribution<double> normal;
      Eigen::VectorXd u(d);
      // Shifts shared by every class leave the model unchanged, so the direction is centered
      // per feature and the distance counts only identifiable change.
      Eigen::Map<Eigen::MatrixXd> blocks(u.data(), family.features(), family.classes());
      do {
        for (int i = 0; i < d; ++i) u[i] = normal(rng);
        blocks.colwise() -= blocks.rowwise().mean();
      } while (u.norm() == 0.0);
      theta += spec.shift * u.normalized();
    }
    Rng train_rng = make_rng(seed, 3, k);
    Rng holdout_rng = make_rng(seed, 4, k);
    problem.train.push_back(make_classification_data(family, theta, spec.size, train_rng));
    problem.holdout.push_back(make_classification_data(family, theta, spec.holdout, holdout_rng));
    problem.thetas.push_back(std::move(theta));
  }
  return problem;
}

}  // namespace uowq
