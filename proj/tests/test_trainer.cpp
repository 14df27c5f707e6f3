#include "oracles.hpp"

#include "uowq/errors.hpp"
#include "uowq/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace uowq;

namespace {

const ModelFamily kFamily = ModelFamily::softmax_regression(3, 3);

double oracle_nll_sum(const ParameterVector& theta, std::span<const Sample> data) {
  double s = 0.0;
  for (const auto& x : data) {
    const auto& lf = std::get<LabeledFeature>(x);
    s -= oracle::softmax_log_prob(theta, 3, 3, lf.features, lf.label);
  }
  return s;
}

ToyProblem two_source_problem(std::uint64_t seed) {
  const std::vector<ToyTaskSpec> tasks{{0.0, 30, 500}, {0.0, 1000, 0}, {4.0, 1000, 0}};
  return make_toy_problem(kFamily, 1.0, tasks, seed);
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.epochs = 10;
  cfg.steps_per_epoch = 10;
  cfg.ridge = 0.5;
  return cfg;
}

}  // namespace

TEST(Trainer, WeightedLossMatchesOracle) {
  const ToyProblem p = two_source_problem(1);
  const ParameterVector theta = Eigen::VectorXd::LinSpaced(9, -0.5, 0.5);
  const std::vector<WeightedBlock> blocks{{p.train[1], 0.3}, {p.train[2], 0.1}};
  const double expected =
      (oracle_nll_sum(theta, p.train[0]) + 0.3 * oracle_nll_sum(theta, p.train[1]) + 0.1 * oracle_nll_sum(theta, p.train[2])) /
      (30.0 + 1000.0 + 1000.0);
  EXPECT_NEAR(weighted_loss(kFamily, theta, p.train[0], blocks), expected, 1e-12);
  auto f = [&](const Eigen::VectorXd& th) { return weighted_loss(kFamily, th, p.train[0], blocks); };
  EXPECT_TRUE(weighted_loss_gradient(kFamily, theta, p.train[0], blocks).isApprox(oracle::numeric_gradient(f, theta), 1e-6));
  EXPECT_NEAR(mean_nll(kFamily, theta, p.train[0]), oracle_nll_sum(theta, p.train[0]) / 30.0, 1e-12);
}

TEST(Trainer, AccuracyCountsArgmaxHits) {
  const ModelFamily fam = ModelFamily::softmax_regression(1, 2);
  const ParameterVector theta = Eigen::Vector2d(1.0, -1.0);  // class 0 wins for z > 0
  const Dataset data{LabeledFeature{Eigen::VectorXd::Constant(1, 1.0), 0}, LabeledFeature{Eigen::VectorXd::Constant(1, 2.0), 1},
                     LabeledFeature{Eigen::VectorXd::Constant(1, -1.0), 1}, LabeledFeature{Eigen::VectorXd::Constant(1, -3.0), 0}};
  EXPECT_DOUBLE_EQ(accuracy(fam, theta, data), 0.5);
}

TEST(Trainer, PretrainSourceIsStationary) {
  const ToyProblem p = two_source_problem(2);
  const ParameterVector theta = pretrain_source(kFamily, p.train[1], 0.5);
  auto f = [&](const Eigen::VectorXd& th) { return oracle_nll_sum(th, p.train[1]) + 0.5 * th.squaredNorm(); };
  EXPECT_LT(oracle::numeric_gradient(f, theta).norm() / 1000.0, 1e-7);
  // Logits are identified up to a shift shared by all classes; the ridge picks the centered one.
  Eigen::MatrixXd truth = Eigen::Map<const Eigen::MatrixXd>(p.thetas[1].data(), 3, 3);
  truth.colwise() -= truth.rowwise().mean();
  EXPECT_LT((theta - Eigen::Map<const Eigen::VectorXd>(truth.data(), 9)).norm(), 1.0);
}

TEST(Trainer, ToyProblemLayout) {
  const ToyProblem p = two_source_problem(3);
  ASSERT_EQ(p.thetas.size(), 3u);
  EXPECT_EQ(p.thetas[0], p.base_theta);
  EXPECT_EQ(p.thetas[1], p.base_theta);
  EXPECT_NEAR((p.thetas[2] - p.base_theta).norm(), 4.0, 1e-12);
  const Eigen::VectorXd shift = p.thetas[2] - p.base_theta;
  EXPECT_LT(Eigen::Map<const Eigen::MatrixXd>(shift.data(), 3, 3).rowwise().sum().norm(), 1e-12);
  EXPECT_EQ(p.train[0].size(), 30u);
  EXPECT_EQ(p.holdout[0].size(), 500u);
  EXPECT_TRUE(p.holdout[1].empty());
  for (const auto& x : p.train[0]) EXPECT_EQ(std::get<LabeledFeature>(x).features[2], 1.0);
  const ToyProblem q = two_source_problem(3);
  EXPECT_EQ(std::get<LabeledFeature>(q.train[2][17]).label, std::get<LabeledFeature>(p.train[2][17]).label);
  EXPECT_EQ(std::get<LabeledFeature>(q.train[2][17]).features, std::get<LabeledFeature>(p.train[2][17]).features);
}

TEST(Trainer, MultiSourceTraceStructure) {
  const ToyProblem p = two_source_problem(4);
  const std::vector<Dataset> sources{p.train[1], p.train[2]};
  const std::vector<ParameterVector> params{pretrain_source(kFamily, p.train[1], 0.5),
                                            pretrain_source(kFamily, p.train[2], 0.5)};
  const TrainConfig cfg = quick_config();
  const TrainTrace trace = train_multi_source(kFamily, p.train[0], sources, params, cfg, p.holdout[0]);
  ASSERT_EQ(trace.epochs.size(), 10u);
  EXPECT_EQ(trace.stop_reason, "epochs");
  EXPECT_EQ(trace.epochs[0].weights, (std::vector<double>{0.0, 0.0}));
  EXPECT_TRUE(trace.epochs[0].alpha.empty());
  const auto& last = trace.epochs.back();
  ASSERT_EQ(last.alpha.size(), 2u);
  EXPECT_NEAR(last.alpha[0] + last.alpha[1], 1.0, 1e-12);
  EXPECT_GT(last.weights[0], last.weights[1]);
  EXPECT_NEAR(last.s, 1.0 / last.t, 1e-9 * last.s);
  EXPECT_TRUE(std::isfinite(last.holdout_nll));

  const TrainTrace again = train_multi_source(kFamily, p.train[0], sources, params, cfg, p.holdout[0]);
  EXPECT_EQ(again.theta, trace.theta);
}

TEST(Trainer, WeightUpdatePeriod) {
  const ToyProblem p = two_source_problem(5);
  const std::vector<Dataset> sources{p.train[1]};
  const std::vector<ParameterVector> params{pretrain_source(kFamily, p.train[1], 0.5)};
  TrainConfig cfg = quick_config();
  cfg.weight_update_period = 3;
  const TrainTrace trace = train_multi_source(kFamily, p.train[0], sources, params, cfg);
  // Recomputed at epochs 4, 7, 10.
  EXPECT_EQ(trace.epochs[2].weights[0], 0.0);
  EXPECT_GT(trace.epochs[3].weights[0], 0.0);
  EXPECT_EQ(trace.epochs[3].weights, trace.epochs[5].weights);
  EXPECT_NE(trace.epochs[5].weights, trace.epochs[6].weights);
  EXPECT_TRUE(std::isnan(trace.epochs[0].holdout_nll));
}

TEST(Trainer, TargetOnlyConvergesToRidgeMle) {
  const ToyProblem p = two_source_problem(6);
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.epochs = 2000;
  cfg.ridge = 0.5;
  cfg.stop_tolerance = 1e-12;
  const TrainTrace trace = train_target_only(kFamily, p.train[0], cfg);
  EXPECT_EQ(trace.stop_reason, "converged");
  EXPECT_TRUE(trace.epochs.back().weights.empty());
  EXPECT_LT((trace.theta - pretrain_source(kFamily, p.train[0], 0.5)).norm(), 1e-6);
}

TEST(Trainer, MultiTaskProducesOneTracePerTask) {
  const std::vector<ToyTaskSpec> tasks{{0.0, 40, 100}, {0.0, 40, 100}, {3.0, 40, 100}};
  const ToyProblem p = make_toy_problem(kFamily, 1.0, tasks, 9);
  const TrainTrace single = train_target_only(kFamily, p.train[0], quick_config());
  const auto traces = train_multi_task(kFamily, p.train, quick_config(), p.holdout);
  ASSERT_EQ(traces.size(), 3u);
  for (const auto& tr : traces) {
    EXPECT_EQ(tr.epochs.back().weights.size(), 2u);
    EXPECT_TRUE(std::isfinite(tr.epochs.back().holdout_nll));
  }
  EXPECT_EQ(traces[0].epochs[0].weights, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(single.epochs.size(), 10u);
  const std::vector<Dataset> one{p.train[0]};
  EXPECT_THROW(train_multi_task(kFamily, one, quick_config()), ArgumentError);
}

TEST(Trainer, ConfigValidation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.ridge = -1.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  const ToyProblem p = two_source_problem(1);
  const std::vector<Dataset> sources{p.train[1]};
  EXPECT_THROW(train_multi_source(kFamily, p.train[0], sources, {}, {}), ArgumentError);
  EXPECT_THROW(train_target_only(ModelFamily::categorical(3), p.train[0], {}), UnsupportedError);
  const std::vector<ToyTaskSpec> empty_task{{0.0, 0, 0}};
  EXPECT_THROW(make_toy_problem(kFamily, 1.0, empty_task, 1), ArgumentError);
}
