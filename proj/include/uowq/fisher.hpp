#pragma once

// Fisher information, analytic and empirical, and the projected quadratic form
// Theta^T J Theta that the transfer-plan optimizer consumes.
//
// Empirical reductions run as OpenMP kernels over fixed-size sample blocks. Partial sums are
// folded in block order, so results do not depend on the thread count. Serial reference
// versions live in reference.hpp.

#include "uowq/model_zoo.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace uowq {

// Largest dimension for which a dense d x d Fisher matrix is materialized.
inline constexpr int kDenseFisherMaxDim = 1024;

// Columns theta_i - theta_0, one per source.
class DirectionMatrix {
 public:
  explicit DirectionMatrix(Eigen::MatrixXd columns);
  static DirectionMatrix from_parameters(const ParameterVector& target, std::span<const ParameterVector> sources);

  const Eigen::MatrixXd& columns() const noexcept { return columns_; }
  Eigen::Index dimension() const noexcept { return columns_.rows(); }
  Eigen::Index sources() const noexcept { return columns_.cols(); }

 private:
  Eigen::MatrixXd columns_;
};

class FisherOperator {
 public:
  enum class Mode { dense, gram };

  static FisherOperator from_dense(Eigen::MatrixXd matrix);
  // N x K matrix of per-sample score projections onto the K direction columns.
  static FisherOperator from_projections(Eigen::MatrixXd projections);

  Mode mode() const noexcept { return mode_; }
  const Eigen::MatrixXd& dense() const;
  const Eigen::MatrixXd& projections() const;

  // Dense mode: v^T J v for v in R^d. Gram mode: v holds K coefficients on the directions
  // the projections were taken against, and the form is (1/N) sum_n (g_n^T Theta v)^2.
  double quadratic_form(const Eigen::VectorXd& v) const;

  // Theta^T J Theta. Dense mode projects the stored matrix; gram mode returns (1/N) P^T P and
  // requires Theta to have as many columns as the stored projections.
  Eigen::MatrixXd projected(const DirectionMatrix& directions) const;

 private:
  FisherOperator(Mode mode, Eigen::MatrixXd data) : mode_(mode), data_(std::move(data)) {}
  Mode mode_;
  Eigen::MatrixXd data_;
};

// Expected outer product of the score. Categorical: diag(1/p_j) + (1/p_m) 1 1^T.
// Gaussian: identity. Softmax regression is unsupported (use the empirical Fisher).
FisherOperator analytic_fisher(const ModelFamily& family, const ParameterVector& theta);

// (1/N) sum_n g_n g_n^T over per-sample scores g_n at theta.
FisherOperator empirical_fisher(const ModelFamily& family, const ParameterVector& theta,
                                std::span<const Sample> samples);

// Gram-mode operator holding the N x K score projections Theta^T g_n.
FisherOperator empirical_fisher_projections(const ModelFamily& family, const ParameterVector& theta,
                                            std::span<const Sample> samples, const DirectionMatrix& directions);

// (1/N) sum_n (Theta^T g_n)(Theta^T g_n)^T without forming any d x d matrix.
Eigen::MatrixXd projected_gram(const ModelFamily& family, const ParameterVector& theta,
                               std::span<const Sample> samples, const DirectionMatrix& directions);

// Batched kernels on precomputed per-sample vectors (rows of `scores`).
Eigen::MatrixXd outer_product_mean(const Eigen::MatrixXd& scores);
Eigen::MatrixXd gram_of_projections(const Eigen::MatrixXd& projections);

}  // namespace uowq
