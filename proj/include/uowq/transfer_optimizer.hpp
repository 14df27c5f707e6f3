#pragma once

// Optimal transfer weights and quantities.
//
// Single source: w* = 1 / (1 + t N_1) with t = Delta^T J Delta / d.
// K sources: minimize alpha^T M alpha over the simplex with
//   M = (diag(d/N_1, ..., d/N_K) + Theta^T J Theta) / d,
// then s* = 1/t*, w*_i = s* alpha*_i / N_i and n_i = N_i.

#include "uowq/fisher.hpp"
#include "uowq/kl_measure.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace uowq {

double single_source_weight(double t, double n1);

// Value of the single-source predicted KL at w*(n): (d/2)(1 + n t) / (N0 + n + N0 n t).
double predicted_kl_at_optimal_weight(double n0, double n, double t, int d);
// Its derivative in n: -(d/2) / (N0 + n + N0 n t)^2.
double predicted_kl_quantity_slope(double n0, double n, double t, int d);

class QpMatrix {
 public:
  // Validates symmetry (1e-12, relative to the largest entry), positive semi-definiteness and
  // M_ii >= 1/N_i.
  QpMatrix(Eigen::MatrixXd m, std::vector<std::size_t> budgets, int d);

  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  const std::vector<std::size_t>& budgets() const noexcept { return budgets_; }
  int dimension() const noexcept { return d_; }
  Eigen::Index sources() const noexcept { return m_.rows(); }
  // Theta^T J Theta / d, i.e. M without the budget diagonal.
  Eigen::MatrixXd shift_part() const;

 private:
  Eigen::MatrixXd m_;
  std::vector<std::size_t> budgets_;
  int d_;
};

QpMatrix build_qp_matrix(const DirectionMatrix& directions, const FisherOperator& fisher,
                         std::span<const std::size_t> budgets, int d);
// Same, from an already projected K x K matrix Theta^T J Theta.
QpMatrix qp_matrix_from_gram(const Eigen::MatrixXd& gram, std::span<const std::size_t> budgets, int d);

// Euclidean projection onto { a : a >= 0, sum a = 1 }.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

struct QpOptions {
  // Stop once the Frank-Wolfe gap is below gap_scale * trace(M).
  double gap_scale = 1e-12;
  int max_iter = 100'000;
};

struct QpSolution {
  Eigen::VectorXd alpha;
  double t = 0.0;
  int iterations = 0;
  double gap = 0.0;
};

// min alpha^T M alpha on the simplex. Accelerated projected gradient with adaptive restart,
// started from the uniform vector, plus an occasional exact solve on the current support.
QpSolution solve_simplex_qp(const Eigen::MatrixXd& m, const QpOptions& opts = {});
QpSolution solve_simplex_qp(const QpMatrix& m, const QpOptions& opts = {});

struct SolverStats {
  int iterations = 0;
  double gap = 0.0;
};

struct TransferPlan {
  Eigen::VectorXd weights;
  std::vector<std::size_t> quantities;
  Eigen::VectorXd alpha;
  double s = 0.0;
  double t = 0.0;
  KlPrediction predicted_kl;
  SolverStats solver;
};

TransferPlan optimal_plan(const QpMatrix& m, double n0, const QpOptions& opts = {});

// Re-optimizes the weights with every source truncated to fraction f of its budget
// (n_i = round(f N_i), at least 1 when f > 0) and reports the predicted KL; f = 0 means
// target only.
struct QuantityPoint {
  double fraction = 0.0;
  std::vector<std::size_t> quantities;
  Eigen::VectorXd weights;
  double predicted_total = 0.0;
};

std::vector<QuantityPoint> quantity_diagnostic(const QpMatrix& m, double n0, std::span<const double> fractions);

}  // namespace uowq
