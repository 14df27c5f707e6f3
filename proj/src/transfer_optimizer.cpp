#include "uowq/transfer_optimizer.hpp"

#include "uowq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uowq {
namespace {

void require_budgets(std::span<const std::size_t> budgets) {
  if (budgets.empty()) throw ArgumentError("need at least one source budget");
  for (std::size_t n : budgets) {
    if (n == 0) throw ArgumentError("source budgets must be >= 1");
  }
}

}  // namespace

double single_source_weight(double t, double n1) {
  if (!(t >= 0.0) || !(n1 >= 1.0)) throw ArgumentError("single_source_weight needs t >= 0 and N_1 >= 1");
  return 1.0 / (1.0 + t * n1);
}

double predicted_kl_at_optimal_weight(double n0, double n, double t, int d) {
  return 0.5 * d * (1.0 + n * t) / (n0 + n + n0 * n * t);
}

double predicted_kl_quantity_slope(double n0, double n, double t, int d) {
  const double denom = n0 + n + n0 * n * t;
  return -0.5 * d / (denom * denom);
}

QpMatrix::QpMatrix(Eigen::MatrixXd m, std::vector<std::size_t> budgets, int d)
    : m_(std::move(m)), budgets_(std::move(budgets)), d_(d) {
  require_budgets(budgets_);
  const auto k = static_cast<Eigen::Index>(budgets_.size());
  if (m_.rows() != k || m_.cols() != k) throw ArgumentError("QP matrix size does not match the number of budgets");
  if (d < 1) throw ArgumentError("parameter dimension d must be >= 1");
  if (!m_.allFinite()) throw ArgumentError("QP matrix has non-finite entries");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw ArgumentError("QP matrix is not symmetric");
  const Eigen::MatrixXd sym = 0.5 * (m_ + m_.transpose());
  m_ = sym;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double floor = 1.0 / static_cast<double>(budgets_[static_cast<std::size_t>(i)]);
    if (m_(i, i) < floor * (1.0 - 1e-12)) {
      throw ArgumentError("QP matrix diagonal entry " + std::to_string(i) + " is below 1/N_i");
    }
  }
  // The shift part Theta^T J Theta / d must itself be PSD.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(shift_part(), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) throw ArgumentError("QP matrix is not positive semi-definite");
}

Eigen::MatrixXd QpMatrix::shift_part() const {
  Eigen::MatrixXd g = m_;
  for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, i) -= 1.0 / static_cast<double>(budgets_[static_cast<std::size_t>(i)]);
  return g;
}

QpMatrix qp_matrix_from_gram(const Eigen::MatrixXd& gram, std::span<const std::size_t> budgets, int d) {
  require_budgets(budgets);
  const auto k = static_cast<Eigen::Index>(budgets.size());
  if (gram.rows() != k || gram.cols() != k) throw ArgumentError("gram matrix size does not match the number of budgets");
  if (d < 1) throw ArgumentError("parameter dimension d must be >= 1");
  Eigen::MatrixXd m = 0.5 * (gram + gram.transpose()) / static_cast<double>(d);
  for (Eigen::Index i = 0; i < k; ++i) m(i, i) += 1.0 / static_cast<double>(budgets[static_cast<std::size_t>(i)]);
  return QpMatrix(std::move(m), std::vector<std::size_t>(budgets.begin(), budgets.end()), d);
}

QpMatrix build_qp_matrix(const DirectionMatrix& directions, const FisherOperator& fisher,
                         std::span<const std::size_t> budgets, int d) {
  if (static_cast<std::size_t>(directions.sources()) != budgets.size()) {
    throw ArgumentError("direction matrix has " + std::to_string(directions.sources()) + " columns but " +
                        std::to_string(budgets.size()) + " budgets were given");
  }
  return qp_matrix_from_gram(fisher.projected(directions), budgets, d);
}

TransferPlan optimal_plan(const QpMatrix& m, double n0, const QpOptions& opts) {
  if (!(n0 >= 1.0)) throw ArgumentError("target size N_0 must be >= 1");
  const QpSolution sol = solve_simplex_qp(m, opts);
  if (!(sol.t > 0.0)) throw ConvergenceError("simplex QP returned a non-positive optimum", sol.alpha, sol.gap);
  const auto& budgets = m.budgets();
  const auto k = static_cast<Eigen::Index>(budgets.size());
  TransferPlan plan;
  plan.alpha = sol.alpha;
  plan.t = sol.t;
  plan.s = 1.0 / sol.t;
  plan.weights.resize(k);
  std::vector<double> budget_values(budgets.begin(), budgets.end());
  for (Eigen::Index i = 0; i < k; ++i) plan.weights[i] = plan.s * plan.alpha[i] / budget_values[static_cast<std::size_t>(i)];
  plan.quantities = budgets;
  plan.predicted_kl = predict_kl_multi(n0, budget_values, {plan.weights.data(), static_cast<std::size_t>(k)},
                                       m.matrix(), m.dimension());
  plan.solver = {sol.iterations, sol.gap};
  return plan;
}

std::vector<QuantityPoint> quantity_diagnostic(const QpMatrix& m, double n0, std::span<const double> fractions) {
  const Eigen::MatrixXd shift = m.shift_part();
  const auto& budgets = m.budgets();
  std::vector<QuantityPoint> out;
  out.reserve(fractions.size());
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ArgumentError("quantity fractions must lie in [0, 1]");
    QuantityPoint point;
    point.fraction = f;
    if (f == 0.0) {
      point.quantities.assign(budgets.size(), 0);
      point.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(budgets.size()));
      point.predicted_total = 0.5 * m.dimension() / n0;
    } else {
      for (std::size_t n : budgets) {
        point.quantities.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(n)))));
      }
      const QpMatrix sub = qp_matrix_from_gram(shift * m.dimension(), point.quantities, m.dimension());
      const TransferPlan plan = optimal_plan(sub, n0);
      point.weights = plan.weights;
      point.predicted_total = plan.predicted_kl.total;
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace uowq
