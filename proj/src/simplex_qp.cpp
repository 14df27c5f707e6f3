#include "uowq/transfer_optimizer.hpp"

#include "uowq/errors.hpp"
#include "uowq/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>

namespace uowq {
namespace {

constexpr std::uint64_t kPowerIterationSeed = 0x51a9'2e7d'c0de'0001ULL;

double objective(const Eigen::MatrixXd& m, const Eigen::VectorXd& a) { return a.dot(m * a); }

// Frank-Wolfe gap g^T a - min_j g_j with g = 2 M a; an upper bound on f(a) - f*.
double fw_gap(const Eigen::MatrixXd& m, const Eigen::VectorXd& a) {
  const Eigen::VectorXd g = 2.0 * (m * a);
  return std::max(0.0, g.dot(a) - g.minCoeff());
}

double largest_eigenvalue_bound(const Eigen::MatrixXd& m) {
  const Eigen::Index k = m.rows();
  double gershgorin = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) gershgorin = std::max(gershgorin, m.row(i).cwiseAbs().sum());
  Rng rng = make_rng(kPowerIterationSeed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v[i] = normal(rng);
  double lambda = 0.0;
  for (int it = 0; it < 60 && v.norm() > 0.0; ++it) {
    v.normalize();
    const Eigen::VectorXd w = m * v;
    lambda = v.dot(w);
    v = w;
  }
  // Power iteration approaches from below; the backtracking test in the solver covers the rest.
  return std::clamp(1.05 * lambda, 1e-300, std::max(gershgorin, 1e-300));
}

// Minimizer of a^T M a restricted to the face spanned by `support`, or nothing when the
// restricted KKT system is singular or the solution leaves the face.
std::optional<Eigen::VectorXd> solve_on_support(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& support) {
  const auto s = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) kkt(i, j) = 2.0 * m(support[i], support[j]);
    kkt(i, s) = 1.0;
    kkt(s, i) = 1.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
  rhs[s] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite() || (kkt * sol - rhs).norm() > 1e-9 * (1.0 + kkt.norm())) return std::nullopt;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m.rows());
  for (Eigen::Index i = 0; i < s; ++i) {
    if (sol[i] < 0.0) return std::nullopt;
    a[support[i]] = sol[i];
  }
  return a / a.sum();
}

}  // namespace

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index k = v.size();
  if (k == 0) throw ArgumentError("cannot project an empty vector onto the simplex");
  std::vector<double> u(v.data(), v.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) tau = candidate;
  }
  Eigen::VectorXd out = (v.array() - tau).cwiseMax(0.0).matrix();
  const double total = out.sum();
  return total > 0.0 ? Eigen::VectorXd(out / total) : Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
}

QpSolution solve_simplex_qp(const Eigen::MatrixXd& m, const QpOptions& opts) {
  const Eigen::Index k = m.rows();
  if (k == 0 || m.cols() != k) throw ArgumentError("QP matrix must be square and non-empty");
  if (!m.allFinite()) throw ArgumentError("QP matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw ArgumentError("QP matrix is not symmetric");

  QpSolution out;
  if (k == 1) {
    out.alpha = Eigen::VectorXd::Ones(1);
    out.t = m(0, 0);
    return out;
  }

  const double tolerance = opts.gap_scale * std::max(m.trace(), 0.0);
  double lipschitz = 2.0 * largest_eigenvalue_bound(m);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  Eigen::VectorXd y = x;
  double momentum = 1.0;
  double fx = objective(m, x);
  double gap = fw_gap(m, x);
  int it = 0;

  auto try_polish = [&]() {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (x[i] > 1e-12) support.push_back(i);
    }
    if (support.empty()) return;
    if (auto candidate = solve_on_support(m, support)) {
      const double cand_gap = fw_gap(m, *candidate);
      if (cand_gap < gap) {
        x = *candidate;
        y = x;
        momentum = 1.0;
        fx = objective(m, x);
        gap = cand_gap;
      }
    }
  };

  while (gap > tolerance) {
    if (it >= opts.max_iter) {
      throw ConvergenceError("simplex QP did not reach the gap tolerance", x, gap);
    }
    ++it;
    const Eigen::VectorXd grad = 2.0 * (m * y);
    const double fy = objective(m, y);
    Eigen::VectorXd next;
    for (;;) {
      next = project_to_simplex(y - grad / lipschitz);
      const Eigen::VectorXd step = next - y;
      const double model = fy + grad.dot(step) + 0.5 * lipschitz * step.squaredNorm();
      if (objective(m, next) <= model + 1e-15 * std::max(1.0, std::abs(fy))) break;
      lipschitz *= 2.0;
    }
    const double f_next = objective(m, next);
    if (f_next > fx && momentum > 1.0) {
      // Function-value restart.
      y = x;
      momentum = 1.0;
      continue;
    }
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / momentum_next) * (next - x);
    momentum = momentum_next;
    x = next;
    fx = f_next;
    gap = fw_gap(m, x);
    if (it % 25 == 0 && gap > tolerance) try_polish();
  }
  if (it == 0 || gap > 0.0) try_polish();

  out.alpha = x;
  out.t = objective(m, x);
  out.iterations = it;
  out.gap = gap;
  return out;
}

QpSolution solve_simplex_qp(const QpMatrix& m, const QpOptions& opts) { return solve_simplex_qp(m.matrix(), opts); }

}  // namespace uowq
