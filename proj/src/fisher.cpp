#include "uowq/fisher.hpp"

#include "uowq/errors.hpp"
#include "uowq/parallel.hpp"

#include <algorithm>
#include <string>

namespace uowq {
namespace {

void require_samples(const ModelFamily& family, const ParameterVector& theta, std::span<const Sample> samples) {
  if (samples.empty()) throw ArgumentError("empirical Fisher needs at least one sample");
  family.validate(theta);
  if (!family.is_interior(theta)) throw ParameterError("Fisher information needs an interior parameter");
  for (const auto& x : samples) {
    if (!family.in_support(x)) throw DomainError("sample outside the support of " + std::string(family.name()));
  }
}

// Sums f(n) (a rows x cols matrix) over n in [0, count) with the fixed block decomposition.
// Blocks are processed in waves so that at most `wave` partial matrices are alive at once.
template <class Term>
Eigen::MatrixXd blocked_sum(std::size_t count, Eigen::Index rows, Eigen::Index cols, Term&& term) {
  const std::size_t blocks = parallel::block_count(count);
  const std::size_t cells = static_cast<std::size_t>(std::max<Eigen::Index>(rows * cols, 1));
  const std::size_t wave = std::clamp<std::size_t>((std::size_t{1} << 24) / cells, 1, 256);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(rows, cols);
  std::vector<Eigen::MatrixXd> partial;
  for (std::size_t first = 0; first < blocks; first += wave) {
    const std::size_t here = std::min(wave, blocks - first);
    partial.assign(here, Eigen::MatrixXd::Zero(rows, cols));
    parallel::for_each_index(here, [&](std::size_t b) {
      const std::size_t begin = (first + b) * parallel::kBlockSize;
      const std::size_t end = std::min(count, begin + parallel::kBlockSize);
      for (std::size_t n = begin; n < end; ++n) term(n, partial[b]);
    });
    for (const auto& p : partial) total += p;
  }
  return total;
}

}  // namespace

DirectionMatrix::DirectionMatrix(Eigen::MatrixXd columns) : columns_(std::move(columns)) {
  if (columns_.cols() < 1 || columns_.rows() < 1) throw ArgumentError("direction matrix needs at least one column");
  if (!columns_.allFinite()) throw ArgumentError("direction matrix has non-finite entries");
}

DirectionMatrix DirectionMatrix::from_parameters(const ParameterVector& target,
                                                 std::span<const ParameterVector> sources) {
  if (sources.empty()) throw ArgumentError("direction matrix needs at least one source");
  Eigen::MatrixXd cols(target.size(), static_cast<Eigen::Index>(sources.size()));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].size() != target.size()) throw ArgumentError("source parameter dimension mismatch");
    cols.col(static_cast<Eigen::Index>(i)) = sources[i] - target;
  }
  return DirectionMatrix(std::move(cols));
}

FisherOperator FisherOperator::from_dense(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw ArgumentError("dense Fisher must be square");
  if (matrix.rows() > kDenseFisherMaxDim) throw UnsupportedError("dense Fisher limited to d <= 1024");
  return {Mode::dense, std::move(matrix)};
}

FisherOperator FisherOperator::from_projections(Eigen::MatrixXd projections) {
  if (projections.rows() == 0 || projections.cols() == 0) throw ArgumentError("projection matrix must be non-empty");
  return {Mode::gram, std::move(projections)};
}

const Eigen::MatrixXd& FisherOperator::dense() const {
  if (mode_ != Mode::dense) throw UnsupportedError("Fisher operator is in gram mode");
  return data_;
}

const Eigen::MatrixXd& FisherOperator::projections() const {
  if (mode_ != Mode::gram) throw UnsupportedError("Fisher operator is in dense mode");
  return data_;
}

double FisherOperator::quadratic_form(const Eigen::VectorXd& v) const {
  if (mode_ == Mode::dense) {
    if (v.size() != data_.rows()) throw ArgumentError("vector length does not match Fisher dimension");
    return v.dot(data_ * v);
  }
  if (v.size() != data_.cols()) throw ArgumentError("coefficient vector length does not match direction count");
  return (data_ * v).squaredNorm() / static_cast<double>(data_.rows());
}

Eigen::MatrixXd FisherOperator::projected(const DirectionMatrix& directions) const {
  const auto& theta = directions.columns();
  if (mode_ == Mode::dense) {
    if (theta.rows() != data_.rows()) throw ArgumentError("direction dimension does not match Fisher dimension");
    Eigen::MatrixXd g = theta.transpose() * data_ * theta;
    return 0.5 * (g + g.transpose());
  }
  if (theta.cols() != data_.cols()) throw ArgumentError("direction count does not match stored projections");
  return gram_of_projections(data_);
}

FisherOperator analytic_fisher(const ModelFamily& family, const ParameterVector& theta) {
  family.validate(theta);
  switch (family.kind()) {
    case FamilyKind::categorical: {
      if (!family.is_interior(theta)) throw ParameterError("Fisher information needs an interior parameter");
      const Eigen::Index d = family.dimension();
      const double last = 1.0 - theta.sum();
      Eigen::MatrixXd j = Eigen::MatrixXd::Constant(d, d, 1.0 / last);
      j.diagonal().array() += theta.array().inverse();
      return FisherOperator::from_dense(std::move(j));
    }
    case FamilyKind::gaussian_iso:
      return FisherOperator::from_dense(Eigen::MatrixXd::Identity(family.dimension(), family.dimension()));
    case FamilyKind::softmax_regression:
      break;
  }
  throw UnsupportedError("analytic Fisher is not available for softmax_regression; use empirical_fisher");
}

Eigen::MatrixXd outer_product_mean(const Eigen::MatrixXd& scores) {
  const auto n = static_cast<std::size_t>(scores.rows());
  if (n == 0) throw ArgumentError("need at least one score row");
  const Eigen::Index d = scores.cols();
  Eigen::MatrixXd sum = blocked_sum(n, d, d, [&](std::size_t i, Eigen::MatrixXd& acc) {
    const auto row = scores.row(static_cast<Eigen::Index>(i));
    acc.noalias() += row.transpose() * row;
  });
  return sum / static_cast<double>(n);
}

Eigen::MatrixXd gram_of_projections(const Eigen::MatrixXd& projections) {
  return outer_product_mean(projections);
}

FisherOperator empirical_fisher(const ModelFamily& family, const ParameterVector& theta,
                                std::span<const Sample> samples) {
  require_samples(family, theta, samples);
  const int d = family.dimension();
  if (d > kDenseFisherMaxDim) throw UnsupportedError("dense Fisher limited to d <= 1024; use projected_gram");
  Eigen::MatrixXd sum = blocked_sum(samples.size(), d, d, [&](std::size_t i, Eigen::MatrixXd& acc) {
    const Eigen::VectorXd g = score(family, theta, samples[i]);
    acc.noalias() += g * g.transpose();
  });
  return FisherOperator::from_dense(sum / static_cast<double>(samples.size()));
}

FisherOperator empirical_fisher_projections(const ModelFamily& family, const ParameterVector& theta,
                                            std::span<const Sample> samples, const DirectionMatrix& directions) {
  require_samples(family, theta, samples);
  if (directions.dimension() != family.dimension()) {
    throw ArgumentError("direction dimension does not match family dimension");
  }
  const auto& cols = directions.columns();
  Eigen::MatrixXd projections(static_cast<Eigen::Index>(samples.size()), cols.cols());
  parallel::for_each_index(parallel::block_count(samples.size()), [&](std::size_t b) {
    const std::size_t begin = b * parallel::kBlockSize;
    const std::size_t end = std::min(samples.size(), begin + parallel::kBlockSize);
    for (std::size_t n = begin; n < end; ++n) {
      projections.row(static_cast<Eigen::Index>(n)) = (cols.transpose() * score(family, theta, samples[n])).transpose();
    }
  });
  return FisherOperator::from_projections(std::move(projections));
}

Eigen::MatrixXd projected_gram(const ModelFamily& family, const ParameterVector& theta,
                               std::span<const Sample> samples, const DirectionMatrix& directions) {
  return gram_of_projections(empirical_fisher_projections(family, theta, samples, directions).projections());
}

}  // namespace uowq
