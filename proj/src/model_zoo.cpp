#include "uowq/model_zoo.hpp"

#include "uowq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace uowq {
namespace {

constexpr double kSimplexSlack = 1e-12;

int outcome_of(const Sample& x) {
  const auto* outcome = std::get_if<int>(&x);
  if (!outcome) throw DomainError("categorical family expects an outcome index sample");
  return *outcome;
}

const Eigen::VectorXd& vector_of(const Sample& x) {
  const auto* v = std::get_if<Eigen::VectorXd>(&x);
  if (!v) throw DomainError("gaussian_iso family expects a real-vector sample");
  return *v;
}

const LabeledFeature& labeled_of(const Sample& x) {
  const auto* v = std::get_if<LabeledFeature>(&x);
  if (!v) throw DomainError("softmax_regression family expects a (features, label) sample");
  return *v;
}

void require_support(const ModelFamily& family, const Sample& x) {
  if (!family.in_support(x)) throw DomainError("sample outside the support of " + std::string(family.name()));
}

void require_interior(const ModelFamily& family, const ParameterVector& theta) {
  family.validate(theta);
  if (!family.is_interior(theta)) {
    throw ParameterError("categorical parameter must keep every probability >= 1e-9 for scores and Fisher information");
  }
}

Eigen::Map<const Eigen::MatrixXd> weight_matrix(const ModelFamily& family, const ParameterVector& theta) {
  // Column k holds the weights of class k.
  return {theta.data(), family.features(), family.classes()};
}

std::size_t draw_categorical(const Eigen::VectorXd& probabilities, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  const auto m = static_cast<std::size_t>(probabilities.size());
  for (std::size_t j = 0; j + 1 < m; ++j) {
    u -= probabilities[static_cast<Eigen::Index>(j)];
    if (u < 0.0) return j;
  }
  // Skip trailing zero-probability outcomes that rounding could otherwise select.
  for (std::size_t j = m; j-- > 0;) {
    if (probabilities[static_cast<Eigen::Index>(j)] > 0.0) return j;
  }
  return m - 1;
}

}  // namespace

ModelFamily ModelFamily::categorical(int outcomes) {
  if (outcomes < 2) throw ArgumentError("categorical family needs at least 2 outcomes");
  ModelFamily f(FamilyKind::categorical, outcomes - 1);
  f.outcomes_ = outcomes;
  return f;
}

ModelFamily ModelFamily::gaussian_iso(int dim) {
  if (dim < 1) throw ArgumentError("gaussian_iso family needs dim >= 1");
  return ModelFamily(FamilyKind::gaussian_iso, dim);
}

ModelFamily ModelFamily::softmax_regression(int features, int classes,
                                            std::shared_ptr<const Eigen::MatrixXd> feature_pool) {
  if (features < 1 || classes < 2) throw ArgumentError("softmax_regression needs features >= 1 and classes >= 2");
  if (feature_pool && (feature_pool->cols() != features || feature_pool->rows() == 0)) {
    throw ArgumentError("feature pool must be a non-empty N x features matrix");
  }
  ModelFamily f(FamilyKind::softmax_regression, features * classes);
  f.features_ = features;
  f.classes_ = classes;
  f.feature_pool_ = std::move(feature_pool);
  return f;
}

std::string_view ModelFamily::name() const noexcept {
  switch (kind_) {
    case FamilyKind::categorical: return "categorical";
    case FamilyKind::gaussian_iso: return "gaussian_iso";
    case FamilyKind::softmax_regression: return "softmax_regression";
  }
  return "unknown";
}

void ModelFamily::validate(const ParameterVector& theta) const {
  if (theta.size() != dimension_) {
    throw ParameterError("parameter length " + std::to_string(theta.size()) + " does not match family dimension " +
                         std::to_string(dimension_));
  }
  if (!theta.allFinite()) throw ParameterError("parameter vector has non-finite entries");
  if (kind_ == FamilyKind::categorical) {
    if (theta.minCoeff() < -kSimplexSlack || 1.0 - theta.sum() < -kSimplexSlack) {
      throw ParameterError("categorical parameter is not a probability vector");
    }
  }
}

bool ModelFamily::is_interior(const ParameterVector& theta, double min_probability) const {
  if (theta.size() != dimension_ || !theta.allFinite()) return false;
  if (kind_ != FamilyKind::categorical) return true;
  return theta.minCoeff() >= min_probability && 1.0 - theta.sum() >= min_probability;
}

bool ModelFamily::in_support(const Sample& x) const {
  switch (kind_) {
    case FamilyKind::categorical: {
      const auto* o = std::get_if<int>(&x);
      return o && *o >= 0 && *o < outcomes_;
    }
    case FamilyKind::gaussian_iso: {
      const auto* v = std::get_if<Eigen::VectorXd>(&x);
      return v && v->size() == dimension_ && v->allFinite();
    }
    case FamilyKind::softmax_regression: {
      const auto* v = std::get_if<LabeledFeature>(&x);
      return v && v->features.size() == features_ && v->features.allFinite() && v->label >= 0 &&
             v->label < classes_;
    }
  }
  return false;
}

Eigen::VectorXd categorical_probabilities(const ParameterVector& theta) {
  Eigen::VectorXd p(theta.size() + 1);
  p.head(theta.size()) = theta;
  p[theta.size()] = 1.0 - theta.sum();
  return p;
}

ParameterVector categorical_parameters(const Eigen::VectorXd& probabilities) {
  if (probabilities.size() < 2) throw ArgumentError("need at least 2 probabilities");
  return probabilities.head(probabilities.size() - 1);
}

Eigen::VectorXd class_probabilities(const ModelFamily& family, const ParameterVector& theta,
                                    const Eigen::Ref<const Eigen::VectorXd>& features) {
  Eigen::VectorXd logits = weight_matrix(family, theta).transpose() * features;
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd p = logits.array().exp();
  return p / p.sum();
}

double log_density(const ModelFamily& family, const ParameterVector& theta, const Sample& x) {
  family.validate(theta);
  require_support(family, x);
  switch (family.kind()) {
    case FamilyKind::categorical: {
      const int j = outcome_of(x);
      const double p = j + 1 < family.outcomes() ? theta[j] : 1.0 - theta.sum();
      if (p <= 0.0) throw DomainError("outcome " + std::to_string(j) + " has zero probability under theta");
      return std::log(p);
    }
    case FamilyKind::gaussian_iso: {
      const auto& v = vector_of(x);
      return -0.5 * family.dimension() * std::log(2.0 * std::numbers::pi) - 0.5 * (v - theta).squaredNorm();
    }
    case FamilyKind::softmax_regression: {
      const auto& lf = labeled_of(x);
      Eigen::VectorXd logits = weight_matrix(family, theta).transpose() * lf.features;
      const double top = logits.maxCoeff();
      const double lse = top + std::log((logits.array() - top).exp().sum());
      return logits[lf.label] - lse;
    }
  }
  return 0.0;
}

Eigen::VectorXd score(const ModelFamily& family, const ParameterVector& theta, const Sample& x) {
  require_interior(family, theta);
  require_support(family, x);
  switch (family.kind()) {
    case FamilyKind::categorical: {
      const int j = outcome_of(x);
      const int last = family.outcomes() - 1;
      Eigen::VectorXd g = Eigen::VectorXd::Zero(family.dimension());
      if (j < last) {
        g[j] = 1.0 / theta[j];
      } else {
        g.setConstant(-1.0 / (1.0 - theta.sum()));
      }
      return g;
    }
    case FamilyKind::gaussian_iso:
      return vector_of(x) - theta;
    case FamilyKind::softmax_regression: {
      const auto& lf = labeled_of(x);
      Eigen::VectorXd residual = -class_probabilities(family, theta, lf.features);
      residual[lf.label] += 1.0;
      Eigen::VectorXd g(family.dimension());
      Eigen::Map<Eigen::MatrixXd>(g.data(), family.features(), family.classes()) =
          lf.features * residual.transpose();
      return g;
    }
  }
  return {};
}

Eigen::MatrixXd log_density_hessian(const ModelFamily& family, const ParameterVector& theta, const Sample& x) {
  require_interior(family, theta);
  require_support(family, x);
  const int d = family.dimension();
  switch (family.kind()) {
    case FamilyKind::categorical: {
      const int j = outcome_of(x);
      if (j < family.outcomes() - 1) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
        h(j, j) = -1.0 / (theta[j] * theta[j]);
        return h;
      }
      const double last = 1.0 - theta.sum();
      return Eigen::MatrixXd::Constant(d, d, -1.0 / (last * last));
    }
    case FamilyKind::gaussian_iso:
      return -Eigen::MatrixXd::Identity(d, d);
    case FamilyKind::softmax_regression: {
      const auto& lf = labeled_of(x);
      const Eigen::VectorXd p = class_probabilities(family, theta, lf.features);
      const Eigen::MatrixXd cov = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
      const Eigen::MatrixXd zz = lf.features * lf.features.transpose();
      const int pf = family.features();
      Eigen::MatrixXd h(d, d);
      for (int a = 0; a < family.classes(); ++a) {
        for (int b = 0; b < family.classes(); ++b) h.block(a * pf, b * pf, pf, pf) = -cov(a, b) * zz;
      }
      return h;
    }
  }
  return {};
}

std::vector<Sample> sample(const ModelFamily& family, const ParameterVector& theta, std::size_t n,
                           std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample(family, theta, n, rng);
}

std::vector<Sample> sample(const ModelFamily& family, const ParameterVector& theta, std::size_t n, Rng& rng) {
  family.validate(theta);
  std::vector<Sample> out;
  out.reserve(n);
  switch (family.kind()) {
    case FamilyKind::categorical: {
      const Eigen::VectorXd p = categorical_probabilities(theta).cwiseMax(0.0);
      for (std::size_t i = 0; i < n; ++i) out.emplace_back(static_cast<int>(draw_categorical(p, rng)));
      break;
    }
    case FamilyKind::gaussian_iso: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd v(family.dimension());
        for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = theta[k] + normal(rng);
        out.emplace_back(std::move(v));
      }
      break;
    }
    case FamilyKind::softmax_regression: {
      std::normal_distribution<double> normal(0.0, 1.0);
      const Eigen::MatrixXd* pool = family.feature_pool();
      for (std::size_t i = 0; i < n; ++i) {
        LabeledFeature lf;
        if (pool) {
          std::uniform_int_distribution<Eigen::Index> pick(0, pool->rows() - 1);
          lf.features = pool->row(pick(rng)).transpose();
        } else {
          lf.features.resize(family.features());
          for (Eigen::Index k = 0; k < lf.features.size(); ++k) lf.features[k] = normal(rng);
        }
        lf.label = static_cast<int>(draw_categorical(class_probabilities(family, theta, lf.features), rng));
        out.emplace_back(std::move(lf));
      }
      break;
    }
  }
  return out;
}

SufficientStatistic draw_statistic(const ModelFamily& family, const ParameterVector& theta, std::size_t n, Rng& rng) {
  family.validate(theta);
  SufficientStatistic stat;
  stat.count = static_cast<double>(n);
  switch (family.kind()) {
    case FamilyKind::categorical: {
      // Multinomial counts by sequential conditional binomials.
      const Eigen::VectorXd p = categorical_probabilities(theta).cwiseMax(0.0);
      stat.sum = Eigen::VectorXd::Zero(p.size());
      std::int64_t remaining = static_cast<std::int64_t>(n);
      double mass = p.sum();
      for (Eigen::Index j = 0; j + 1 < p.size() && remaining > 0; ++j) {
        const double ratio = mass > 0.0 ? std::clamp(p[j] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> binomial(remaining, ratio);
        const std::int64_t c = binomial(rng);
        stat.sum[j] = static_cast<double>(c);
        remaining -= c;
        mass -= p[j];
      }
      stat.sum[p.size() - 1] += static_cast<double>(remaining);
      return stat;
    }
    case FamilyKind::gaussian_iso: {
      std::normal_distribution<double> normal(0.0, 1.0);
      const double nn = static_cast<double>(n);
      const double spread = std::sqrt(nn);
      stat.sum.resize(family.dimension());
      for (Eigen::Index k = 0; k < stat.sum.size(); ++k) stat.sum[k] = nn * theta[k] + spread * normal(rng);
      return stat;
    }
    case FamilyKind::softmax_regression:
      break;
  }
  throw UnsupportedError("softmax_regression has no finite sufficient statistic");
}

SufficientStatistic statistic_of(const ModelFamily& family, std::span<const Sample> samples) {
  SufficientStatistic stat;
  stat.count = static_cast<double>(samples.size());
  switch (family.kind()) {
    case FamilyKind::categorical:
      stat.sum = Eigen::VectorXd::Zero(family.outcomes());
      for (const auto& x : samples) {
        require_support(family, x);
        stat.sum[outcome_of(x)] += 1.0;
      }
      return stat;
    case FamilyKind::gaussian_iso:
      stat.sum = Eigen::VectorXd::Zero(family.dimension());
      for (const auto& x : samples) {
        require_support(family, x);
        stat.sum += vector_of(x);
      }
      return stat;
    case FamilyKind::softmax_regression:
      break;
  }
  throw UnsupportedError("softmax_regression has no finite sufficient statistic");
}

}  // namespace uowq
