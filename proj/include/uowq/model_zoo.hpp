#pragma once

// Parametric families on which the transfer analysis is exactly checkable.
//
// Parameter layouts:
//   categorical(m)            theta = (p_1, ..., p_{m-1}); p_m = 1 - sum(theta), d = m - 1
//   gaussian_iso(d)           theta = mean, covariance fixed to the identity
//   softmax_regression(p, c)  theta = c blocks of p weights, logit_k = theta[k*p : (k+1)*p] . z
//
// The softmax family models P(y | z) only. Feature vectors are treated as fixed data: the
// sampler draws them from an attached feature pool, or from N(0, I_p) when none is attached.

#include "uowq/random.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace uowq {

using ParameterVector = Eigen::VectorXd;

struct LabeledFeature {
  Eigen::VectorXd features;
  int label = 0;
};

// Outcome index (categorical), real vector (Gaussian), or (z, y) pair (softmax regression).
using Sample = std::variant<int, Eigen::VectorXd, LabeledFeature>;

// Everything a closed-form MLE needs from a batch of samples: the sample count and the
// per-outcome counts (categorical, length m) or the sum of observations (Gaussian, length d).
struct SufficientStatistic {
  double count = 0.0;
  Eigen::VectorXd sum;
};

enum class FamilyKind { categorical, gaussian_iso, softmax_regression };

// Smallest probability a categorical parameter may assign when scores or Fisher
// information are requested.
inline constexpr double kMinProbability = 1e-9;

class ModelFamily {
 public:
  static ModelFamily categorical(int outcomes);
  static ModelFamily gaussian_iso(int dim);
  static ModelFamily softmax_regression(int features, int classes,
                                        std::shared_ptr<const Eigen::MatrixXd> feature_pool = {});

  FamilyKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;
  int dimension() const noexcept { return dimension_; }
  int outcomes() const noexcept { return outcomes_; }
  int features() const noexcept { return features_; }
  int classes() const noexcept { return classes_; }
  const Eigen::MatrixXd* feature_pool() const noexcept { return feature_pool_.get(); }
  bool has_closed_form() const noexcept { return kind_ != FamilyKind::softmax_regression; }

  // Throws ParameterError unless theta has the right length, finite entries and (categorical)
  // lies on the closed probability simplex.
  void validate(const ParameterVector& theta) const;
  // Categorical: every probability >= min_probability. Other families: validate() passes.
  bool is_interior(const ParameterVector& theta, double min_probability = kMinProbability) const;
  bool in_support(const Sample& x) const;

 private:
  ModelFamily(FamilyKind kind, int dimension) : kind_(kind), dimension_(dimension) {}

  FamilyKind kind_;
  int dimension_;
  int outcomes_ = 0;
  int features_ = 0;
  int classes_ = 0;
  std::shared_ptr<const Eigen::MatrixXd> feature_pool_;
};

double log_density(const ModelFamily& family, const ParameterVector& theta, const Sample& x);

// Gradient of log_density with respect to theta.
Eigen::VectorXd score(const ModelFamily& family, const ParameterVector& theta, const Sample& x);

// Hessian of log_density with respect to theta.
Eigen::MatrixXd log_density_hessian(const ModelFamily& family, const ParameterVector& theta,
                                    const Sample& x);

std::vector<Sample> sample(const ModelFamily& family, const ParameterVector& theta, std::size_t n,
                           std::uint64_t seed);
std::vector<Sample> sample(const ModelFamily& family, const ParameterVector& theta, std::size_t n,
                           Rng& rng);

// Draws the sufficient statistic of n i.i.d. samples directly (multinomial counts, or a
// Gaussian sum), with exactly the law of statistic_of(sample(...)).
SufficientStatistic draw_statistic(const ModelFamily& family, const ParameterVector& theta,
                                   std::size_t n, Rng& rng);
SufficientStatistic statistic_of(const ModelFamily& family, std::span<const Sample> samples);

// Full probability vector (length m) of a categorical parameter.
Eigen::VectorXd categorical_probabilities(const ParameterVector& theta);
ParameterVector categorical_parameters(const Eigen::VectorXd& probabilities);

// Class probabilities softmax(W z) of the softmax-regression family.
Eigen::VectorXd class_probabilities(const ModelFamily& family, const ParameterVector& theta,
                                    const Eigen::Ref<const Eigen::VectorXd>& features);

}  // namespace uowq
