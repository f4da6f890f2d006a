#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scod/gaussian.hpp"
#include "scod/poscod.hpp"

namespace scod {

inline constexpr int kOodLabel = -1;

struct LabeledSample {
  Eigen::VectorXd features;
  int label;  // class index, or kOodLabel for the OOD marker
};

struct IdClass {
  GaussianComponent component;
  double prior;
};

// Gaussian synthetic world: a class-conditional ID mixture, one OOD
// component, and a target loss matrix. Serves as the exact oracle for
// posteriors, conditional risks and the OOD/ID likelihood ratio.
class SyntheticWorld {
 public:
  SyntheticWorld(std::vector<IdClass> id_classes, GaussianComponent ood,
                 Eigen::MatrixXd loss, bool shared_covariance);

  static SyntheticWorld from_json_string(const std::string& text);
  static SyntheticWorld load(const std::string& path);

  int dim() const { return ood_.dim(); }
  int num_classes() const { return static_cast<int>(id_classes_.size()); }
  const std::vector<IdClass>& id_classes() const { return id_classes_; }
  const GaussianComponent& ood() const { return ood_; }
  const Eigen::MatrixXd& loss() const { return loss_; }
  bool shared_covariance() const { return shared_covariance_; }

 private:
  std::vector<IdClass> id_classes_;
  GaussianComponent ood_;
  Eigen::MatrixXd loss_;
  bool shared_covariance_;
};

std::vector<LabeledSample> sample_id(const SyntheticWorld& world, std::size_t n,
                                     std::uint64_t seed);

// Each sample is OOD with probability pi_o_tr, otherwise an unlabeled ID draw.
std::vector<Eigen::VectorXd> sample_mixture(const SyntheticWorld& world, std::size_t n,
                                            double pi_o_tr, std::uint64_t seed);

// Exact class posterior p_I(y | x).
Eigen::VectorXd posterior(const SyntheticWorld& world, const Eigen::VectorXd& x);

double log_id_density(const SyntheticWorld& world, const Eigen::VectorXd& x);
double log_ood_density(const SyntheticWorld& world, const Eigen::VectorXd& x);

struct BayesDecision {
  int label;
  double conditional_risk;
};

BayesDecision bayes_classify(const SyntheticWorld& world, const Eigen::VectorXd& x);

// g(x) = p_O(x) / p_I(x), evaluated as a log-difference.
double likelihood_ratio(const SyntheticWorld& world, const Eigen::VectorXd& x);

// Closed-form corrected-sigmoid parameters for a shared-covariance world
// with a single ID class; the training oracle for the poscod fit.
CsmParams analytic_csm_params(const SyntheticWorld& world, double pi_u, double pi_o_tr);

}  // namespace scod
