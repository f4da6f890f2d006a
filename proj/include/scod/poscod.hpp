#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "scod/selectors.hpp"

namespace scod {

// Corrected-sigmoid parameters: weights plus bias (last entry of theta) and
// the additive correction a, used as |a| inside the model.
struct CsmParams {
  Eigen::VectorXd theta;  // d + 1 entries, bias last
  double a = 0.0;
};

// ID-vs-unlabeled training sequence. Row i of features pairs with is_id[i].
struct MixtureDataset {
  Eigen::MatrixXd features;     // N x d
  std::vector<std::uint8_t> is_id;

  std::size_t size() const { return is_id.size(); }
  std::size_t count_id() const;
  std::size_t count_unlabeled() const;
  double pi_u() const;  // unlabeled fraction n / (n + m)
};

struct FitConfig {
  double step_size = 1.0;
  int max_epochs = 5000;
  double grad_tolerance = 1e-6;  // well below the statistical error at desk scale
  std::uint64_t seed = 0;
  bool fix_a_at_zero = false;  // standard-sigmoid baseline
};

// p(z = I | x) = 1 / (1 + |a| + exp(theta^T [phi(x); 1])), overflow-safe.
double csm_posterior(const CsmParams& params, const Eigen::VectorXd& features_with_bias);

struct BceResult {
  double loss;
  Eigen::VectorXd grad_theta;
  double grad_a;
};

// Mean binary cross-entropy of the corrected sigmoid over the dataset and
// its exact analytic gradient. d|a|/da uses the subgradient 0 at a = 0.
BceResult bce_and_gradient(const CsmParams& params, const MixtureDataset& data);

// Full-batch gradient descent with Armijo backtracking line search.
// theta starts at 0; a starts at pi_u (or stays pinned at 0 when
// fix_a_at_zero is set).
CsmParams fit_csm(const MixtureDataset& data, const FitConfig& config);

struct PriorEstimate {
  double pi_o_tr;
  bool clamped;
};

// pi_o_tr = 1 + |a| - |a| / pi_u, clamped into [1e-3, 1].
PriorEstimate recover_prior(double a_hat, double pi_u);

inline constexpr double kPriorClampFloor = 1e-3;

// OOD/ID likelihood-ratio estimate: posterior odds times
// (1 - pi_u) / (pi_u * pi_o_tr_hat); the additive correction term is
// omitted, absorbed by the selector threshold.
double estimate_g(const CsmParams& params, double pi_u, double pi_o_tr_hat,
                  const Eigen::VectorXd& features_with_bias);

using PosteriorSource = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct PoscodModel {
  CsmParams params;
  double pi_u;
  PriorEstimate prior;
  double alpha;
  double tpr_min;
  Eigen::MatrixXd loss;
  PosteriorSource posterior_source;
  Selector selector;

  PluginDecision classify(const Eigen::VectorXd& x) const;
  double conditional_risk(const Eigen::VectorXd& x) const;
  double g_hat(const Eigen::VectorXd& x) const;
  double score(const Eigen::VectorXd& x) const;
};

struct PoscodLabeledSample {
  Eigen::VectorXd features;
  int label;
};

// End-to-end pipeline: plugin Bayes risk from posterior_source, shuffled
// ID-vs-unlabeled sequence, corrected-sigmoid fit, prior recovery, linear
// score, threshold calibration on the ID sample.
PoscodModel run_poscod(const std::vector<PoscodLabeledSample>& id_data,
                       const std::vector<Eigen::VectorXd>& mixture_data,
                       double alpha, double tpr_min, const Eigen::MatrixXd& loss,
                       PosteriorSource posterior_source, const FitConfig& config);

}  // namespace scod
