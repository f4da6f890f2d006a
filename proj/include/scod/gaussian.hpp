#pragma once

#include <Eigen/Dense>
#include <random>

namespace scod {

// Multivariate Gaussian parameterized by its mean and the lower-triangular
// Cholesky factor L of the covariance, C = L L^T. All density work stays in
// log-space; quadratic forms go through triangular solves against L.
class GaussianComponent {
 public:
  GaussianComponent(Eigen::VectorXd mean, Eigen::MatrixXd cov_factor);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov_factor() const { return cov_factor_; }

  double log_density(const Eigen::VectorXd& x) const;

  // mu + L z, z ~ N(0, I)
  Eigen::VectorXd sample(std::mt19937_64& engine) const;

  // C^{-1} v via two triangular solves
  Eigen::VectorXd solve_covariance(const Eigen::VectorXd& v) const;

  bool same_factor_as(const GaussianComponent& other) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_factor_;
  double log_det_factor_;  // sum of log diag(L)
};

}  // namespace scod
