#include "scod/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scod {

GaussianComponent::GaussianComponent(Eigen::VectorXd mean, Eigen::MatrixXd cov_factor)
    : mean_(std::move(mean)), cov_factor_(std::move(cov_factor)) {
  if (cov_factor_.rows() != cov_factor_.cols()) {
    throw std::invalid_argument("covariance factor must be square");
  }
  if (mean_.size() != cov_factor_.rows()) {
    throw std::invalid_argument("mean dimension does not match covariance factor");
  }
  log_det_factor_ = 0.0;
  for (int i = 0; i < cov_factor_.rows(); ++i) {
    if (!(cov_factor_(i, i) > 0.0)) {
      throw std::invalid_argument("covariance factor needs a strictly positive diagonal");
    }
    log_det_factor_ += std::log(cov_factor_(i, i));
    for (int j = i + 1; j < cov_factor_.cols(); ++j) {
      if (cov_factor_(i, j) != 0.0) {
        throw std::invalid_argument("covariance factor must be lower triangular");
      }
    }
  }
}

double GaussianComponent::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  // solve L y = x - mu; quadratic form is |y|^2
  Eigen::VectorXd y =
      cov_factor_.triangularView<Eigen::Lower>().solve(x - mean_);
  const double d = static_cast<double>(mean_.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi) - log_det_factor_ -
         0.5 * y.squaredNorm();
}

Eigen::VectorXd GaussianComponent::sample(std::mt19937_64& engine) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(mean_.size());
  for (int i = 0; i < z.size(); ++i) z[i] = normal(engine);
  return mean_ + cov_factor_.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd GaussianComponent::solve_covariance(const Eigen::VectorXd& v) const {
  Eigen::VectorXd y = cov_factor_.triangularView<Eigen::Lower>().solve(v);
  return cov_factor_.transpose().triangularView<Eigen::Upper>().solve(y);
}

bool GaussianComponent::same_factor_as(const GaussianComponent& other) const {
  return cov_factor_.rows() == other.cov_factor_.rows() &&
         cov_factor_ == other.cov_factor_;
}

}  // namespace scod
