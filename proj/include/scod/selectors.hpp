#pragma once

#include <Eigen/Dense>
#include <span>

namespace scod {

// Threshold selector; accepts scores below lambda, randomizes with
// probability tau on the boundary. Lower score = more acceptable.
struct Selector {
  double lambda = 0.0;
  double tau = 0.0;
};

// s(x) = r(x) + beta * g(x) with beta = alpha * tpr_min / (1 - alpha);
// degenerates to g(x) alone at alpha = 1.
double linear_score(double r, double g, double alpha, double tpr_min);
double linear_beta(double alpha, double tpr_min);

// SIRC combination in its native convention (higher = more acceptable):
// -(s1_max - s1) * (1 + exp(-b * (s2 - a))). Callers negate the result to
// enter the accept-if-<=-lambda convention.
double sirc_score(double s1, double s2, double s1_max, double a, double b);

struct PluginDecision {
  int label;
  double risk;
};

// Argmin of expected loss under the posterior; ties break to the lowest
// class index. With 0/1 loss this is the 1-MSP rule.
PluginDecision plugin_conditional_risk(const Eigen::VectorXd& posterior,
                                       const Eigen::MatrixXd& loss);

// Smallest observed score value lambda such that the empirical TPR of
// [s <= lambda] on id_scores reaches tpr_min. Deterministic: tau = 0.
Selector calibrate_threshold(std::span<const double> id_scores, double tpr_min);

// Stochastic acceptance; u is an externally supplied uniform variate.
bool accept(const Selector& selector, double score, double u);

}  // namespace scod
