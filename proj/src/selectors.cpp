#include "scod/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace scod {

double linear_beta(double alpha, double tpr_min) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  return alpha * tpr_min / (1.0 - alpha);
}

double linear_score(double r, double g, double alpha, double tpr_min) {
  if (alpha == 1.0) return g;
  return r + linear_beta(alpha, tpr_min) * g;
}

double sirc_score(double s1, double s2, double s1_max, double a, double b) {
  const double gap = s1_max - s1;
  // a zero gap is the best attainable score even when the exp term overflows
  if (gap == 0.0) return 0.0;
  return -gap * (1.0 + std::exp(-b * (s2 - a)));
}

PluginDecision plugin_conditional_risk(const Eigen::VectorXd& posterior,
                                       const Eigen::MatrixXd& loss) {
  const int k = static_cast<int>(posterior.size());
  if (loss.rows() != k || loss.cols() != k) {
    throw std::invalid_argument("loss matrix does not match posterior size");
  }
  double total = 0.0;
  for (int y = 0; y < k; ++y) {
    if (!(posterior[y] >= 0.0) || !std::isfinite(posterior[y])) {
      throw std::invalid_argument("posterior entries must be finite and nonnegative");
    }
    total += posterior[y];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("posterior must sum to 1");
  }
  PluginDecision best{0, std::numeric_limits<double>::infinity()};
  for (int cand = 0; cand < k; ++cand) {
    double expected = 0.0;
    for (int y = 0; y < k; ++y) expected += posterior[y] * loss(y, cand);
    if (expected < best.risk) best = {cand, expected};
  }
  return best;
}

Selector calibrate_threshold(std::span<const double> id_scores, double tpr_min) {
  if (id_scores.empty()) {
    throw std::invalid_argument("cannot calibrate on an empty score set");
  }
  if (!(tpr_min > 0.0) || tpr_min > 1.0) {
    throw std::invalid_argument("tpr_min must lie in (0, 1]");
  }
  std::vector<double> sorted(id_scores.begin(), id_scores.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = sorted.size();
  // smallest k with k/m >= tpr_min; the 1e-12 slack absorbs representation
  // error in tpr_min values like 2/3
  auto k = static_cast<std::size_t>(std::ceil(tpr_min * static_cast<double>(m) - 1e-12));
  if (k == 0) k = 1;
  if (k > m) k = m;
  return Selector{sorted[k - 1], 0.0};
}

bool accept(const Selector& selector, double score, double u) {
  if (score < selector.lambda) return true;
  if (score == selector.lambda) return u < selector.tau;
  return false;
}

}  // namespace scod
