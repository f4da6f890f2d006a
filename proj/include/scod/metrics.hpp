#pragma once

#include <optional>
#include <span>
#include <vector>

namespace scod {

enum class SampleOrigin { kId, kOod };

struct ScoredSample {
  double score;
  SampleOrigin origin;
  double loss = 0.0;  // incurred loss if accepted; meaningful for ID only
};

struct EmpiricalRates {
  double tpr;
  double fpr;
  bool fpr_defined;  // false when the evaluation set has no OOD rows
  std::optional<double> selective_risk;  // empty when tpr = 0
};

struct CurvePoint {
  double tpr_min;
  double scod_risk;
};

// Rates of the selector [score <= lambda] on the evaluation sample.
EmpiricalRates empirical_rates(std::span<const ScoredSample> samples, double lambda);

// Threshold sweep over one fixed score assignment: the distinct observed
// scores ascending, with cumulative tpr/fpr/selective risk. Queries for
// different alpha or tpr_min share the single O(n log n) sort.
class ScoreSweep {
 public:
  explicit ScoreSweep(std::span<const ScoredSample> samples);

  double scod_risk_at_tpr(double alpha, double tpr_min) const;
  std::vector<CurvePoint> scod_risk_curve(double alpha) const;
  double ausrt(double alpha) const;
  double ausrt(double alpha, std::span<const double> grid) const;
  std::size_t id_count() const { return id_count_; }

 private:
  std::vector<double> suffix_min_risk(double alpha) const;

  std::vector<double> lambda_;    // distinct score values, ascending
  std::vector<double> tpr_;      // nondecreasing
  std::vector<double> fpr_;
  std::vector<double> sel_risk_;  // accepted-ID mean loss; NaN while no ID accepted
  std::size_t id_count_ = 0;
  std::size_t ood_count_ = 0;
};

// min over thresholds of (1-alpha) R_S + alpha fpr subject to tpr >= tpr_min;
// exact discrete minimum over the observed score values.
double scod_risk_at_tpr(std::span<const ScoredSample> samples, double alpha,
                        double tpr_min);

// SCOD risk at every achievable TPR level k/m, k = 1..m.
std::vector<CurvePoint> scod_risk_curve(std::span<const ScoredSample> samples,
                                        double alpha);

// Trapezoidal area of the SCOD-risk curve, normalized by the grid span.
// Default grid: all achievable empirical TPR levels.
double ausrt(std::span<const ScoredSample> samples, double alpha);
double ausrt(std::span<const ScoredSample> samples, double alpha,
             std::span<const double> grid);
double ausrt_from_curve(std::span<const CurvePoint> curve);

// P(s_ID < s_OOD) + 0.5 P(s_ID = s_OOD); lower score = more ID-like.
double auroc(std::span<const ScoredSample> samples);

// Mean selective risk over coverage levels k/m with thresholds at the
// sorted ID scores; uses ID rows only.
double aurc(std::span<const ScoredSample> samples);

}  // namespace scod
