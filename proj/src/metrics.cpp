#include "scod/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

namespace scod {

namespace {

double check_tpr_min(double tpr_min) {
  if (!(tpr_min > 0.0) || tpr_min > 1.0) {
    throw std::invalid_argument("tpr_min must lie in (0, 1]");
  }
  return tpr_min;
}

double query_min_risk(const std::vector<double>& tpr, const std::vector<double>& suffix,
                      double tpr_min) {
  auto it = std::lower_bound(tpr.begin(), tpr.end(), tpr_min - 1e-12);
  if (it == tpr.end()) --it;  // tpr reaches 1 at the top threshold
  return suffix[static_cast<std::size_t>(it - tpr.begin())];
}

}  // namespace

// The distinct observed scores are the only thresholds that matter: tpr,
// fpr and selective risk are step functions whose breakpoints all live
// here, so minimizing over this set equals minimizing over all real lambda.
ScoreSweep::ScoreSweep(std::span<const ScoredSample> samples) {
  std::vector<std::pair<double, std::uint32_t>> order;
  order.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    // +-inf is a valid (extreme) rank; only NaN has no place in the order
    if (std::isnan(s.score)) throw std::invalid_argument("scores must not be NaN");
    if (s.origin == SampleOrigin::kId) {
      ++id_count_;
    } else {
      ++ood_count_;
    }
    order.emplace_back(s.score, static_cast<std::uint32_t>(i));
  }
  if (id_count_ == 0) throw std::invalid_argument("need at least one ID sample");
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const double m = static_cast<double>(id_count_);
  const double n = static_cast<double>(ood_count_);
  std::size_t id_acc = 0;
  std::size_t ood_acc = 0;
  double loss_acc = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double value = order[i].first;
    for (; i < order.size() && order[i].first == value; ++i) {
      const auto& s = samples[order[i].second];
      if (s.origin == SampleOrigin::kId) {
        ++id_acc;
        loss_acc += s.loss;
      } else {
        ++ood_acc;
      }
    }
    lambda_.push_back(value);
    tpr_.push_back(static_cast<double>(id_acc) / m);
    fpr_.push_back(n > 0 ? static_cast<double>(ood_acc) / n : 0.0);
    sel_risk_.push_back(id_acc > 0 ? loss_acc / static_cast<double>(id_acc)
                                   : std::numeric_limits<double>::quiet_NaN());
  }
}

// suffix[j] = min SCOD risk over thresholds >= j; paired with the
// nondecreasing tpr array this answers every tpr_min query.
std::vector<double> ScoreSweep::suffix_min_risk(double alpha) const {
  std::vector<double> out(lambda_.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = out.size(); j-- > 0;) {
    const double risk = std::isnan(sel_risk_[j])
                            ? std::numeric_limits<double>::infinity()
                            : (1.0 - alpha) * sel_risk_[j] + alpha * fpr_[j];
    best = std::min(best, risk);
    out[j] = best;
  }
  return out;
}

double ScoreSweep::scod_risk_at_tpr(double alpha, double tpr_min) const {
  check_tpr_min(tpr_min);
  return query_min_risk(tpr_, suffix_min_risk(alpha), tpr_min);
}

std::vector<CurvePoint> ScoreSweep::scod_risk_curve(double alpha) const {
  const auto suffix = suffix_min_risk(alpha);
  const std::size_t m = id_count_;
  std::vector<CurvePoint> curve;
  curve.reserve(m);
  // merge the k/m levels against the nondecreasing tpr array in one pass
  std::size_t j = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(m);
    while (j + 1 < tpr_.size() && tpr_[j] < t - 1e-12) ++j;
    curve.push_back(CurvePoint{t, suffix[j]});
  }
  return curve;
}

double ScoreSweep::ausrt(double alpha) const {
  const auto curve = scod_risk_curve(alpha);
  return ausrt_from_curve(curve);
}

double ScoreSweep::ausrt(double alpha, std::span<const double> grid) const {
  if (grid.empty()) throw std::invalid_argument("empty tpr grid");
  const auto suffix = suffix_min_risk(alpha);
  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  double prev = 0.0;
  for (double t : grid) {
    check_tpr_min(t);
    if (t <= prev) throw std::invalid_argument("tpr grid must be strictly increasing");
    prev = t;
    curve.push_back(CurvePoint{t, query_min_risk(tpr_, suffix, t)});
  }
  return ausrt_from_curve(curve);
}

EmpiricalRates empirical_rates(std::span<const ScoredSample> samples, double lambda) {
  std::size_t m = 0, n = 0, id_acc = 0, ood_acc = 0;
  double loss_acc = 0.0;
  for (const auto& s : samples) {
    if (s.origin == SampleOrigin::kId) {
      ++m;
      if (s.score <= lambda) {
        ++id_acc;
        loss_acc += s.loss;
      }
    } else {
      ++n;
      if (s.score <= lambda) ++ood_acc;
    }
  }
  if (m == 0) throw std::invalid_argument("need at least one ID sample");
  EmpiricalRates rates;
  rates.tpr = static_cast<double>(id_acc) / static_cast<double>(m);
  rates.fpr_defined = n > 0;
  rates.fpr = n > 0 ? static_cast<double>(ood_acc) / static_cast<double>(n) : 0.0;
  if (id_acc > 0) rates.selective_risk = loss_acc / static_cast<double>(id_acc);
  return rates;
}

double scod_risk_at_tpr(std::span<const ScoredSample> samples, double alpha,
                        double tpr_min) {
  return ScoreSweep(samples).scod_risk_at_tpr(alpha, tpr_min);
}

std::vector<CurvePoint> scod_risk_curve(std::span<const ScoredSample> samples,
                                        double alpha) {
  return ScoreSweep(samples).scod_risk_curve(alpha);
}

double ausrt_from_curve(std::span<const CurvePoint> curve) {
  if (curve.empty()) throw std::invalid_argument("empty curve");
  if (curve.size() == 1) return curve.front().scod_risk;
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    area += (curve[i + 1].tpr_min - curve[i].tpr_min) *
            0.5 * (curve[i].scod_risk + curve[i + 1].scod_risk);
  }
  return area / (curve.back().tpr_min - curve.front().tpr_min);
}

double ausrt(std::span<const ScoredSample> samples, double alpha) {
  return ScoreSweep(samples).ausrt(alpha);
}

double ausrt(std::span<const ScoredSample> samples, double alpha,
             std::span<const double> grid) {
  return ScoreSweep(samples).ausrt(alpha, grid);
}

double auroc(std::span<const ScoredSample> samples) {
  std::vector<double> id_scores;
  std::vector<double> ood_scores;
  for (const auto& s : samples) {
    (s.origin == SampleOrigin::kId ? id_scores : ood_scores).push_back(s.score);
  }
  if (id_scores.empty() || ood_scores.empty()) {
    throw std::invalid_argument("auroc needs both ID and OOD samples");
  }
  std::sort(id_scores.begin(), id_scores.end());
  double total = 0.0;
  for (double o : ood_scores) {
    const auto lo = std::lower_bound(id_scores.begin(), id_scores.end(), o);
    const auto hi = std::upper_bound(id_scores.begin(), id_scores.end(), o);
    total += static_cast<double>(lo - id_scores.begin()) +
             0.5 * static_cast<double>(hi - lo);
  }
  return total / (static_cast<double>(id_scores.size()) *
                  static_cast<double>(ood_scores.size()));
}

double aurc(std::span<const ScoredSample> samples) {
  std::vector<const ScoredSample*> ids;
  for (const auto& s : samples) {
    if (s.origin == SampleOrigin::kId) ids.push_back(&s);
  }
  if (ids.empty()) throw std::invalid_argument("aurc needs at least one ID sample");
  std::sort(ids.begin(), ids.end(),
            [](const ScoredSample* a, const ScoredSample* b) { return a->score < b->score; });
  const std::size_t m = ids.size();
  std::vector<double> prefix_loss(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) prefix_loss[i + 1] = prefix_loss[i] + ids[i]->loss;

  // threshold at the k-th smallest score accepts the whole tie group
  std::vector<std::size_t> group_end(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && ids[j + 1]->score == ids[i]->score) ++j;
    for (std::size_t k = i; k <= j; ++k) group_end[k] = j + 1;
    i = j + 1;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t accepted = group_end[k];
    total += prefix_loss[accepted] / static_cast<double>(accepted);
  }
  return total / static_cast<double>(m);
}

}  // namespace scod
