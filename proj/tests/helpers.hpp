#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "scod/metrics.hpp"
#include "scod/world.hpp"

// Test-only brute-force oracles and world builders. Everything here stays
// independent of the library's sweep/prefix-sum implementations.
namespace scod::testing {

// O(n^2) SCOD risk: scan every observed threshold, recompute rates from
// scratch, keep the feasible minimum.
inline double brute_scod_risk_at_tpr(std::span<const ScoredSample> samples, double alpha,
                                     double tpr_min) {
  std::vector<double> thresholds;
  std::size_t m = 0, n = 0;
  for (const auto& s : samples) {
    thresholds.push_back(s.score);
    (s.origin == SampleOrigin::kId ? m : n)++;
  }
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : thresholds) {
    std::size_t id_acc = 0, ood_acc = 0;
    double loss_acc = 0.0;
    for (const auto& s : samples) {
      if (s.score > lambda) continue;
      if (s.origin == SampleOrigin::kId) {
        ++id_acc;
        loss_acc += s.loss;
      } else {
        ++ood_acc;
      }
    }
    const double tpr = static_cast<double>(id_acc) / static_cast<double>(m);
    if (tpr < tpr_min - 1e-12 || id_acc == 0) continue;
    const double fpr = n > 0 ? static_cast<double>(ood_acc) / static_cast<double>(n) : 0.0;
    const double rs = loss_acc / static_cast<double>(id_acc);
    best = std::min(best, (1.0 - alpha) * rs + alpha * fpr);
  }
  return best;
}

inline double brute_ausrt(std::span<const ScoredSample> samples, double alpha) {
  std::size_t m = 0;
  for (const auto& s : samples) m += s.origin == SampleOrigin::kId;
  std::vector<double> risk;
  std::vector<double> tpr;
  for (std::size_t k = 1; k <= m; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(m);
    tpr.push_back(t);
    risk.push_back(brute_scod_risk_at_tpr(samples, alpha, t));
  }
  if (m == 1) return risk.front();
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    area += (tpr[i + 1] - tpr[i]) * 0.5 * (risk[i] + risk[i + 1]);
  }
  return area / (tpr.back() - tpr.front());
}

inline double brute_auroc(std::span<const ScoredSample> samples) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (const auto& id : samples) {
    if (id.origin != SampleOrigin::kId) continue;
    for (const auto& ood : samples) {
      if (ood.origin != SampleOrigin::kOod) continue;
      ++pairs;
      if (id.score < ood.score) {
        total += 1.0;
      } else if (id.score == ood.score) {
        total += 0.5;
      }
    }
  }
  return total / static_cast<double>(pairs);
}

inline double brute_aurc(std::span<const ScoredSample> samples) {
  std::vector<double> id_scores;
  for (const auto& s : samples) {
    if (s.origin == SampleOrigin::kId) id_scores.push_back(s.score);
  }
  std::sort(id_scores.begin(), id_scores.end());
  const std::size_t m = id_scores.size();
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double lambda = id_scores[k];
    std::size_t acc = 0;
    double loss_acc = 0.0;
    for (const auto& s : samples) {
      if (s.origin == SampleOrigin::kId && s.score <= lambda) {
        ++acc;
        loss_acc += s.loss;
      }
    }
    total += loss_acc / static_cast<double>(acc);
  }
  return total / static_cast<double>(m);
}

// Random evaluation instance with duplicate-prone integer-grid scores and
// 0/1 losses, so oracle comparisons stay exactly representable.
inline std::vector<ScoredSample> random_instance(std::mt19937_64& engine,
                                                 std::size_t max_size = 60) {
  std::uniform_int_distribution<std::size_t> size_dist(1, max_size);
  std::uniform_int_distribution<int> score_dist(-8, 8);
  std::bernoulli_distribution is_ood(0.4);
  std::bernoulli_distribution wrong(0.3);
  const std::size_t n = size_dist(engine);
  std::vector<ScoredSample> out;
  out.reserve(n);
  bool has_id = false;
  for (std::size_t i = 0; i < n; ++i) {
    ScoredSample s;
    s.score = 0.5 * score_dist(engine);
    if (!has_id || !is_ood(engine)) {
      s.origin = SampleOrigin::kId;
      s.loss = wrong(engine) ? 1.0 : 0.0;
      has_id = true;
    } else {
      s.origin = SampleOrigin::kOod;
      s.loss = 0.0;
    }
    out.push_back(s);
  }
  return out;
}

inline double spearman(std::span<const double> a, std::span<const double> b) {
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t pos = 0; pos < idx.size(); ++pos) r[idx[pos]] = static_cast<double>(pos);
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  return cov / std::sqrt(va * vb);
}

inline Eigen::MatrixXd zero_one_loss(int k) {
  Eigen::MatrixXd loss = Eigen::MatrixXd::Ones(k, k);
  loss.diagonal().setZero();
  return loss;
}

// Two symmetric 1D classes at +-1, unit variance, equal priors.
inline SyntheticWorld symmetric_1d_world(Eigen::MatrixXd loss = zero_one_loss(2)) {
  Eigen::VectorXd mu_pos(1), mu_neg(1), mu_ood(1);
  mu_pos << 1.0;
  mu_neg << -1.0;
  mu_ood << 3.0;
  Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(1, 1);
  std::vector<IdClass> classes;
  classes.push_back(IdClass{GaussianComponent(mu_pos, unit), 0.5});
  classes.push_back(IdClass{GaussianComponent(mu_neg, unit), 0.5});
  return SyntheticWorld(std::move(classes), GaussianComponent(mu_ood, unit),
                        std::move(loss), false);
}

// Single ID Gaussian vs offset OOD Gaussian with one shared covariance
// factor; the regime where the analytic corrected-sigmoid params are exact.
inline SyntheticWorld shared_cov_world(int d, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd mu_id(d), mu_ood(d);
  for (int i = 0; i < d; ++i) {
    mu_id[i] = normal(engine);
    mu_ood[i] = mu_id[i] + 1.0 + 0.5 * normal(engine);
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) a(i, j) = 0.3 * normal(engine);
  }
  Eigen::MatrixXd cov = a * a.transpose() + Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd factor = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  std::vector<IdClass> classes;
  classes.push_back(IdClass{GaussianComponent(mu_id, factor), 1.0});
  return SyntheticWorld(std::move(classes), GaussianComponent(mu_ood, factor),
                        zero_one_loss(1), true);
}

// Multi-class Gaussian world; shared_factor forces one covariance everywhere.
inline SyntheticWorld random_world(int d, int num_classes, std::uint64_t seed,
                                   bool shared_factor = false) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.2, 1.0);

  auto random_factor = [&]() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < i; ++j) a(i, j) = 0.25 * normal(engine);
      a(i, i) = unit(engine);
    }
    return a;
  };
  const Eigen::MatrixXd shared = random_factor();

  std::vector<IdClass> classes;
  std::vector<double> raw(num_classes);
  double total = 0.0;
  for (double& p : raw) {
    p = unit(engine);
    total += p;
  }
  for (int k = 0; k < num_classes; ++k) {
    Eigen::VectorXd mu(d);
    for (int i = 0; i < d; ++i) mu[i] = 2.5 * normal(engine);
    classes.push_back(IdClass{
        GaussianComponent(mu, shared_factor ? shared : random_factor()), raw[k] / total});
  }
  Eigen::VectorXd mu_ood(d);
  for (int i = 0; i < d; ++i) mu_ood[i] = 2.5 * normal(engine) + 1.5;
  return SyntheticWorld(std::move(classes),
                        GaussianComponent(mu_ood, shared_factor ? shared : random_factor()),
                        zero_one_loss(num_classes), shared_factor);
}

// Oracle-scored evaluation sample: ID and OOD rows with exact r/g columns.
struct OracleEval {
  std::vector<ScoredSample> base;      // origins + losses, score unset
  std::vector<double> r;
  std::vector<double> g;
};

inline OracleEval oracle_eval(const SyntheticWorld& world, std::size_t n_id, std::size_t n_ood,
                              std::uint64_t seed) {
  OracleEval out;
  const auto ids = sample_id(world, n_id, seed);
  for (const auto& s : ids) {
    const BayesDecision d = bayes_classify(world, s.features);
    out.base.push_back(
        ScoredSample{0.0, SampleOrigin::kId, world.loss()(s.label, d.label)});
    out.r.push_back(d.conditional_risk);
    out.g.push_back(likelihood_ratio(world, s.features));
  }
  const auto oods = sample_mixture(world, n_ood, 1.0, seed + 1);
  for (const auto& x : oods) {
    const BayesDecision d = bayes_classify(world, x);
    out.base.push_back(ScoredSample{0.0, SampleOrigin::kOod, 0.0});
    out.r.push_back(d.conditional_risk);
    out.g.push_back(likelihood_ratio(world, x));
  }
  return out;
}

inline std::vector<ScoredSample> with_scores(const OracleEval& eval,
                                             const std::vector<double>& scores) {
  std::vector<ScoredSample> out = eval.base;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].score = scores[i];
  return out;
}

}  // namespace scod::testing
