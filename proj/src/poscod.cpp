#include "scod/poscod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "scod/errors.hpp"
#include "scod/rng.hpp"

namespace scod {

namespace {

// Stable per-sample quantities for D = 1 + |a| + e^t and A = |a| + e^t.
struct CsmTerms {
  double log_d;      // log D
  double log_a_et;   // log A
  double et_over_d;  // e^t / D
  double et_over_a;  // e^t / A
  double inv_d;      // 1 / D
  double inv_a;      // 1 / A
};

CsmTerms csm_terms(double t, double abs_a) {
  CsmTerms out;
  if (t <= 0.0) {
    const double et = std::exp(t);
    const double d = 1.0 + abs_a + et;
    const double array = abs_a + et;
    out.log_d = std::log1p(abs_a + et);
    out.log_a_et = (abs_a == 0.0) ? t : std::log(array);
    out.et_over_d = et / d;
    out.et_over_a = et / array;
    out.inv_d = 1.0 / d;
    out.inv_a = 1.0 / array;
  } else {
    const double emt = std::exp(-t);
    out.log_d = t + std::log1p((1.0 + abs_a) * emt);
    out.log_a_et = t + std::log1p(abs_a * emt);
    out.et_over_d = 1.0 / (1.0 + (1.0 + abs_a) * emt);
    out.et_over_a = 1.0 / (1.0 + abs_a * emt);
    out.inv_d = emt * out.et_over_d;
    out.inv_a = emt * out.et_over_a;
  }
  return out;
}

void check_features_with_bias(const CsmParams& params, const Eigen::VectorXd& x) {
  if (x.size() != params.theta.size()) {
    throw std::invalid_argument("features_with_bias dimension does not match theta");
  }
  if (x[x.size() - 1] != 1.0) {
    throw std::invalid_argument("last entry of features_with_bias must be 1");
  }
}

double bce_loss_only(const Eigen::VectorXd& theta, double a,
                     const MixtureDataset& data) {
  const double abs_a = std::abs(a);
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::VectorXd t =
      (data.features * theta.head(theta.size() - 1)).array() + theta[theta.size() - 1];
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const CsmTerms terms = csm_terms(t[i], abs_a);
    total += data.is_id[i] ? terms.log_d : terms.log_d - terms.log_a_et;
  }
  return total / static_cast<double>(n);
}

}  // namespace

std::size_t MixtureDataset::count_id() const {
  return static_cast<std::size_t>(std::count(is_id.begin(), is_id.end(), std::uint8_t{1}));
}

std::size_t MixtureDataset::count_unlabeled() const { return size() - count_id(); }

double MixtureDataset::pi_u() const {
  return static_cast<double>(count_unlabeled()) / static_cast<double>(size());
}

double csm_posterior(const CsmParams& params, const Eigen::VectorXd& features_with_bias) {
  check_features_with_bias(params, features_with_bias);
  const double t = params.theta.dot(features_with_bias);
  return std::exp(-csm_terms(t, std::abs(params.a)).log_d);
}

BceResult bce_and_gradient(const CsmParams& params, const MixtureDataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (data.features.rows() != n) {
    throw std::invalid_argument("feature rows do not match origin labels");
  }
  if (params.theta.size() != data.features.cols() + 1) {
    throw std::invalid_argument("theta dimension does not match feature columns");
  }
  const double abs_a = std::abs(params.a);
  const double sign_a = (params.a > 0.0) - (params.a < 0.0);
  const Eigen::VectorXd w = params.theta.head(params.theta.size() - 1);
  const double bias = params.theta[params.theta.size() - 1];

  const Eigen::VectorXd t = (data.features * w).array() + bias;
  Eigen::VectorXd dt(n);
  double loss = 0.0;
  double grad_abs_a = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const CsmTerms terms = csm_terms(t[i], abs_a);
    if (data.is_id[i]) {
      loss += terms.log_d;
      dt[i] = terms.et_over_d;
      grad_abs_a += terms.inv_d;
    } else {
      loss += terms.log_d - terms.log_a_et;
      dt[i] = terms.et_over_d - terms.et_over_a;
      grad_abs_a += terms.inv_d - terms.inv_a;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  BceResult out;
  out.loss = loss * inv_n;
  out.grad_theta.resize(params.theta.size());
  out.grad_theta.head(w.size()) = (data.features.transpose() * dt) * inv_n;
  out.grad_theta[w.size()] = dt.sum() * inv_n;
  out.grad_a = sign_a * grad_abs_a * inv_n;
  return out;
}

CsmParams fit_csm(const MixtureDataset& data, const FitConfig& config) {
  if (data.size() == 0 || data.count_id() == 0 || data.count_unlabeled() == 0) {
    throw std::invalid_argument("fitting needs at least one ID and one unlabeled row");
  }
  if (!(config.step_size > 0.0) || !(config.grad_tolerance > 0.0)) {
    throw std::invalid_argument("step size and gradient tolerance must be positive");
  }
  const Eigen::Index d = data.features.cols();

  // Standardize columns; an exact reparameterization that conditions the
  // problem, undone on the fitted parameters below.
  Eigen::VectorXd mean = data.features.colwise().mean();
  Eigen::VectorXd scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (data.features.col(j).array() - mean[j]).square().sum() /
        static_cast<double>(data.features.rows());
    scale[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  MixtureDataset scaled;
  scaled.is_id = data.is_id;
  scaled.features = (data.features.rowwise() - mean.transpose()).array().rowwise() /
                    scale.transpose().array();

  CsmParams params;
  params.theta = Eigen::VectorXd::Zero(d + 1);
  params.a = config.fix_a_at_zero ? 0.0 : data.pi_u();

  BceResult cur = bce_and_gradient(params, scaled);
  if (!std::isfinite(cur.loss)) throw NumericalError("initial BCE is not finite");
  double eta = config.step_size;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double ga = config.fix_a_at_zero ? 0.0 : cur.grad_a;
    const double grad_sq = cur.grad_theta.squaredNorm() + ga * ga;
    if (std::sqrt(grad_sq) <= config.grad_tolerance) break;

    bool stepped = false;
    while (eta > 1e-18) {
      CsmParams cand;
      cand.theta = params.theta - eta * cur.grad_theta;
      cand.a = config.fix_a_at_zero ? 0.0 : params.a - eta * ga;
      const double cand_loss = bce_loss_only(cand.theta, cand.a, scaled);
      if (std::isfinite(cand_loss) && cand_loss <= cur.loss - 1e-4 * eta * grad_sq) {
        params = std::move(cand);
        cur = bce_and_gradient(params, scaled);
        if (!std::isfinite(cur.loss)) throw NumericalError("BCE diverged to non-finite value");
        eta = std::min(eta * 2.0, 1e6);
        stepped = true;
        break;
      }
      eta *= 0.5;
    }
    if (!stepped) break;  // no admissible step left: numerical optimum
  }

  // Undo standardization.
  CsmParams out;
  out.theta = Eigen::VectorXd::Zero(d + 1);
  double bias = params.theta[d];
  for (Eigen::Index j = 0; j < d; ++j) {
    out.theta[j] = params.theta[j] / scale[j];
    bias -= params.theta[j] * mean[j] / scale[j];
  }
  out.theta[d] = bias;
  out.a = params.a;
  return out;
}

PriorEstimate recover_prior(double a_hat, double pi_u) {
  if (!(pi_u > 0.0) || !(pi_u < 1.0)) {
    throw std::invalid_argument("pi_u must lie in (0, 1)");
  }
  const double abs_a = std::abs(a_hat);
  const double raw = 1.0 + abs_a - abs_a / pi_u;
  const double clamped = std::clamp(raw, kPriorClampFloor, 1.0);
  return PriorEstimate{clamped, clamped != raw};
}

double estimate_g(const CsmParams& params, double pi_u, double pi_o_tr_hat,
                  const Eigen::VectorXd& features_with_bias) {
  if (!(pi_o_tr_hat > 0.0)) {
    throw std::invalid_argument("pi_o_tr_hat must be positive");
  }
  if (!(pi_u > 0.0) || !(pi_u < 1.0)) {
    throw std::invalid_argument("pi_u must lie in (0, 1)");
  }
  check_features_with_bias(params, features_with_bias);
  const double t = params.theta.dot(features_with_bias);
  const CsmTerms terms = csm_terms(t, std::abs(params.a));
  // posterior odds (1 - p) / p collapse to |a| + e^t
  const double log_g =
      terms.log_a_et + std::log(1.0 - pi_u) - std::log(pi_u * pi_o_tr_hat);
  return std::exp(log_g);
}

PluginDecision PoscodModel::classify(const Eigen::VectorXd& x) const {
  return plugin_conditional_risk(posterior_source(x), loss);
}

double PoscodModel::conditional_risk(const Eigen::VectorXd& x) const {
  return classify(x).risk;
}

double PoscodModel::g_hat(const Eigen::VectorXd& x) const {
  Eigen::VectorXd xb(x.size() + 1);
  xb.head(x.size()) = x;
  xb[x.size()] = 1.0;
  return estimate_g(params, pi_u, prior.pi_o_tr, xb);
}

double PoscodModel::score(const Eigen::VectorXd& x) const {
  return linear_score(conditional_risk(x), g_hat(x), alpha, tpr_min);
}

PoscodModel run_poscod(const std::vector<PoscodLabeledSample>& id_data,
                       const std::vector<Eigen::VectorXd>& mixture_data,
                       double alpha, double tpr_min, const Eigen::MatrixXd& loss,
                       PosteriorSource posterior_source, const FitConfig& config) {
  if (id_data.empty() || mixture_data.empty()) {
    throw std::invalid_argument("run_poscod needs ID data and a nonempty mixture");
  }
  const auto d = id_data.front().features.size();
  const std::size_t m = id_data.size();
  const std::size_t n = mixture_data.size();

  MixtureDataset iu;
  iu.features.resize(static_cast<Eigen::Index>(m + n), d);
  iu.is_id.resize(m + n);
  std::vector<std::size_t> order(m + n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto engine = make_engine(config.seed, /*stream=*/0xF17);
  std::shuffle(order.begin(), order.end(), engine);
  for (std::size_t row = 0; row < order.size(); ++row) {
    const std::size_t src = order[row];
    if (src < m) {
      iu.features.row(static_cast<Eigen::Index>(row)) = id_data[src].features.transpose();
      iu.is_id[row] = 1;
    } else {
      iu.features.row(static_cast<Eigen::Index>(row)) = mixture_data[src - m].transpose();
      iu.is_id[row] = 0;
    }
  }

  PoscodModel model;
  model.pi_u = static_cast<double>(n) / static_cast<double>(n + m);
  model.params = fit_csm(iu, config);
  model.prior = recover_prior(model.params.a, model.pi_u);
  model.alpha = alpha;
  model.tpr_min = tpr_min;
  model.loss = loss;
  model.posterior_source = std::move(posterior_source);

  std::vector<double> id_scores;
  id_scores.reserve(m);
  for (const auto& sample : id_data) {
    id_scores.push_back(linear_score(model.conditional_risk(sample.features),
                                     model.g_hat(sample.features), alpha, tpr_min));
  }
  model.selector = calibrate_threshold(id_scores, tpr_min);
  return model;
}

}  // namespace scod
