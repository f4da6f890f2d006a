#include "scod/world.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "scod/errors.hpp"
#include "scod/rng.hpp"

namespace scod {

namespace {

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// log of prior_y * p(x | y) for every class
Eigen::VectorXd joint_log_densities(const SyntheticWorld& world, const Eigen::VectorXd& x) {
  const auto& classes = world.id_classes();
  Eigen::VectorXd out(classes.size());
  for (std::size_t y = 0; y < classes.size(); ++y) {
    out[static_cast<Eigen::Index>(y)] =
        std::log(classes[y].prior) + classes[y].component.log_density(x);
  }
  return out;
}

Eigen::VectorXd parse_vector(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) throw ConfigError(std::string("field '") + field + "' must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string("field '") + field + "' must hold numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const char* field) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string("field '") + field + "' must be a nonempty array of rows");
  }
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(std::string("field '") + field + "' has ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

GaussianComponent parse_component(const nlohmann::json& j) {
  if (!j.contains("mean") || !j.contains("cov_factor")) {
    throw ConfigError("component needs 'mean' and 'cov_factor'");
  }
  try {
    return GaussianComponent(parse_vector(j["mean"], "mean"),
                             parse_matrix(j["cov_factor"], "cov_factor"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad component: ") + e.what());
  }
}

}  // namespace

SyntheticWorld::SyntheticWorld(std::vector<IdClass> id_classes, GaussianComponent ood,
                               Eigen::MatrixXd loss, bool shared_covariance)
    : id_classes_(std::move(id_classes)),
      ood_(std::move(ood)),
      loss_(std::move(loss)),
      shared_covariance_(shared_covariance) {
  if (id_classes_.empty()) throw std::invalid_argument("world needs at least one ID class");
  double prior_sum = 0.0;
  for (const auto& cls : id_classes_) {
    if (!(cls.prior > 0.0) || !(cls.prior < 1.0 + 1e-12)) {
      throw std::invalid_argument("class priors must lie in (0, 1)");
    }
    if (cls.component.dim() != ood_.dim()) {
      throw std::invalid_argument("all components must share one dimension");
    }
    prior_sum += cls.prior;
  }
  if (std::abs(prior_sum - 1.0) > 1e-12) {
    throw std::invalid_argument("class priors must sum to 1");
  }
  const auto k = static_cast<Eigen::Index>(id_classes_.size());
  if (loss_.rows() != k || loss_.cols() != k) {
    throw std::invalid_argument("loss matrix must be |Y| x |Y|");
  }
  for (Eigen::Index y = 0; y < k; ++y) {
    for (Eigen::Index yp = 0; yp < k; ++yp) {
      const double v = loss_(y, yp);
      if (y == yp ? v != 0.0 : !(v > 0.0)) {
        throw std::invalid_argument("loss must be 0 on the diagonal and positive off it");
      }
    }
  }
  if (shared_covariance_) {
    for (const auto& cls : id_classes_) {
      if (!cls.component.same_factor_as(ood_)) {
        throw std::invalid_argument(
            "shared_covariance requires identical covariance factors everywhere");
      }
    }
  }
}

SyntheticWorld SyntheticWorld::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("world spec is not valid JSON: ") + e.what());
  }
  if (!j.contains("id_classes") || !j["id_classes"].is_array() || j["id_classes"].empty()) {
    throw ConfigError("world spec needs a nonempty 'id_classes' array");
  }
  std::vector<IdClass> classes;
  for (const auto& c : j["id_classes"]) {
    if (!c.contains("prior")) throw ConfigError("each id class needs a 'prior'");
    classes.push_back(IdClass{parse_component(c), c["prior"].get<double>()});
  }
  if (!j.contains("ood")) throw ConfigError("world spec needs an 'ood' component");
  if (!j.contains("loss")) throw ConfigError("world spec needs a 'loss' matrix");
  try {
    return SyntheticWorld(std::move(classes), parse_component(j["ood"]),
                          parse_matrix(j["loss"], "loss"),
                          j.value("shared_covariance", false));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid world spec: ") + e.what());
  }
}

SyntheticWorld SyntheticWorld::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open world spec: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

std::vector<LabeledSample> sample_id(const SyntheticWorld& world, std::size_t n,
                                     std::uint64_t seed) {
  auto engine = make_engine(seed, 0x1D);
  std::vector<double> priors;
  priors.reserve(world.id_classes().size());
  for (const auto& cls : world.id_classes()) priors.push_back(cls.prior);
  std::discrete_distribution<int> pick(priors.begin(), priors.end());

  std::vector<LabeledSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = pick(engine);
    out.push_back(LabeledSample{world.id_classes()[static_cast<std::size_t>(y)].component.sample(engine), y});
  }
  return out;
}

std::vector<Eigen::VectorXd> sample_mixture(const SyntheticWorld& world, std::size_t n,
                                            double pi_o_tr, std::uint64_t seed) {
  if (!(pi_o_tr >= 0.0) || !(pi_o_tr <= 1.0)) {
    throw std::invalid_argument("pi_o_tr must lie in [0, 1]");
  }
  auto engine = make_engine(seed, 0x00D);
  std::vector<double> priors;
  for (const auto& cls : world.id_classes()) priors.push_back(cls.prior);
  std::discrete_distribution<int> pick(priors.begin(), priors.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (unit(engine) < pi_o_tr) {
      out.push_back(world.ood().sample(engine));
    } else {
      const int y = pick(engine);
      out.push_back(world.id_classes()[static_cast<std::size_t>(y)].component.sample(engine));
    }
  }
  return out;
}

Eigen::VectorXd posterior(const SyntheticWorld& world, const Eigen::VectorXd& x) {
  if (x.size() != world.dim()) throw std::invalid_argument("feature dimension mismatch");
  Eigen::VectorXd logs = joint_log_densities(world, x);
  const double norm = log_sum_exp(logs);
  return (logs.array() - norm).exp();
}

double log_id_density(const SyntheticWorld& world, const Eigen::VectorXd& x) {
  if (x.size() != world.dim()) throw std::invalid_argument("feature dimension mismatch");
  return log_sum_exp(joint_log_densities(world, x));
}

double log_ood_density(const SyntheticWorld& world, const Eigen::VectorXd& x) {
  return world.ood().log_density(x);
}

BayesDecision bayes_classify(const SyntheticWorld& world, const Eigen::VectorXd& x) {
  const Eigen::VectorXd post = posterior(world, x);
  const auto decision = plugin_conditional_risk(post, world.loss());
  return BayesDecision{decision.label, decision.risk};
}

double likelihood_ratio(const SyntheticWorld& world, const Eigen::VectorXd& x) {
  return std::exp(log_ood_density(world, x) - log_id_density(world, x));
}

CsmParams analytic_csm_params(const SyntheticWorld& world, double pi_u, double pi_o_tr) {
  if (!world.shared_covariance() || world.num_classes() != 1) {
    throw DataError(
        "analytic CSM parameters need a shared-covariance world with a single ID class");
  }
  if (!(pi_u > 0.0) || !(pi_u < 1.0)) {
    throw std::invalid_argument("pi_u must lie in (0, 1)");
  }
  if (!(pi_o_tr > 0.0) || !(pi_o_tr <= 1.0)) {
    throw std::invalid_argument("pi_o_tr must lie in (0, 1]");
  }
  const auto& id = world.id_classes().front().component;
  const auto& ood = world.ood();
  const Eigen::Index d = id.dim();

  // First-principles expansion of the two Gaussian quadratic forms:
  //   log g(x) = 0.5 (mu_I^T C^-1 mu_I - mu_O^T C^-1 mu_O)
  //              + x^T C^-1 (mu_O - mu_I)
  // so exp(theta^T [x; 1]) = pi_u pi_o_tr / (1 - pi_u) * g(x) gives
  const Eigen::VectorXd weights = id.solve_covariance(ood.mean() - id.mean());
  const double quad_id = id.mean().dot(id.solve_covariance(id.mean()));
  const double quad_ood = ood.mean().dot(id.solve_covariance(ood.mean()));

  CsmParams params;
  params.theta = Eigen::VectorXd::Zero(d + 1);
  params.theta.head(d) = weights;
  params.theta[d] =
      std::log(pi_u * pi_o_tr / (1.0 - pi_u)) + 0.5 * (quad_id - quad_ood);
  params.a = pi_u * (1.0 - pi_o_tr) / (1.0 - pi_u);
  return params;
}

}  // namespace scod
