#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "scod/errors.hpp"
#include "scod/poscod.hpp"
#include "scod/world.hpp"

using namespace scod;
using namespace scod::testing;

namespace {

Eigen::VectorXd with_bias(std::initializer_list<double> values) {
  Eigen::VectorXd v(values.size() + 1);
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  v[i] = 1.0;
  return v;
}

MixtureDataset random_dataset(std::mt19937_64& engine, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.5);
  MixtureDataset data;
  data.features.resize(n, d);
  data.is_id.resize(static_cast<std::size_t>(n));
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = normal(engine);
    data.is_id[static_cast<std::size_t>(i)] = coin(engine) ? 1 : 0;
  }
  data.is_id[0] = 1;  // keep both partitions nonempty
  data.is_id[1] = 0;
  return data;
}

// Training material from a shared-covariance world: m ID rows + n mixture
// rows at the given training prior.
MixtureDataset world_dataset(const SyntheticWorld& world, std::size_t m, std::size_t n,
                             double pi_o_tr, std::uint64_t seed) {
  const auto ids = sample_id(world, m, seed);
  const auto mix = sample_mixture(world, n, pi_o_tr, seed + 1);
  MixtureDataset data;
  data.features.resize(static_cast<Eigen::Index>(m + n), world.dim());
  data.is_id.resize(m + n);
  for (std::size_t i = 0; i < m; ++i) {
    data.features.row(static_cast<Eigen::Index>(i)) = ids[i].features.transpose();
    data.is_id[i] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    data.features.row(static_cast<Eigen::Index>(m + i)) = mix[i].transpose();
    data.is_id[m + i] = 0;
  }
  return data;
}

}  // namespace

TEST_CASE("csm_posterior") {
  CsmParams zero{Eigen::VectorXd::Zero(2), 0.0};
  CHECK(csm_posterior(zero, with_bias({0.3})) == doctest::Approx(0.5).epsilon(1e-12));

  CsmParams corrected{Eigen::VectorXd::Zero(2), 1.0};
  CHECK(csm_posterior(corrected, with_bias({-2.0})) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  CsmParams steep{Eigen::VectorXd::Zero(2), 0.2};
  steep.theta << 500.0, 0.0;
  CHECK(csm_posterior(steep, with_bias({2.0})) == doctest::Approx(0.0));
  CHECK(csm_posterior(steep, with_bias({-2.0})) == doctest::Approx(1.0 / 1.2).epsilon(1e-12));

  CHECK_THROWS_AS(csm_posterior(zero, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  Eigen::VectorXd no_bias(2);
  no_bias << 1.0, 0.5;
  CHECK_THROWS_AS(csm_posterior(zero, no_bias), std::invalid_argument);
}

TEST_CASE("bce at zero parameters on balanced data is log 2") {
  std::mt19937_64 engine(3);
  auto data = random_dataset(engine, 64, 2);
  CsmParams params{Eigen::VectorXd::Zero(3), 0.0};
  const auto result = bce_and_gradient(params, data);
  CHECK(result.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 engine(17);
  std::normal_distribution<double> normal(0.0, 0.8);
  std::uniform_int_distribution<int> dim_dist(1, 8);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = dim_dist(engine);
    auto data = random_dataset(engine, 40, d);
    CsmParams params;
    params.theta.resize(d + 1);
    for (Eigen::Index i = 0; i <= d; ++i) params.theta[i] = normal(engine);
    params.a = std::abs(normal(engine)) + 0.05;  // stay off the |a| kink

    const auto analytic = bce_and_gradient(params, data);

    auto loss_at = [&](const CsmParams& p) { return bce_and_gradient(p, data).loss; };
    for (Eigen::Index i = 0; i <= d; ++i) {
      CsmParams up = params, dn = params;
      up.theta[i] += h;
      dn.theta[i] -= h;
      const double fd = (loss_at(up) - loss_at(dn)) / (2.0 * h);
      CHECK(analytic.grad_theta[i] ==
            doctest::Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::abs(fd))));
    }
    CsmParams up = params, dn = params;
    up.a += h;
    dn.a -= h;
    const double fd_a = (loss_at(up) - loss_at(dn)) / (2.0 * h);
    CHECK(analytic.grad_a == doctest::Approx(fd_a).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("grad_a uses the zero subgradient at a = 0") {
  std::mt19937_64 engine(5);
  auto data = random_dataset(engine, 32, 2);
  CsmParams params{Eigen::VectorXd::Zero(3), 0.0};
  const auto result = bce_and_gradient(params, data);
  CHECK(result.grad_a == 0.0);
}

TEST_CASE("fit_csm") {
  SUBCASE("partition preconditions") {
    MixtureDataset no_u;
    no_u.features = Eigen::MatrixXd::Zero(3, 1);
    no_u.is_id = {1, 1, 1};
    CHECK_THROWS_AS(fit_csm(no_u, FitConfig{}), std::invalid_argument);
  }

  SUBCASE("recovers the analytic parameters on a shared-covariance world") {
    const auto world = shared_cov_world(2, 31);
    const double pi_o_tr = 0.5;
    const std::size_t half = 30000;
    const auto data = world_dataset(world, half, half, pi_o_tr, 8);
    const auto fitted = fit_csm(data, FitConfig{});
    const auto truth = analytic_csm_params(world, 0.5, pi_o_tr);
    for (Eigen::Index i = 0; i < truth.theta.size(); ++i) {
      CHECK(fitted.theta[i] == doctest::Approx(truth.theta[i]).scale(1.0).epsilon(0.08));
    }
    CHECK(std::abs(fitted.a) == doctest::Approx(truth.a).scale(1.0).epsilon(0.08));
  }

  SUBCASE("clean OOD mixture drives a toward zero") {
    const auto world = shared_cov_world(2, 33);
    const auto data = world_dataset(world, 30000, 30000, 1.0, 9);
    const auto fitted = fit_csm(data, FitConfig{});
    CHECK(std::abs(fitted.a) < 0.05);
  }

  SUBCASE("descent: final loss never exceeds initial loss") {
    std::mt19937_64 engine(21);
    for (int trial = 0; trial < 5; ++trial) {
      auto data = random_dataset(engine, 200, 3);
      CsmParams init{Eigen::VectorXd::Zero(4), data.pi_u()};
      const double initial = bce_and_gradient(init, data).loss;
      const auto fitted = fit_csm(data, FitConfig{});
      CHECK(bce_and_gradient(fitted, data).loss <= initial + 1e-12);
    }
  }

  SUBCASE("fix_a_at_zero keeps a pinned") {
    std::mt19937_64 engine(22);
    auto data = random_dataset(engine, 100, 2);
    FitConfig config;
    config.fix_a_at_zero = true;
    CHECK(fit_csm(data, config).a == 0.0);
  }
}

TEST_CASE("fitted posterior converges to the true mixture posterior") {
  const auto world = shared_cov_world(2, 41);
  const double pi_o_tr = 0.4;
  const auto data = world_dataset(world, 100000, 100000, pi_o_tr, 10);
  const auto fitted = fit_csm(data, FitConfig{});

  double mae = 0.0;
  const double pi_u = 0.5;
  Eigen::VectorXd xb(3);
  xb[2] = 1.0;
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    xb.head(2) = data.features.row(i).transpose();
    const double p_i = std::exp(log_id_density(world, xb.head(2)));
    const double p_o = std::exp(log_ood_density(world, xb.head(2)));
    const double truth =
        (1.0 - pi_u) * p_i /
        ((1.0 - pi_u) * p_i + pi_u * (pi_o_tr * p_o + (1.0 - pi_o_tr) * p_i));
    mae += std::abs(csm_posterior(fitted, xb) - truth);
  }
  mae /= static_cast<double>(data.features.rows());
  CHECK(mae < 0.01);
}

TEST_CASE("recover_prior") {
  const auto mid = recover_prior(0.5, 0.5);
  CHECK(mid.pi_o_tr == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(mid.clamped);

  const auto clean = recover_prior(0.0, 0.3);
  CHECK(clean.pi_o_tr == doctest::Approx(1.0));
  CHECK_FALSE(clean.clamped);

  // forward a = pi_u (1 - pi_o) / (1 - pi_u), then invert
  const double a = 0.5 * (1.0 - 0.2) / 0.5;
  CHECK(a == doctest::Approx(0.8));
  CHECK(recover_prior(a, 0.5).pi_o_tr == doctest::Approx(0.2).epsilon(1e-12));

  const auto floored = recover_prior(10.0, 0.5);
  CHECK(floored.pi_o_tr == doctest::Approx(kPriorClampFloor));
  CHECK(floored.clamped);

  CHECK_THROWS_AS(recover_prior(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("estimate_g") {
  SUBCASE("unit posterior odds scale by the prior factor") {
    CsmParams params{Eigen::VectorXd::Zero(2), 0.0};
    // theta = 0, a = 0: p = 1/2, odds = 1
    CHECK(estimate_g(params, 0.5, 0.5, with_bias({1.0})) == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("ratio is floored by |a| as p(z=I|x) -> 1") {
    CsmParams params{Eigen::VectorXd::Zero(2), 0.3};
    params.theta << -40.0, 0.0;  // drives exp term to ~0, p -> 1/(1+|a|)
    const double g = estimate_g(params, 0.5, 0.5, with_bias({1.0}));
    const double scale = (1.0 - 0.5) / (0.5 * 0.5);
    CHECK(g == doctest::Approx(0.3 * scale).epsilon(1e-10));
    CHECK(g > 0.0);
  }

  SUBCASE("rank-correlates with the true ratio on oracle data") {
    const auto world = shared_cov_world(2, 47);
    const auto points = sample_mixture(world, 10000, 0.5, 99);
    const auto params = analytic_csm_params(world, 0.5, 0.5);
    std::vector<double> est, truth;
    Eigen::VectorXd xb(3);
    xb[2] = 1.0;
    for (const auto& x : points) {
      xb.head(2) = x;
      est.push_back(estimate_g(params, 0.5, 0.5, xb));
      truth.push_back(likelihood_ratio(world, x));
    }
    CHECK(spearman(est, truth) >= 0.999);
  }

  SUBCASE("invalid prior") {
    CsmParams params{Eigen::VectorXd::Zero(2), 0.0};
    CHECK_THROWS_AS(estimate_g(params, 0.5, 0.0, with_bias({1.0})), std::invalid_argument);
  }
}

TEST_CASE("run_poscod") {
  const auto world = shared_cov_world(2, 53);
  std::vector<PoscodLabeledSample> id_data;
  for (const auto& s : sample_id(world, 4000, 5)) {
    id_data.push_back(PoscodLabeledSample{s.features, s.label});
  }
  const auto mixture = sample_mixture(world, 4000, 0.5, 6);
  auto posterior_source = [&world](const Eigen::VectorXd& x) { return posterior(world, x); };

  FitConfig config;
  config.seed = 123;

  SUBCASE("determinism across runs") {
    const auto a = run_poscod(id_data, mixture, 0.5, 0.9, world.loss(), posterior_source, config);
    const auto b = run_poscod(id_data, mixture, 0.5, 0.9, world.loss(), posterior_source, config);
    CHECK(a.selector.lambda == b.selector.lambda);
    CHECK(a.selector.tau == b.selector.tau);
    CHECK(a.params.theta == b.params.theta);
    for (const auto& x : sample_mixture(world, 50, 0.5, 77)) {
      CHECK(a.score(x) == b.score(x));
    }
  }

  SUBCASE("alpha = 1 ranks by the likelihood-ratio estimate alone") {
    const auto model =
        run_poscod(id_data, mixture, 1.0, 0.9, world.loss(), posterior_source, config);
    const auto probes = sample_mixture(world, 200, 0.5, 88);
    std::vector<double> scores, gs;
    for (const auto& x : probes) {
      scores.push_back(model.score(x));
      gs.push_back(model.g_hat(x));
    }
    CHECK(spearman(scores, gs) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("empty inputs rejected") {
    CHECK_THROWS_AS(
        run_poscod({}, mixture, 0.5, 0.9, world.loss(), posterior_source, config),
        std::invalid_argument);
  }
}

TEST_CASE("prior recovery across training priors") {
  for (double pi_o_tr : {0.2, 0.5, 0.8}) {
    const auto world = shared_cov_world(2, 61);
    const auto data = world_dataset(world, 100000, 100000, pi_o_tr, 12);
    const auto fitted = fit_csm(data, FitConfig{});
    const auto prior = recover_prior(fitted.a, data.pi_u());
    CHECK(std::abs(prior.pi_o_tr - pi_o_tr) <= 0.05);
  }
}

TEST_CASE("corrected sigmoid beats the standard sigmoid under contamination") {
  // pi_o_tr = 0.5 training mixture; linear selector on the fitted g.
  int corrected_wins = 0;
  const int trials = 3;
  for (int trial = 0; trial < trials; ++trial) {
    const auto world = random_world(2, 2, 200 + trial, /*shared_factor=*/true);
    const auto data = world_dataset(world, 20000, 20000, 0.5, 300 + trial);

    FitConfig corrected_cfg;
    const auto corrected = fit_csm(data, corrected_cfg);
    FitConfig standard_cfg;
    standard_cfg.fix_a_at_zero = true;
    const auto standard = fit_csm(data, standard_cfg);

    const double pi_u = data.pi_u();
    const auto prior_c = recover_prior(corrected.a, pi_u);
    const auto prior_s = recover_prior(standard.a, pi_u);

    const auto ids = sample_id(world, 20000, 400 + trial);
    const auto oods = sample_mixture(world, 20000, 1.0, 401 + trial);

    std::vector<ScoredSample> base;
    for (const auto& s : ids) {
      base.push_back(ScoredSample{0.0, SampleOrigin::kId,
                                  world.loss()(s.label, bayes_classify(world, s.features).label)});
    }
    for (std::size_t i = 0; i < oods.size(); ++i) {
      base.push_back(ScoredSample{0.0, SampleOrigin::kOod, 0.0});
    }

    auto evaluate = [&](const CsmParams& params, const PriorEstimate& prior) {
      auto samples = base;
      Eigen::VectorXd xb(3);
      xb[2] = 1.0;
      std::size_t i = 0;
      auto score = [&](const Eigen::VectorXd& x) {
        xb.head(2) = x;
        const double r = bayes_classify(world, x).conditional_risk;
        const double g = estimate_g(params, pi_u, prior.pi_o_tr, xb);
        samples[i++].score = linear_score(r, g, 0.5, 0.9);
      };
      for (const auto& s : ids) score(s.features);
      for (const auto& x : oods) score(x);
      return ausrt(samples, 0.5);
    };
    const double au_corrected = evaluate(corrected, prior_c);
    const double au_standard = evaluate(standard, prior_s);
    corrected_wins += au_corrected <= au_standard;
  }
  CHECK(corrected_wins >= trials - 1);
}
