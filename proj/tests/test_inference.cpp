#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/LU>

#include "oracles.hpp"
#include "penhmm/inference.hpp"
#include "penhmm/numerics.hpp"
#include "penhmm/sim.hpp"

using namespace penhmm;

TEST_CASE("standard_errors: single state equals logistic-regression theory") {
  Scenario sc;
  sc.n = 150;
  sc.T = 4;
  sc.alpha = Eigen::VectorXd::Constant(1, 0.3);
  sc.beta.resize(2);
  sc.beta << 0.8, -0.5;
  sc.seed = 41;
  const SimulatedPanel sim = simulate(sc, 0);

  EmConfig cfg;
  cfg.n_starts_random = 1;
  const FitResult res = fit(sim.data, 1, cfg);
  REQUIRE(res.converged);
  const SeReport report = standard_errors(sim.data, res, 0.0);
  REQUIRE(report.full_rank);

  // pooled design [1 | x] at the fitted coefficients
  const int rows = sc.n * sc.T;
  Eigen::MatrixXd design(rows, 3);
  design.col(0).setOnes();
  design.rightCols(2) = sim.data.X;
  Eigen::VectorXd coef(3);
  coef << res.params.alpha(0), res.params.beta(0), res.params.beta(1);
  const Eigen::MatrixXd info = oracles::logistic_info(design, coef);
  const Eigen::VectorXd se_ref =
      info.inverse().diagonal().cwiseSqrt();
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(report.se(j) - se_ref(j)) / se_ref(j) < 1e-3);

  // first-order condition at the optimum
  CHECK(em_score(sim.data, res.params, 0.0).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("standard_errors: penalized score vanishes at a penalized optimum") {
  Scenario sc;
  sc.n = 120;
  sc.T = 6;
  sc.alpha.resize(2);
  sc.alpha << -2, 2;
  sc.beta.resize(2);
  sc.beta << 1.0, -1.0;
  sc.seed = 42;
  const SimulatedPanel sim = simulate(sc, 0);

  EmConfig cfg;
  cfg.lambda = 0.05;
  cfg.n_starts_random = 3;
  cfg.eps_loglik = 1e-11;  // tight convergence so the optimum is well located
  cfg.eps_params = 1e-7;
  cfg.max_em_iters = 3000;
  const FitResult res = fit(sim.data, 2, cfg);
  REQUIRE(res.converged);
  CHECK(em_score(sim.data, res.params, 0.05).lpNorm<Eigen::Infinity>() < 1e-4);

  const SeReport report = standard_errors(sim.data, res, 0.05);
  CHECK(report.full_rank);
  CHECK(identifiability_check(report));
  for (int j = 0; j < report.se.size(); ++j) CHECK(report.se(j) > 0.0);
  for (int j = 0; j < 2; ++j) {
    CHECK(report.pvalues(j) >= 0.0);
    CHECK(report.pvalues(j) <= 1.0);
  }
}

TEST_CASE("identifiability_check: unreachable duplicated state fails") {
  auto rng = seeded_rng(43);
  oracles::Instance inst = oracles::random_instance(rng, 2, 5, 5, 2);
  while (inst.params.k != 2 || inst.data.p != 2)
    inst = oracles::random_instance(rng, 2, 5, 5, 2);

  FitResult shim;
  shim.params = inst.params;
  shim.params.alpha << 0.4, 0.4;     // duplicated support points
  shim.params.pi << 1.0, 0.0;        // second state carries no mass
  shim.params.Pi << 1.0, 0.0, 1.0, 0.0;  // identical rows
  shim.converged = true;

  const SeReport report = standard_errors(inst.data, shim, 0.0);
  CHECK_FALSE(report.full_rank);
  CHECK_FALSE(identifiability_check(report));
  // the unidentified intercept has no standard error, betas survive via the
  // pseudo-inverse
  CHECK_FALSE(std::isfinite(report.se(0)));
  CHECK_FALSE(std::isfinite(report.se(1)));
  CHECK(std::isfinite(report.se(2)));
  CHECK(std::isfinite(report.se(3)));
}

TEST_CASE("identifiability_check: well separated fit passes") {
  Scenario sc;
  sc.n = 300;
  sc.T = 10;
  sc.alpha = Scenario::alpha_preset(2);  // (-6, 0, 6)
  sc.beta.resize(4);
  sc.beta << 1, -1, 1, 1;
  sc.seed = 44;
  const SimulatedPanel sim = simulate(sc, 0);

  EmConfig cfg;
  cfg.n_starts_random = 2;
  const FitResult res = fit(sim.data, 3, cfg);
  const SeReport report = standard_errors(sim.data, res, 0.0);
  CHECK(identifiability_check(report));
  CHECK(report.min_eigenvalue > 0.0);
}

TEST_CASE("decode: hard posteriors, ties, weighted support points") {
  // hard posteriors return the generating path
  Posteriors post;
  post.n = 2;
  post.T = 3;
  post.k = 3;
  post.z = RowMajorXd::Zero(6, 3);
  const int path[2][3] = {{2, 0, 1}, {1, 1, 2}};
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 3; ++t) post.z(post.zrow(i, t), path[i][t]) = 1.0;
  post.zz = RowMajorXd::Zero(6, 3);
  post.subject_loglik = Eigen::VectorXd::Zero(2);

  FitResult shim;
  shim.params.k = 3;
  shim.params.alpha.resize(3);
  shim.params.alpha << -0.827, 3.147, 7.359;
  shim.params.beta.resize(0);
  shim.params.pi = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  shim.params.Pi = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);

  Decoding dec = decode(shim, post);
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 3; ++t) CHECK(dec.states(i, t) == path[i][t]);

  // a tie goes to the lowest state index
  post.z.row(post.zrow(0, 0)) << 0.5, 0.5, 0.0;
  dec = decode(shim, post);
  CHECK(dec.states(0, 0) == 0);

  // posterior-weighted support points
  post.z.row(post.zrow(0, 0)) << 0.2, 0.3, 0.5;
  dec = decode(shim, post);
  CHECK(dec.alpha_bar(0, 0) == doctest::Approx(4.4582).epsilon(1e-9));

  // always within the support-point range
  auto rng = seeded_rng(45);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd zrow(3);
    for (int u = 0; u < 3; ++u) zrow(u) = unif(rng);
    zrow /= zrow.sum();
    post.z.row(post.zrow(0, 0)) = zrow;
    dec = decode(shim, post);
    CHECK(dec.alpha_bar(0, 0) >= shim.params.alpha.minCoeff() - 1e-12);
    CHECK(dec.alpha_bar(0, 0) <= shim.params.alpha.maxCoeff() + 1e-12);
  }
}

TEST_CASE("decode: argmax invariant under monotone transforms of z rows") {
  auto rng = seeded_rng(46);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  FitResult shim;
  shim.params.k = 4;
  shim.params.alpha.resize(4);
  shim.params.alpha << -2, -1, 1, 2;
  shim.params.beta.resize(0);
  shim.params.pi = Eigen::VectorXd::Constant(4, 0.25);
  shim.params.Pi = Eigen::MatrixXd::Constant(4, 4, 0.25);

  Posteriors post;
  post.n = 1;
  post.T = 1;
  post.k = 4;
  post.z.resize(1, 4);
  post.zz = RowMajorXd::Zero(4, 4);
  post.subject_loglik = Eigen::VectorXd::Zero(1);

  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd zrow(4);
    for (int u = 0; u < 4; ++u) zrow(u) = 0.01 + unif(rng);
    zrow /= zrow.sum();
    post.z.row(0) = zrow;
    const int base = decode(shim, post).states(0, 0);

    // x -> x^2 is strictly increasing on (0, 1]; renormalize and re-decode
    Eigen::VectorXd squared = zrow.array().square();
    squared /= squared.sum();
    post.z.row(0) = squared;
    CHECK(decode(shim, post).states(0, 0) == base);
  }
}
