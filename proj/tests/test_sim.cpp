#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "penhmm/model_core.hpp"
#include "penhmm/numerics.hpp"
#include "penhmm/sim.hpp"

using namespace penhmm;

TEST_CASE("scenario presets and transition matrices") {
  Eigen::VectorXd a1 = Scenario::alpha_preset(1), a5 = Scenario::alpha_preset(5);
  CHECK(a1(0) == -3);
  CHECK(a1(2) == 3);
  CHECK(a5(0) == -40);
  CHECK(a5(1) == -15);
  CHECK(a5(2) == 0);
  CHECK_THROWS_AS(Scenario::alpha_preset(6), std::invalid_argument);

  Scenario sc;
  sc.alpha = Scenario::alpha_preset(1);
  sc.persistence = Persistence::High;
  Eigen::MatrixXd hi = sc.transition_matrix();
  CHECK(hi(0, 0) == doctest::Approx(0.900));
  CHECK(hi(0, 1) == doctest::Approx(0.050));
  sc.persistence = Persistence::Low;
  Eigen::MatrixXd lo = sc.transition_matrix();
  CHECK(lo(1, 1) == doctest::Approx(0.750));
  CHECK(lo(1, 0) == doctest::Approx(0.125));
}

TEST_CASE("simulate: absorbing chain pins every state") {
  Scenario sc;
  sc.n = 20;
  sc.T = 6;
  sc.alpha = Scenario::alpha_preset(1);
  sc.beta.resize(2);
  sc.beta << 1, -1;
  sc.pi = Eigen::VectorXd::Zero(3);
  sc.pi(0) = 1.0;
  sc.Pi_override = Eigen::MatrixXd::Identity(3, 3);
  sc.seed = 71;
  const SimulatedPanel sim = simulate(sc, 0);
  CHECK((sim.states.array() == 0).all());
}

TEST_CASE("simulate: deeply negative support point produces no events") {
  Scenario sc;
  sc.n = 600;
  sc.T = 10;
  sc.alpha = Scenario::alpha_preset(5);  // state 0 sits at -40
  sc.beta.resize(4);
  sc.beta << 1, -1, 1, 1;
  sc.seed = 72;
  const SimulatedPanel sim = simulate(sc, 0);
  int cells = 0, events = 0;
  for (int i = 0; i < sc.n; ++i)
    for (int t = 0; t < sc.T; ++t)
      if (sim.states(i, t) == 0) {
        ++cells;
        events += sim.data.y(i, t);
      }
  CHECK(cells > 1000);
  CHECK(events == 0);
}

TEST_CASE("simulate: motivating example allocates first occasions evenly") {
  const Scenario sc = Scenario::motivating_example(73);
  const SimulatedPanel sim = simulate(sc, 0);
  REQUIRE(sim.states.rows() == 250);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 250; ++i) ++counts[sim.states(i, 0)];
  // multinomial(250, 1/3) stays within +-3.5 sd of 83.3
  for (int u = 0; u < 3; ++u) {
    CHECK(counts[u] > 55);
    CHECK(counts[u] < 115);
  }
  // the lag column carries the shifted response
  const int lag = sim.data.lag_column;
  REQUIRE(lag == 3);
  for (int i = 0; i < 20; ++i) {
    CHECK(sim.data.X(sim.data.row(i, 0), lag) == 0.0);
    for (int t = 1; t < sc.T; ++t)
      CHECK(sim.data.X(sim.data.row(i, t), lag) ==
            static_cast<double>(sim.data.y(i, t - 1)));
  }
}

TEST_CASE("simulate: reproducible bytes, distinct replicates") {
  Scenario sc;
  sc.n = 25;
  sc.T = 8;
  sc.alpha = Scenario::alpha_preset(2);
  sc.beta.resize(4);
  sc.beta << 1, -1, 1, 1;
  sc.seed = 74;
  const SimulatedPanel a = simulate(sc, 3);
  const SimulatedPanel b = simulate(sc, 3);
  CHECK((a.data.y - b.data.y).cwiseAbs().maxCoeff() == 0);
  CHECK((a.data.X - b.data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0);

  const SimulatedPanel c = simulate(sc, 4);
  CHECK((a.data.X - c.data.X).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("simulate: transition frequencies approach the design matrix") {
  Scenario sc;
  sc.n = 5000;
  sc.T = 10;
  sc.alpha = Scenario::alpha_preset(1);
  sc.beta.resize(2);
  sc.beta << 1, -1;
  sc.persistence = Persistence::High;
  sc.seed = 75;
  const SimulatedPanel sim = simulate(sc, 0);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < sc.n; ++i)
    for (int t = 1; t < sc.T; ++t)
      counts(sim.states(i, t - 1), sim.states(i, t)) += 1.0;
  const Eigen::MatrixXd Pi = sc.transition_matrix();
  for (int u = 0; u < 3; ++u) {
    const Eigen::VectorXd rates = counts.row(u) / counts.row(u).sum();
    for (int v = 0; v < 3; ++v) CHECK(std::abs(rates(v) - Pi(u, v)) < 0.02);
  }
}

TEST_CASE("simulate: zero lag coefficient matches the lag-free process") {
  // with beta_lag = 0 the generated responses follow the lag-free law; the
  // mean per-subject log-likelihood under the true parameters must agree
  Scenario lagged;
  lagged.n = 3000;
  lagged.T = 8;
  lagged.alpha = Scenario::alpha_preset(1);
  lagged.beta.resize(4);
  lagged.beta << 1, -1, 1, 0;  // last covariate is the lag, weight 0
  lagged.include_lag = true;
  lagged.seed = 76;

  Scenario plain = lagged;
  plain.include_lag = false;
  plain.beta.resize(3);
  plain.beta << 1, -1, 1;
  plain.seed = 77;

  HmmParams par;
  par.k = 3;
  par.alpha = plain.alpha;
  par.beta = plain.beta;
  par.pi = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  par.Pi = plain.transition_matrix();

  const SimulatedPanel a = simulate(lagged, 0);
  const SimulatedPanel b = simulate(plain, 0);

  PanelDataset a_trimmed = a.data;  // drop the zero-weight lag column
  a_trimmed.p = 3;
  a_trimmed.X = RowMajorXd(a.data.X.leftCols(3));
  a_trimmed.lag_column = -1;
  a_trimmed.covariate_names.resize(3);

  const double mean_a = observed_loglik(a_trimmed, par) / lagged.n;
  const double mean_b = observed_loglik(b.data, par) / plain.n;
  // two independent samples of 3000 subjects: ~0.045 sd on the difference
  CHECK(std::abs(mean_a - mean_b) < 0.15);
}

TEST_CASE("mse: hand values and quadratic scaling") {
  CHECK(mse(1.0, {1.0, 1.0, 1.0}) == 0.0);
  CHECK(mse(1.0, {0.0, 2.0}) == doctest::Approx(1.0).epsilon(1e-15));

  auto rng = seeded_rng(78);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int rep = 0; rep < 30; ++rep) {
    const double theta = gauss(rng), c = 1.0 + std::abs(gauss(rng));
    std::vector<double> est, scaled;
    for (int s = 0; s < 7; ++s) {
      est.push_back(gauss(rng));
      scaled.push_back(c * est.back());
    }
    CHECK(mse(c * theta, scaled) ==
          doctest::Approx(c * c * mse(theta, est)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mse(0.0, {}), std::invalid_argument);
}

TEST_CASE("run_study: baseline cell has zero percentage variation") {
  Scenario sc;
  sc.n = 60;
  sc.T = 5;
  sc.alpha.resize(2);
  sc.alpha << -1.5, 1.5;
  sc.beta.resize(2);
  sc.beta << 1.0, -0.5;
  sc.n_replicates = 2;
  sc.seed = 79;
  sc.label = "smoke";

  EmConfig cfg;
  cfg.n_starts_random = 1;
  cfg.max_em_iters = 200;
  const MetricTable table = run_study({sc}, {}, cfg);
  REQUIRE(table.rows.size() == 1);
  REQUIRE(table.rows[0].cells.size() == 1);
  const StudyCell& cell = table.rows[0].cells[0];
  CHECK(cell.lambda == 0.0);
  if (cell.replicates_used > 0) {
    for (double v : cell.mse_beta) {
      CHECK(std::isfinite(v));
      CHECK(pct_change(v, v) == 0.0);
    }
  }
  CHECK(cell.replicates_used + table.rows[0].excluded_replicates ==
        sc.n_replicates);
}

TEST_CASE("run_study: penalty shrinks the support-point spread") {
  Scenario sc;
  sc.n = 80;
  sc.T = 6;
  sc.alpha.resize(2);
  sc.alpha << -2.0, 2.0;
  sc.beta.resize(2);
  sc.beta << 1.0, -1.0;
  sc.n_replicates = 2;
  sc.seed = 80;
  sc.label = "shrink";

  EmConfig cfg;
  cfg.n_starts_random = 1;
  cfg.max_em_iters = 300;
  const MetricTable table = run_study({sc}, {5.0}, cfg);
  REQUIRE(table.rows[0].cells.size() == 2);
  CHECK(table.rows[0].cells[0].lambda == 0.0);
  CHECK(table.rows[0].cells[1].lambda == 5.0);
  // a strong penalty pulls both support points toward their mean, so the
  // spread-to-truth MSE must rise for the extreme states
  if (table.rows[0].cells[0].replicates_used > 0) {
    CHECK(std::isfinite(table.rows[0].cells[1].mse_alpha[0]));
    CHECK(table.rows[0].cells[1].mse_alpha[0] >
          table.rows[0].cells[0].mse_alpha[0]);
  }
}
