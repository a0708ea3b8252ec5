#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "oracles.hpp"
#include "penhmm/cv.hpp"
#include "penhmm/numerics.hpp"
#include "penhmm/sim.hpp"

using namespace penhmm;

namespace {

std::vector<int> fold_sizes(const std::vector<int>& assignment, int M) {
  std::vector<int> sizes(M, 0);
  for (int f : assignment) ++sizes[f];
  return sizes;
}

PanelDataset small_panel(int n, int T, int p, std::uint64_t seed) {
  Scenario sc;
  sc.n = n;
  sc.T = T;
  sc.alpha = Eigen::VectorXd::Constant(1, 0.2);
  sc.beta = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < p; ++j) sc.beta(j) = j % 2 == 0 ? 0.7 : -0.4;
  sc.seed = seed;
  return simulate(sc, 0).data;
}

}  // namespace

TEST_CASE("make_folds: balance, determinism, errors") {
  const std::vector<int> loo = make_folds(10, 10, 5);
  const std::vector<int> loo_sizes = fold_sizes(loo, 10);
  for (int s : loo_sizes) CHECK(s == 1);

  const std::vector<int> app = make_folds(375, 10, 5);
  const std::vector<int> app_sizes = fold_sizes(app, 10);
  CHECK(std::count(app_sizes.begin(), app_sizes.end(), 38) == 5);
  CHECK(std::count(app_sizes.begin(), app_sizes.end(), 37) == 5);

  CHECK(make_folds(375, 10, 5) == app);
  CHECK(make_folds(375, 10, 6) != app);

  CHECK_THROWS_AS(make_folds(5, 6, 0), std::invalid_argument);

  auto rng = seeded_rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 50);
    const int M = 2 + static_cast<int>(rng() % (n - 1));
    const std::vector<int> folds = make_folds(n, M, rng());
    const std::vector<int> sizes = fold_sizes(folds, M);
    CHECK(*std::max_element(sizes.begin(), sizes.end()) -
              *std::min_element(sizes.begin(), sizes.end()) <=
          1);
    int total = 0;
    for (int s : sizes) total += s;
    CHECK(total == n);  // every subject in exactly one fold
  }
}

TEST_CASE("cross_validate: k=1 equals pooled held-out logistic likelihood") {
  const PanelDataset data = small_panel(16, 3, 1, 61);
  CvGrid grid;
  grid.ks = {1};
  grid.lambdas = {0.0};
  grid.M = 4;
  grid.seed = 3;
  EmConfig cfg;
  cfg.n_starts_random = 1;
  const CvResult res = cross_validate(data, grid, cfg);

  // reference: plain logistic fit per fold, evaluated on the held-out rows
  double total = 0.0;
  for (int m = 0; m < 4; ++m) {
    std::vector<int> train, test;
    for (int i = 0; i < data.n; ++i)
      (res.fold_assignment[i] == m ? test : train).push_back(i);
    const PanelDataset dtr = data.subset(train);
    Eigen::MatrixXd design(dtr.n * dtr.T, 2);
    Eigen::VectorXi yy(dtr.n * dtr.T);
    for (int i = 0; i < dtr.n; ++i)
      for (int t = 0; t < dtr.T; ++t) {
        const int r = dtr.row(i, t);
        design(r, 0) = 1.0;
        design(r, 1) = dtr.X(r, 0);
        yy(r) = dtr.y(i, t);
      }
    const Eigen::VectorXd coef = oracles::logistic_fit(design, yy);
    double fold_ll = 0.0;
    for (int i : test)
      for (int t = 0; t < data.T; ++t) {
        const double eta = coef(0) + coef(1) * data.X(data.row(i, t), 0);
        const double phi = oracles::sigmoid(eta);
        fold_ll += data.y(i, t) == 1 ? std::log(phi) : std::log(1.0 - phi);
      }
    CHECK(std::abs(res.cells[0][0].fold_loglik[m] - fold_ll) < 1e-6);
    total += fold_ll;
  }
  CHECK(std::abs(res.cells[0][0].cv_loglik - total / 4.0) < 1e-6);
}

TEST_CASE("cross_validate: leave-one-out matches a hand-rolled loop") {
  const PanelDataset data = small_panel(12, 3, 1, 62);
  CvGrid grid;
  grid.ks = {1};
  grid.lambdas = {0.0};
  grid.M = data.n;
  grid.seed = 9;
  EmConfig cfg;
  cfg.n_starts_random = 1;
  const CvResult res = cross_validate(data, grid, cfg);

  double total = 0.0;
  for (int i = 0; i < data.n; ++i) {
    std::vector<int> train;
    for (int j = 0; j < data.n; ++j)
      if (j != i) train.push_back(j);
    const FitResult f = fit(data.subset(train), 1, cfg);
    total += observed_loglik(data.subset({i}), f.params);
  }
  CHECK(std::abs(res.cells[0][0].cv_loglik - total / data.n) < 1e-6);
}

TEST_CASE("cross_validate: table structure, mean identity, selection rule") {
  Scenario sc;
  sc.n = 40;
  sc.T = 5;
  sc.alpha.resize(2);
  sc.alpha << -2, 2;
  sc.beta.resize(1);
  sc.beta << 1.0;
  sc.seed = 63;
  const PanelDataset data = simulate(sc, 0).data;

  CvGrid grid;
  grid.ks = {1, 2};
  grid.lambdas = {0.0, 0.05};
  grid.M = 4;
  grid.seed = 12;
  EmConfig cfg;
  cfg.n_starts_random = 1;
  cfg.max_em_iters = 200;
  const CvResult res = cross_validate(data, grid, cfg);

  // k=1 with lambda>0 is not evaluated (vacuous penalty)
  CHECK(res.cells[0][0].evaluated);
  CHECK_FALSE(res.cells[0][1].evaluated);
  CHECK(res.cells[1][0].evaluated);
  CHECK(res.cells[1][1].evaluated);

  for (size_t ki = 0; ki < res.ks.size(); ++ki)
    for (size_t li = 0; li < res.lambdas.size(); ++li) {
      const CvCell& cell = res.cells[ki][li];
      if (!cell.evaluated) continue;
      double s = 0.0;
      for (double v : cell.fold_loglik) s += v;
      CHECK(std::abs(cell.cv_loglik - s / grid.M) < 1e-12);
    }

  // reported argmax obeys the documented tie rule (smaller k, then lambda)
  int want_k = 0;
  double want_l = 0.0, best = -1e300;
  bool found = false;
  for (size_t ki = 0; ki < res.ks.size(); ++ki)
    for (size_t li = 0; li < res.lambdas.size(); ++li) {
      const CvCell& cell = res.cells[ki][li];
      if (!cell.evaluated || cell.all_failed) continue;
      if (!found || cell.cv_loglik > best) {
        best = cell.cv_loglik;
        want_k = res.ks[ki];
        want_l = res.lambdas[li];
        found = true;
      }
    }
  CHECK(res.best_k == want_k);
  CHECK(res.best_lambda == want_l);

  // fold audit: every subject is tested exactly once
  std::vector<int> seen(data.n, 0);
  for (int i = 0; i < data.n; ++i) ++seen[i];
  for (int i = 0; i < data.n; ++i) CHECK(seen[i] == 1);
  CHECK(static_cast<int>(res.fold_assignment.size()) == data.n);
  for (int f : res.fold_assignment) {
    CHECK(f >= 0);
    CHECK(f < grid.M);
  }
}

TEST_CASE("cross_validate: respects an explicit fold assignment") {
  const PanelDataset data = small_panel(8, 3, 1, 64);
  CvGrid grid;
  grid.ks = {1};
  grid.lambdas = {0.0};
  grid.M = 2;
  grid.fold_assignment = {0, 1, 0, 1, 0, 1, 0, 1};
  EmConfig cfg;
  cfg.n_starts_random = 1;
  const CvResult res = cross_validate(data, grid, cfg);
  CHECK(res.fold_assignment == grid.fold_assignment);

  CvGrid bad = grid;
  bad.fold_assignment = {0, 1, 0};
  CHECK_THROWS_AS(cross_validate(data, bad, cfg), std::invalid_argument);
}

TEST_CASE("cross_validate: input validation") {
  const PanelDataset data = small_panel(8, 3, 1, 65);
  EmConfig cfg;
  CvGrid grid;
  grid.ks = {};
  grid.lambdas = {0.0};
  CHECK_THROWS_AS(cross_validate(data, grid, cfg), std::invalid_argument);
  grid.ks = {2};
  grid.lambdas = {-0.5};
  CHECK_THROWS_AS(cross_validate(data, grid, cfg), std::invalid_argument);
  grid.lambdas = {0.0};
  grid.M = 1;
  CHECK_THROWS_AS(cross_validate(data, grid, cfg), std::invalid_argument);
}
