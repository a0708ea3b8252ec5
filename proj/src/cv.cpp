#include "penhmm/cv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "penhmm/numerics.hpp"

namespace penhmm {

std::vector<int> make_folds(int n, int M, std::uint64_t seed) {
  if (M < 1) throw std::invalid_argument("make_folds: M must be >= 1");
  if (M > n) throw std::invalid_argument("make_folds: M exceeds subject count");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = seeded_rng(seed, 0xF01Du);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(n);
  for (int j = 0; j < n; ++j) fold[order[j]] = j % M;
  return fold;
}

namespace {

struct CellJob {
  int ki;
  int li;
  int m;
};

}  // namespace

CvResult cross_validate(const PanelDataset& data, const CvGrid& grid,
                        const EmConfig& cfg) {
  data.validate();
  cfg.validate();
  if (grid.ks.empty()) throw std::invalid_argument("cv: empty k list");
  if (grid.lambdas.empty()) throw std::invalid_argument("cv: empty lambda list");
  for (int k : grid.ks)
    if (k < 1) throw std::invalid_argument("cv: k must be >= 1");
  for (double l : grid.lambdas)
    if (!(l >= 0.0)) throw std::invalid_argument("cv: lambda must be >= 0");
  if (grid.M < 2) throw std::invalid_argument("cv: need at least two folds");

  CvResult res;
  res.ks = grid.ks;
  res.lambdas = grid.lambdas;
  res.M = grid.M;
  res.fold_assignment = grid.fold_assignment.empty()
                            ? make_folds(data.n, grid.M, grid.seed)
                            : grid.fold_assignment;
  if (static_cast<int>(res.fold_assignment.size()) != data.n)
    throw std::invalid_argument("cv: fold assignment size mismatch");
  for (int f : res.fold_assignment)
    if (f < 0 || f >= grid.M)
      throw std::invalid_argument("cv: fold index out of range");

  const int nk = static_cast<int>(grid.ks.size());
  const int nl = static_cast<int>(grid.lambdas.size());
  res.cells.assign(nk, std::vector<CvCell>(nl));

  std::vector<std::vector<int>> train_sets(grid.M), test_sets(grid.M);
  for (int i = 0; i < data.n; ++i) {
    for (int m = 0; m < grid.M; ++m)
      (res.fold_assignment[i] == m ? test_sets[m] : train_sets[m]).push_back(i);
  }
  for (int m = 0; m < grid.M; ++m)
    if (test_sets[m].empty() || train_sets[m].empty())
      throw std::invalid_argument("cv: a fold is empty");

  std::vector<CellJob> jobs;
  for (int ki = 0; ki < nk; ++ki) {
    for (int li = 0; li < nl; ++li) {
      CvCell& cell = res.cells[ki][li];
      // The penalty is vacuous with a single state, so k = 1 is evaluated
      // at lambda = 0 only.
      if (grid.ks[ki] == 1 && grid.lambdas[li] > 0.0) continue;
      cell.evaluated = true;
      cell.fold_loglik.assign(grid.M, 0.0);
      cell.fold_converged.assign(grid.M, 0);
      for (int m = 0; m < grid.M; ++m) jobs.push_back({ki, li, m});
    }
  }

  parallel_for(static_cast<int>(jobs.size()), [&](int j) {
    const CellJob& job = jobs[j];
    EmConfig cell_cfg = cfg;
    cell_cfg.lambda = grid.lambdas[job.li];
    cell_cfg.seed = mix64(grid.seed ^ mix64(0xCE11u + job.ki)) ^
                    mix64((static_cast<std::uint64_t>(job.li) << 16) + job.m);
    const PanelDataset train = data.subset(train_sets[job.m]);
    const PanelDataset test = data.subset(test_sets[job.m]);
    const FitResult f = fit(train, grid.ks[job.ki], cell_cfg);
    res.cells[job.ki][job.li].fold_loglik[job.m] =
        observed_loglik(test, f.params);
    res.cells[job.ki][job.li].fold_converged[job.m] = f.converged ? 1 : 0;
  });

  for (int ki = 0; ki < nk; ++ki) {
    for (int li = 0; li < nl; ++li) {
      CvCell& cell = res.cells[ki][li];
      if (!cell.evaluated) continue;
      double sum = 0.0;
      int ok = 0;
      for (int m = 0; m < grid.M; ++m) {
        sum += cell.fold_loglik[m];
        ok += cell.fold_converged[m];
      }
      cell.cv_loglik = sum / grid.M;
      cell.all_failed = ok == 0;
    }
  }

  // Strict improvement keeps the first-seen cell on ties; iterating k-major
  // then lambda resolves ties to smaller k, then smaller lambda. Cells whose
  // folds all failed are skipped, unless that would leave nothing to select
  // (iteration-capped fits still carry usable held-out likelihoods).
  for (int pass = 0; pass < 2; ++pass) {
    bool have_best = false;
    double best_value = 0.0;
    for (int ki = 0; ki < nk; ++ki) {
      for (int li = 0; li < nl; ++li) {
        const CvCell& cell = res.cells[ki][li];
        if (!cell.evaluated || !std::isfinite(cell.cv_loglik)) continue;
        if (pass == 0 && cell.all_failed) continue;
        if (!have_best || cell.cv_loglik > best_value) {
          best_value = cell.cv_loglik;
          res.best_k = grid.ks[ki];
          res.best_lambda = grid.lambdas[li];
          have_best = true;
        }
      }
    }
    if (have_best) return res;
  }
  throw std::runtime_error("cv: no usable cells");
}

}  // namespace penhmm
