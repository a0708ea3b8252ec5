#ifndef PENHMM_CV_HPP
#define PENHMM_CV_HPP

#include <cstdint>
#include <vector>

#include "penhmm/em.hpp"

namespace penhmm {

// Grid for joint selection of the state count and the penalty weight.
// Folds partition subjects (never occasions); when fold_assignment is empty
// it is built from (n, M, seed).
struct CvGrid {
  std::vector<int> ks;
  std::vector<double> lambdas;
  int M = 10;
  std::uint64_t seed = 0;
  std::vector<int> fold_assignment;
};

// Uniformly random balanced partition of n subjects into M folds; sizes
// differ by at most one. Deterministic given the seed.
std::vector<int> make_folds(int n, int M, std::uint64_t seed);

struct CvCell {
  bool evaluated = false;  // k = 1 with lambda > 0 is skipped
  std::vector<double> fold_loglik;  // held-out log-likelihood per fold
  std::vector<char> fold_converged;
  double cv_loglik = 0.0;  // arithmetic mean of fold_loglik
  bool all_failed = false;
};

struct CvResult {
  std::vector<int> ks;
  std::vector<double> lambdas;
  int M = 0;
  std::vector<int> fold_assignment;
  std::vector<std::vector<CvCell>> cells;  // [k index][lambda index]
  int best_k = 0;
  double best_lambda = 0.0;
};

// For every usable (k, lambda) cell: fit on the training subjects with the
// given penalty, evaluate the unpenalized log-likelihood of the held-out
// subjects at the fitted parameters, and average over folds. The best cell
// maximizes the mean; ties go to smaller k, then smaller lambda. Cells are
// skipped from selection only when every fold failed to converge.
CvResult cross_validate(const PanelDataset& data, const CvGrid& grid,
                        const EmConfig& cfg);

}  // namespace penhmm

#endif  // PENHMM_CV_HPP
