#ifndef PENHMM_PARAMS_HPP
#define PENHMM_PARAMS_HPP

#include <Eigen/Core>

namespace penhmm {

// Full parameter vector of the model: state-specific support points alpha
// (log-odds intercepts), regression coefficients beta, initial distribution
// pi and transition matrix Pi of the hidden chain.
//
// Canonical form keeps alpha sorted ascending; states are relabeled
// consistently. This resolves label switching across starts.
struct HmmParams {
  int k = 1;
  Eigen::VectorXd alpha;  // k support points
  Eigen::VectorXd beta;   // p regression coefficients
  Eigen::VectorXd pi;     // k initial probabilities
  Eigen::MatrixXd Pi;     // k x k transition matrix, rows sum to 1

  int p() const { return static_cast<int>(beta.size()); }

  // k + p + (k-1) + k(k-1) free parameters.
  int n_free_params() const { return k + p() + (k - 1) + k * (k - 1); }

  // Throws std::invalid_argument on shape errors, non-finite values, or
  // probability constraints violated beyond 1e-12.
  void validate(int expected_p = -1) const;

  // Relabels states so alpha is sorted ascending.
  void canonicalize();

  // [alpha; beta; pi; rows of Pi] for convergence deltas.
  Eigen::VectorXd flatten() const;
};

}  // namespace penhmm

#endif  // PENHMM_PARAMS_HPP
