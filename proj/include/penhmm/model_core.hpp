#ifndef PENHMM_MODEL_CORE_HPP
#define PENHMM_MODEL_CORE_HPP

#include <Eigen/Core>

#include "penhmm/panel.hpp"
#include "penhmm/params.hpp"

namespace penhmm {

// Smoothed posteriors of the hidden chain given a subject's full data.
// z(i*T + t, u)   = P(state u at occasion t | y_i, x_i)
// zz(i*k + ub, u) = expected number of ub -> u transitions for subject i,
//                   i.e. the pairwise posteriors summed over occasions >= 2.
struct Posteriors {
  int n = 0;
  int T = 0;
  int k = 1;
  RowMajorXd z;
  RowMajorXd zz;
  Eigen::VectorXd subject_loglik;  // log p(y_i | x_i), length n

  int zrow(int i, int t) const { return i * T + t; }
  int zzrow(int i, int ubar) const { return i * k + ubar; }
};

struct ForwardBackwardResult {
  Posteriors post;
  double total_loglik = 0.0;
};

// P(y = 1 | state with support point alpha_u, covariates x).
// Throws std::invalid_argument on non-finite input or size mismatch.
double response_prob(double alpha_u, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& x);

// Sum of squared deviations of the support points from their mean,
// equivalently alpha' (I - 11'/k) alpha.
double penalty_value(const Eigen::VectorXd& alpha);

// Scaled forward-backward recursions. Per-occasion emission vectors are
// max-shifted in log space and the forward pass is renormalized at every
// step; the log of the scaling product accumulates the subject
// log-likelihood, so no intermediate quantity underflows even for very
// long panels. The backward pass reuses the same scaling constants, which
// makes z rows sum to one up to roundoff and keeps the pairwise sums
// consistent with the smoothed marginals.
ForwardBackwardResult forward_backward(const PanelDataset& data,
                                       const HmmParams& params);

// Observed-data log-likelihood (forward pass only, cheaper than the full
// recursion when posteriors are not needed).
double observed_loglik(const PanelDataset& data, const HmmParams& params);

// observed_loglik minus lambda * penalty_value(alpha). lambda must be >= 0.
double penalized_loglik(const PanelDataset& data, const HmmParams& params,
                        double lambda);

}  // namespace penhmm

#endif  // PENHMM_MODEL_CORE_HPP
