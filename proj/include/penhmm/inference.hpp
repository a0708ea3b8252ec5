#ifndef PENHMM_INFERENCE_HPP
#define PENHMM_INFERENCE_HPP

#include <Eigen/Core>

#include "penhmm/em.hpp"

namespace penhmm {

// Standard errors and rank diagnostics for (alpha, beta).
// info is the observed information obtained by numerically differentiating
// the EM score (the gradient of the expected complete-data objective with
// posteriors recomputed at each evaluation point) and symmetrizing.
struct SeReport {
  Eigen::VectorXd se;       // k+p; NaN where unavailable
  Eigen::VectorXd pvalues;  // p, two-sided Wald tests for beta only
  Eigen::MatrixXd info;     // (k+p) x (k+p)
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool full_rank = false;
};

// EM score at the given parameters: posteriors are recomputed at params and
// the (penalized) expected complete-data objective is differentiated with
// respect to [alpha; beta]. At a stationary point this equals the gradient
// of the penalized observed-data log-likelihood.
Eigen::VectorXd em_score(const PanelDataset& data, const HmmParams& params,
                         double lambda);

// Central-difference information matrix, standard errors and Wald p-values.
// When the information is numerically rank deficient, the alpha standard
// errors are omitted (NaN) and the beta ones come from the eigenvalue-
// clipped pseudo-inverse.
SeReport standard_errors(const PanelDataset& data, const FitResult& fit,
                         double lambda);

// Local identifiability: smallest eigenvalue of the observed information
// exceeds rank_tol times the largest.
bool identifiability_check(const SeReport& report, double rank_tol = 1e-10);

// Local decoding and posterior-weighted support points.
// states(i, t) is the 0-based index of the most probable state (ties go to
// the lowest index); alpha_bar(i, t) = sum_u alpha(u) z(i, t, u).
struct Decoding {
  Eigen::MatrixXi states;
  Eigen::MatrixXd alpha_bar;
};

Decoding decode(const FitResult& fit, const Posteriors& post);

}  // namespace penhmm

#endif  // PENHMM_INFERENCE_HPP
