#ifndef PENHMM_EM_HPP
#define PENHMM_EM_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "penhmm/model_core.hpp"

namespace penhmm {

struct EmConfig {
  double lambda = 0.0;       // penalty weight on the support-point spread
  int max_em_iters = 1000;
  double eps_loglik = 1e-8;  // relative objective change threshold
  double eps_params = 1e-5;  // max absolute parameter change threshold
  int max_nr_iters = 50;
  double nr_tol = 1e-8;      // sup-norm score threshold inside the M-step
  int n_starts_deterministic = 1;
  int n_starts_random = 24;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitResult {
  HmmParams params;
  double loglik = 0.0;
  double penalized_loglik = 0.0;
  int n_iters = 0;
  bool converged = false;
  int start_id = -1;
  std::vector<double> loglik_trace;  // penalized objective, one entry per pass
  std::optional<Eigen::VectorXd> se;  // k+p standard errors when computed
  std::optional<bool> info_rank_ok;
  bool uniform_row_fix = false;  // a zero-mass transition row was reset
  int nr_fallbacks = 0;          // gradient steps taken when the solve failed
};

// Expectation step: delegates to forward_backward.
Posteriors e_step(const PanelDataset& data, const HmmParams& params);

struct LatentEstimates {
  Eigen::VectorXd pi;
  Eigen::MatrixXd Pi;
  bool zero_row = false;
};

// Closed-form update of the initial and transition probabilities from the
// smoothed posteriors. A transition row with no posterior mass is reset to
// uniform and flagged.
LatentEstimates m_step_latent(const Posteriors& post);

// Expected complete-data log-likelihood of the measurement part, as a
// function of coef = [alpha; beta], minus lambda times the penalty.
double q_value(const PanelDataset& data, const Posteriors& post,
               const Eigen::VectorXd& coef, double lambda);

// Gradient of q_value with respect to coef.
Eigen::VectorXd q_score(const PanelDataset& data, const Posteriors& post,
                        const Eigen::VectorXd& coef, double lambda);

// Gradient and Hessian of q_value. The alpha block of the Hessian gets the
// -2 lambda (I - 11'/k) correction; all other blocks are the plain weighted
// logistic-regression curvature.
void q_score_hessian(const PanelDataset& data, const Posteriors& post,
                     const Eigen::VectorXd& coef, double lambda,
                     Eigen::VectorXd& score, Eigen::MatrixXd& hessian);

struct NrReport {
  int iters = 0;
  bool fallback_used = false;
};

// Newton-Raphson ascent on q_value with step halving. Guarantees
// q_value(result) >= q_value(coef_init). Falls back to a scaled gradient
// step when the Newton direction is unusable.
Eigen::VectorXd m_step_measurement(const PanelDataset& data,
                                   const Posteriors& post,
                                   Eigen::VectorXd coef, double lambda,
                                   const EmConfig& cfg,
                                   NrReport* report = nullptr);

// Deterministic initialization: equispaced alpha around the marginal
// log-odds, beta = 0, uniform pi, diagonally dominant Pi.
HmmParams deterministic_start(const PanelDataset& data, int k);

// Random initialization: standard normal perturbation of the deterministic
// alpha and beta, pi and Pi rows drawn uniformly from the simplex.
HmmParams random_start(const PanelDataset& data, int k, std::mt19937_64& rng);

// One EM run from the given initial parameters.
FitResult run_em(const PanelDataset& data, HmmParams init, const EmConfig& cfg,
                 int start_id);

// Multi-start EM. Runs the deterministic and random starts (each with its
// own RNG stream derived from cfg.seed and the start id, so results do not
// depend on scheduling) and returns the run with the highest penalized
// log-likelihood.
FitResult fit(const PanelDataset& data, int k, const EmConfig& cfg);

}  // namespace penhmm

#endif  // PENHMM_EM_HPP
