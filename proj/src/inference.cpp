#include "penhmm/inference.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include <Eigen/Eigenvalues>

#include "penhmm/numerics.hpp"

namespace penhmm {

Eigen::VectorXd em_score(const PanelDataset& data, const HmmParams& params,
                         double lambda) {
  const Posteriors post = e_step(data, params);
  Eigen::VectorXd coef(params.k + data.p);
  coef.head(params.k) = params.alpha;
  coef.tail(data.p) = params.beta;
  return q_score(data, post, coef, lambda);
}

SeReport standard_errors(const PanelDataset& data, const FitResult& fit,
                         double lambda) {
  if (!fit.converged)
    std::cerr << "penhmm: standard errors computed at a non-converged fit\n";

  const int k = fit.params.k, p = data.p, d = k + p;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Eigen::VectorXd theta(d);
  theta.head(k) = fit.params.alpha;
  theta.tail(p) = fit.params.beta;

  auto score_at = [&](const Eigen::VectorXd& coef) {
    HmmParams perturbed = fit.params;
    perturbed.alpha = coef.head(k);
    perturbed.beta = coef.tail(p);
    return em_score(data, perturbed, lambda);
  };

  Eigen::MatrixXd jac(d, d);
  for (int s = 0; s < d; ++s) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta(s)));
    Eigen::VectorXd up = theta, down = theta;
    up(s) += h;
    down(s) -= h;
    jac.col(s) = (score_at(up) - score_at(down)) / (2.0 * h);
  }

  SeReport report;
  report.info = -0.5 * (jac + jac.transpose());
  report.se = Eigen::VectorXd::Constant(d, nan);
  report.pvalues = Eigen::VectorXd::Constant(p, nan);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(report.info);
  const Eigen::VectorXd& values = eig.eigenvalues();
  report.min_eigenvalue = values.minCoeff();
  report.max_eigenvalue = values.maxCoeff();
  report.full_rank = report.max_eigenvalue > 0.0 &&
                     report.min_eigenvalue > 1e-10 * report.max_eigenvalue;

  if (report.full_rank) {
    const Eigen::MatrixXd cov = eig.eigenvectors() *
                                values.cwiseInverse().asDiagonal() *
                                eig.eigenvectors().transpose();
    report.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else if (report.max_eigenvalue > 0.0) {
    // Rank-deficient information: drop the alpha block and report betas
    // from the clipped pseudo-inverse.
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j)
      if (values(j) > 1e-10 * report.max_eigenvalue) inv(j) = 1.0 / values(j);
    const Eigen::MatrixXd cov =
        eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    for (int j = 0; j < p; ++j) {
      const double v = cov(k + j, k + j);
      if (v > 0.0) report.se(k + j) = std::sqrt(v);
    }
  }

  for (int j = 0; j < p; ++j) {
    const double s = report.se(k + j);
    if (std::isfinite(s) && s > 0.0) {
      const double zstat = std::abs(fit.params.beta(j)) / s;
      report.pvalues(j) = std::erfc(zstat / std::sqrt(2.0));
    }
  }
  return report;
}

bool identifiability_check(const SeReport& report, double rank_tol) {
  return report.max_eigenvalue > 0.0 &&
         report.min_eigenvalue > rank_tol * report.max_eigenvalue;
}

Decoding decode(const FitResult& fit, const Posteriors& post) {
  const int n = post.n, T = post.T, k = post.k;
  Decoding out;
  out.states.resize(n, T);
  out.alpha_bar.resize(n, T);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) {
      const auto zrow = post.z.row(post.zrow(i, t));
      int best = 0;
      for (int u = 1; u < k; ++u)
        if (zrow(u) > zrow(best)) best = u;
      out.states(i, t) = best;
      out.alpha_bar(i, t) = zrow.dot(fit.params.alpha);
    }
  }
  return out;
}

}  // namespace penhmm
