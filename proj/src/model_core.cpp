#include "penhmm/model_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "penhmm/numerics.hpp"

namespace penhmm {

namespace {

constexpr double kProbFloor = 1e-300;
constexpr double kLogProbFloor = -690.77552789821368;  // log(1e-300)

void check_dimensions(const PanelDataset& data, const HmmParams& params) {
  params.validate(data.p);
  if (data.n < 1 || data.T < 1)
    throw std::invalid_argument("forward_backward: empty panel");
}

}  // namespace

double response_prob(double alpha_u, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& x) {
  if (x.size() != beta.size())
    throw std::invalid_argument("response_prob: covariate size mismatch");
  if (!std::isfinite(alpha_u) || !beta.allFinite() || !x.allFinite())
    throw std::invalid_argument("response_prob: non-finite input");
  return logistic(alpha_u + beta.dot(x));
}

double penalty_value(const Eigen::VectorXd& alpha) {
  if (alpha.size() < 1)
    throw std::invalid_argument("penalty_value: empty alpha");
  if (!alpha.allFinite())
    throw std::invalid_argument("penalty_value: non-finite alpha");
  const double mean = alpha.mean();
  return (alpha.array() - mean).square().sum();
}

ForwardBackwardResult forward_backward(const PanelDataset& data,
                                       const HmmParams& params) {
  check_dimensions(data, params);
  const int n = data.n, T = data.T, k = params.k;

  ForwardBackwardResult out;
  out.post.n = n;
  out.post.T = T;
  out.post.k = k;
  out.post.z.resize(static_cast<Eigen::Index>(n) * T, k);
  out.post.zz = RowMajorXd::Zero(static_cast<Eigen::Index>(n) * k, k);
  out.post.subject_loglik.resize(n);

  // Linear predictor without the state intercept, shared by all states.
  Eigen::VectorXd xb = data.p > 0
                           ? Eigen::VectorXd(data.X * params.beta)
                           : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * T);

  RowMajorXd b(T, k);     // shifted emission probabilities exp(logb - max)
  RowMajorXd ahat(T, k);  // normalized forward variables
  RowMajorXd bhat(T, k);  // scaled backward variables
  Eigen::VectorXd ctil(T);
  Eigen::RowVectorXd pred(k);

  for (int i = 0; i < n; ++i) {
    double loglik = 0.0;

    for (int t = 0; t < T; ++t) {
      const int r = data.row(i, t);
      double m = -std::numeric_limits<double>::infinity();
      for (int u = 0; u < k; ++u) {
        const double lb = bernoulli_logprob(data.y(i, t), params.alpha(u) + xb(r));
        b(t, u) = lb;
        if (lb > m) m = lb;
      }
      for (int u = 0; u < k; ++u) b(t, u) = std::exp(b(t, u) - m);
      loglik += m;  // the shift folds into the scaling product
    }

    for (int t = 0; t < T; ++t) {
      if (t == 0)
        pred = params.pi.transpose();
      else
        pred.noalias() = ahat.row(t - 1) * params.Pi;
      ahat.row(t) = pred.cwiseProduct(b.row(t));
      double c = ahat.row(t).sum();
      if (!(c > 0.0) || !std::isfinite(c)) {
        // Zero-probability step: fall back to the predictive distribution
        // and floor the contribution so downstream stays finite.
        ahat.row(t) = pred;
        ctil(t) = 1.0;
        loglik += kLogProbFloor;
      } else {
        ahat.row(t) /= c;
        ctil(t) = c;
        loglik += std::log(std::max(c, kProbFloor));
      }
    }
    out.post.subject_loglik(i) = loglik;

    bhat.row(T - 1).setOnes();
    for (int t = T - 2; t >= 0; --t) {
      const Eigen::RowVectorXd wb = b.row(t + 1).cwiseProduct(bhat.row(t + 1));
      bhat.row(t).noalias() = wb * params.Pi.transpose();
      bhat.row(t) /= ctil(t + 1);
    }

    for (int t = 0; t < T; ++t)
      out.post.z.row(out.post.zrow(i, t)) =
          ahat.row(t).cwiseProduct(bhat.row(t));

    for (int t = 1; t < T; ++t) {
      const double inv_c = 1.0 / ctil(t);
      for (int ub = 0; ub < k; ++ub) {
        const double a_prev = ahat(t - 1, ub);
        if (a_prev == 0.0) continue;
        for (int u = 0; u < k; ++u)
          out.post.zz(out.post.zzrow(i, ub), u) +=
              a_prev * params.Pi(ub, u) * b(t, u) * bhat(t, u) * inv_c;
      }
    }
  }

  out.total_loglik = out.post.subject_loglik.sum();
  return out;
}

double observed_loglik(const PanelDataset& data, const HmmParams& params) {
  check_dimensions(data, params);
  const int n = data.n, T = data.T, k = params.k;

  Eigen::VectorXd xb = data.p > 0
                           ? Eigen::VectorXd(data.X * params.beta)
                           : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * T);
  Eigen::RowVectorXd a(k), pred(k), b(k);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double loglik = 0.0;
    for (int t = 0; t < T; ++t) {
      const int r = data.row(i, t);
      double m = -std::numeric_limits<double>::infinity();
      for (int u = 0; u < k; ++u) {
        b(u) = bernoulli_logprob(data.y(i, t), params.alpha(u) + xb(r));
        if (b(u) > m) m = b(u);
      }
      for (int u = 0; u < k; ++u) b(u) = std::exp(b(u) - m);
      loglik += m;
      if (t == 0)
        pred = params.pi.transpose();
      else
        pred.noalias() = a * params.Pi;
      a = pred.cwiseProduct(b);
      const double c = a.sum();
      if (!(c > 0.0) || !std::isfinite(c)) {
        a = pred;
        loglik += kLogProbFloor;
      } else {
        a /= c;
        loglik += std::log(std::max(c, kProbFloor));
      }
    }
    total += loglik;
  }
  return total;
}

double penalized_loglik(const PanelDataset& data, const HmmParams& params,
                        double lambda) {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("penalized_loglik: lambda must be >= 0");
  double value = observed_loglik(data, params);
  if (lambda > 0.0) value -= lambda * penalty_value(params.alpha);
  return value;
}

}  // namespace penhmm
