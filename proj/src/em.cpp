#include "penhmm/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "penhmm/numerics.hpp"

namespace penhmm {

void EmConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("config: lambda must be >= 0");
  if (!(eps_loglik > 0.0) || !(eps_params > 0.0) || !(nr_tol > 0.0))
    throw std::invalid_argument("config: tolerances must be > 0");
  if (max_em_iters < 1 || max_nr_iters < 1)
    throw std::invalid_argument("config: iteration caps must be >= 1");
  if (n_starts_deterministic < 0 || n_starts_random < 0 ||
      n_starts_deterministic + n_starts_random < 1)
    throw std::invalid_argument("config: need at least one start");
}

Posteriors e_step(const PanelDataset& data, const HmmParams& params) {
  return forward_backward(data, params).post;
}

LatentEstimates m_step_latent(const Posteriors& post) {
  const int n = post.n, k = post.k;
  LatentEstimates out;
  out.pi = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < n; ++i) out.pi += post.z.row(post.zrow(i, 0)).transpose();
  out.pi /= out.pi.sum();

  out.Pi.resize(k, k);
  for (int ub = 0; ub < k; ++ub) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(k);
    for (int i = 0; i < n; ++i) row += post.zz.row(post.zzrow(i, ub));
    const double mass = row.sum();
    if (!(mass > 0.0) || !std::isfinite(mass)) {
      out.Pi.row(ub).setConstant(1.0 / k);
      out.zero_row = true;
    } else {
      out.Pi.row(ub) = row / mass;
    }
  }
  return out;
}

namespace {

Eigen::VectorXd linear_predictor(const PanelDataset& data,
                                 const Eigen::VectorXd& beta) {
  if (data.p == 0)
    return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.n) * data.T);
  return data.X * beta;
}

}  // namespace

double q_value(const PanelDataset& data, const Posteriors& post,
               const Eigen::VectorXd& coef, double lambda) {
  const int k = post.k, p = data.p;
  if (coef.size() != k + p)
    throw std::invalid_argument("q_value: coef size mismatch");
  const Eigen::VectorXd alpha = coef.head(k);
  const Eigen::VectorXd xb = linear_predictor(data, coef.tail(p));

  double q = 0.0;
  const Eigen::Index rows = static_cast<Eigen::Index>(data.n) * data.T;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int yv = data.y(static_cast<int>(r / data.T), static_cast<int>(r % data.T));
    for (int u = 0; u < k; ++u) {
      const double zr = post.z(r, u);
      if (zr == 0.0) continue;
      q += zr * bernoulli_logprob(yv, alpha(u) + xb(r));
    }
  }
  if (lambda > 0.0) q -= lambda * penalty_value(alpha);
  return q;
}

namespace {

// Shared accumulation for score and (optionally) Hessian.
void accumulate_score_hessian(const PanelDataset& data, const Posteriors& post,
                              const Eigen::VectorXd& coef, double lambda,
                              Eigen::VectorXd& score,
                              Eigen::MatrixXd* hessian) {
  const int k = post.k, p = data.p, d = k + p;
  if (coef.size() != d)
    throw std::invalid_argument("q_score: coef size mismatch");
  if (!coef.allFinite())
    throw std::invalid_argument("q_score: non-finite coef");
  const Eigen::VectorXd alpha = coef.head(k);
  const Eigen::VectorXd xb = linear_predictor(data, coef.tail(p));

  score.setZero(d);
  if (hessian) hessian->setZero(d, d);

  const Eigen::Index rows = static_cast<Eigen::Index>(data.n) * data.T;
  Eigen::VectorXd phi(k);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int yv = data.y(static_cast<int>(r / data.T), static_cast<int>(r % data.T));
    double resid = 0.0;  // sum_u z (y - phi), multiplies x in the beta score
    double wsum = 0.0;   // sum_u z phi (1 - phi), multiplies xx'
    for (int u = 0; u < k; ++u) {
      const double zr = post.z(r, u);
      if (zr == 0.0) continue;
      const double ph = logistic(alpha(u) + xb(r));
      const double g = zr * (yv - ph);
      const double w = zr * ph * (1.0 - ph);
      score(u) += g;
      resid += g;
      wsum += w;
      if (hessian) {
        (*hessian)(u, u) -= w;
        if (p > 0) hessian->block(u, k, 1, p).noalias() -= w * data.X.row(r);
      }
    }
    if (p > 0) {
      score.tail(p).noalias() += resid * data.X.row(r).transpose();
      if (hessian)
        hessian->bottomRightCorner(p, p).noalias() -=
            wsum * (data.X.row(r).transpose() * data.X.row(r));
    }
  }
  if (hessian && p > 0)
    hessian->block(k, 0, p, k) = hessian->block(0, k, k, p).transpose();

  if (lambda > 0.0) {
    const double mean = alpha.mean();
    score.head(k) -= 2.0 * lambda * (alpha.array() - mean).matrix();
    if (hessian) {
      Eigen::MatrixXd J = Eigen::MatrixXd::Identity(k, k);
      J.array() -= 1.0 / k;
      hessian->topLeftCorner(k, k) -= 2.0 * lambda * J;
    }
  }
}

}  // namespace

Eigen::VectorXd q_score(const PanelDataset& data, const Posteriors& post,
                        const Eigen::VectorXd& coef, double lambda) {
  Eigen::VectorXd s;
  accumulate_score_hessian(data, post, coef, lambda, s, nullptr);
  return s;
}

void q_score_hessian(const PanelDataset& data, const Posteriors& post,
                     const Eigen::VectorXd& coef, double lambda,
                     Eigen::VectorXd& score, Eigen::MatrixXd& hessian) {
  accumulate_score_hessian(data, post, coef, lambda, score, &hessian);
}

Eigen::VectorXd m_step_measurement(const PanelDataset& data,
                                   const Posteriors& post,
                                   Eigen::VectorXd coef, double lambda,
                                   const EmConfig& cfg, NrReport* report) {
  const int d = static_cast<int>(coef.size());
  constexpr double kMaxStep = 10.0;  // per-coordinate cap, log-odds units
  double q = q_value(data, post, coef, lambda);

  Eigen::VectorXd score(d);
  Eigen::MatrixXd hess(d, d);
  for (int it = 0; it < cfg.max_nr_iters; ++it) {
    if (report) report->iters = it + 1;
    q_score_hessian(data, post, coef, lambda, score, hess);
    if (score.lpNorm<Eigen::Infinity>() < cfg.nr_tol) break;

    // Coordinates with no curvature carry no Newton information; solve the
    // reduced system on the rest.
    std::vector<int> active;
    active.reserve(d);
    for (int j = 0; j < d; ++j)
      if (hess(j, j) < 0.0) active.push_back(j);

    Eigen::VectorXd step = Eigen::VectorXd::Zero(d);
    bool newton_ok = false;
    if (static_cast<int>(active.size()) == d) {
      Eigen::VectorXd dir = hess.ldlt().solve(score);
      if (dir.allFinite() && score.dot(dir) < 0.0) {
        step = -dir;
        newton_ok = true;
      }
    } else if (!active.empty()) {
      const int m = static_cast<int>(active.size());
      Eigen::MatrixXd ha(m, m);
      Eigen::VectorXd sa(m);
      for (int a = 0; a < m; ++a) {
        sa(a) = score(active[a]);
        for (int b = 0; b < m; ++b) ha(a, b) = hess(active[a], active[b]);
      }
      Eigen::VectorXd dir = ha.ldlt().solve(sa);
      if (dir.allFinite() && sa.dot(dir) < 0.0) {
        for (int a = 0; a < m; ++a) step(active[a]) = -dir(a);
        newton_ok = true;
      }
    }
    if (!newton_ok) {
      step = score / (1.0 + score.lpNorm<Eigen::Infinity>());
      if (report) report->fallback_used = true;
    }

    const double mag = step.lpNorm<Eigen::Infinity>();
    if (mag > kMaxStep) step *= kMaxStep / mag;

    bool improved = false;
    double q_new = q;
    Eigen::VectorXd cand;
    for (int halve = 0; halve < 20; ++halve) {
      cand = coef + step;
      q_new = q_value(data, post, cand, lambda);
      if (std::isfinite(q_new) && q_new > q) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;

    const double gain = q_new - q;
    coef = cand;
    q = q_new;
    if (gain < 1e-12 * (1.0 + std::abs(q))) break;
  }
  return coef;
}

HmmParams deterministic_start(const PanelDataset& data, int k) {
  double ybar = data.y.cast<double>().mean();
  ybar = std::min(std::max(ybar, 1e-6), 1.0 - 1e-6);
  const double base = logit(ybar);

  HmmParams params;
  params.k = k;
  params.alpha = k == 1 ? Eigen::VectorXd::Constant(1, base)
                        : Eigen::VectorXd(Eigen::VectorXd::LinSpaced(k, base - 2.0, base + 2.0));
  params.beta = Eigen::VectorXd::Zero(data.p);
  params.pi = Eigen::VectorXd::Constant(k, 1.0 / k);
  params.Pi = Eigen::MatrixXd::Constant(k, k, 0.2 / k);
  params.Pi.diagonal().array() += 0.8;
  return params;
}

HmmParams random_start(const PanelDataset& data, int k, std::mt19937_64& rng) {
  HmmParams params = deterministic_start(data, k);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int u = 0; u < k; ++u) params.alpha(u) += gauss(rng);
  for (int j = 0; j < data.p; ++j) params.beta(j) += gauss(rng);
  params.pi = flat_simplex(k, rng);
  for (int u = 0; u < k; ++u) params.Pi.row(u) = flat_simplex(k, rng).transpose();
  params.canonicalize();
  return params;
}

FitResult run_em(const PanelDataset& data, HmmParams init, const EmConfig& cfg,
                 int start_id) {
  cfg.validate();
  init.canonicalize();
  init.validate(data.p);
  const int k = init.k, p = data.p;

  FitResult res;
  res.start_id = start_id;

  HmmParams params = std::move(init);
  ForwardBackwardResult fb = forward_backward(data, params);
  double pll = fb.total_loglik;
  if (cfg.lambda > 0.0) pll -= cfg.lambda * penalty_value(params.alpha);
  res.loglik_trace.push_back(pll);

  for (int h = 1; h <= cfg.max_em_iters; ++h) {
    const Eigen::VectorXd prev = params.flatten();

    LatentEstimates lat = m_step_latent(fb.post);
    res.uniform_row_fix = res.uniform_row_fix || lat.zero_row;

    Eigen::VectorXd coef(k + p);
    coef.head(k) = params.alpha;
    coef.tail(p) = params.beta;
    NrReport nr;
    coef = m_step_measurement(data, fb.post, coef, cfg.lambda, cfg, &nr);
    if (nr.fallback_used) ++res.nr_fallbacks;

    params.alpha = coef.head(k);
    params.beta = coef.tail(p);
    params.pi = lat.pi;
    params.Pi = lat.Pi;
    params.canonicalize();

    fb = forward_backward(data, params);
    double pll_new = fb.total_loglik;
    if (cfg.lambda > 0.0) pll_new -= cfg.lambda * penalty_value(params.alpha);
    res.loglik_trace.push_back(pll_new);

    const double rel =
        (pll_new - pll) / std::max(std::abs(pll_new), 1e-10);
    const double dmax =
        (params.flatten() - prev).lpNorm<Eigen::Infinity>();
    pll = pll_new;
    res.n_iters = h;
    if (rel < cfg.eps_loglik && dmax < cfg.eps_params) {
      res.converged = true;
      break;
    }
  }

  res.params = std::move(params);
  res.loglik = fb.total_loglik;
  res.penalized_loglik = pll;
  return res;
}

FitResult fit(const PanelDataset& data, int k, const EmConfig& cfg) {
  cfg.validate();
  data.validate();
  if (k < 1) throw std::invalid_argument("fit: k must be >= 1");

  const int n_starts = cfg.n_starts_deterministic + cfg.n_starts_random;
  std::vector<FitResult> runs(n_starts);
  parallel_for(n_starts, [&](int s) {
    HmmParams init;
    if (s < cfg.n_starts_deterministic) {
      init = deterministic_start(data, k);
    } else {
      auto rng = seeded_rng(cfg.seed, 0xA117u, static_cast<std::uint64_t>(s));
      init = random_start(data, k, rng);
    }
    runs[s] = run_em(data, init, cfg, s);
  });

  int best = 0;
  for (int s = 1; s < n_starts; ++s) {
    const double a = runs[s].penalized_loglik;
    const double b = runs[best].penalized_loglik;
    if (std::isfinite(a) && (!std::isfinite(b) || a > b)) best = s;
  }
  return runs[best];
}

}  // namespace penhmm
