#include "penhmm/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "penhmm/inference.hpp"
#include "penhmm/numerics.hpp"

namespace penhmm {

Eigen::VectorXd Scenario::alpha_preset(int j) {
  Eigen::VectorXd a(3);
  switch (j) {
    case 1: a << -3, 0, 3; break;
    case 2: a << -6, 0, 6; break;
    case 3: a << -6, -3, 0; break;
    case 4: a << -20, -5, 5; break;
    case 5: a << -40, -15, 0; break;
    default:
      throw std::invalid_argument("alpha_preset: index must be 1..5");
  }
  return a;
}

Scenario Scenario::motivating_example(std::uint64_t seed) {
  Scenario sc;
  sc.n = 250;
  sc.T = 10;
  sc.persistence = Persistence::Low;
  sc.alpha = alpha_preset(4);
  sc.beta.resize(4);
  sc.beta << 1, -1, 1, 1;
  sc.include_lag = true;
  sc.seed = seed;
  sc.label = "motivating_example";
  return sc;
}

Eigen::MatrixXd Scenario::transition_matrix() const {
  if (Pi_override.size() > 0) return Pi_override;
  const int kk = k();
  const double diag = persistence == Persistence::High ? 0.900 : 0.750;
  if (kk == 1) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd P =
      Eigen::MatrixXd::Constant(kk, kk, (1.0 - diag) / (kk - 1));
  P.diagonal().setConstant(diag);
  return P;
}

void Scenario::validate() const {
  if (n < 1 || T < 2) throw std::invalid_argument("scenario: bad panel size");
  if (alpha.size() < 1) throw std::invalid_argument("scenario: empty alpha");
  if (pi.size() != 0 && pi.size() != alpha.size())
    throw std::invalid_argument("scenario: pi size mismatch");
  if (Pi_override.size() > 0 &&
      (Pi_override.rows() != alpha.size() || Pi_override.cols() != alpha.size()))
    throw std::invalid_argument("scenario: Pi override size mismatch");
  if (include_lag && beta.size() < 1)
    throw std::invalid_argument("scenario: lag needs at least one covariate");
  if (n_replicates < 1)
    throw std::invalid_argument("scenario: need at least one replicate");
}

namespace {

int sample_categorical(const Eigen::VectorXd& prob, double uniform) {
  double acc = 0.0;
  for (int u = 0; u < prob.size(); ++u) {
    acc += prob(u);
    if (uniform < acc) return u;
  }
  return static_cast<int>(prob.size()) - 1;
}

}  // namespace

SimulatedPanel simulate(const Scenario& scenario, int replicate_id) {
  scenario.validate();
  const int n = scenario.n, T = scenario.T;
  const int k = scenario.k();
  const int p = static_cast<int>(scenario.beta.size());
  const Eigen::VectorXd pi = scenario.pi.size() > 0
                                 ? scenario.pi
                                 : Eigen::VectorXd::Constant(k, 1.0 / k);
  const Eigen::MatrixXd Pi = scenario.transition_matrix();

  auto rng = seeded_rng(scenario.seed, 0x51D0u,
                        static_cast<std::uint64_t>(replicate_id));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulatedPanel out;
  out.data.n = n;
  out.data.T = T;
  out.data.p = p;
  out.data.y.resize(n, T);
  out.data.X.resize(static_cast<Eigen::Index>(n) * T, p);
  out.data.lag_column = scenario.include_lag ? p - 1 : -1;
  out.data.covariate_names.resize(p);
  for (int j = 0; j < p; ++j)
    out.data.covariate_names[j] =
        (scenario.include_lag && j == p - 1) ? "y_lag" : "x" + std::to_string(j + 1);
  out.states.resize(n, T);

  for (int i = 0; i < n; ++i) {
    int state = 0;
    for (int t = 0; t < T; ++t) {
      state = sample_categorical(t == 0 ? pi : Eigen::VectorXd(Pi.row(state)),
                                 unif(rng));
      out.states(i, t) = state;
      const int r = out.data.row(i, t);
      for (int j = 0; j < p; ++j) out.data.X(r, j) = gauss(rng);
      if (scenario.include_lag)
        out.data.X(r, p - 1) = t == 0 ? 0.0 : static_cast<double>(out.data.y(i, t - 1));
      const double eta = scenario.alpha(state) +
                         (p > 0 ? out.data.X.row(r).dot(scenario.beta) : 0.0);
      out.data.y(i, t) = unif(rng) < logistic(eta) ? 1 : 0;
    }
  }
  out.data.fill_default_metadata();
  return out;
}

double mse(double truth, const std::vector<double>& estimates) {
  if (estimates.empty()) throw std::invalid_argument("mse: no estimates");
  double acc = 0.0;
  for (double e : estimates) acc += (truth - e) * (truth - e);
  return acc / static_cast<double>(estimates.size());
}

double pct_change(double value, double base) {
  if (value == base) return 0.0;
  return 100.0 * (value - base) / base;
}

namespace {

struct ReplicateFit {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd se_beta;
  bool rank_ok = false;
  double seconds = 0.0;
};

ReplicateFit fit_replicate(const PanelDataset& data, int k, EmConfig cfg) {
  ReplicateFit out;
  const auto t0 = std::chrono::steady_clock::now();
  FitResult f = fit(data, k, cfg);
  const auto t1 = std::chrono::steady_clock::now();
  out.seconds = std::chrono::duration<double>(t1 - t0).count();
  const SeReport se = standard_errors(data, f, cfg.lambda);
  out.alpha = f.params.alpha;
  out.beta = f.params.beta;
  out.se_beta = se.se.tail(data.p);
  out.rank_ok = identifiability_check(se);
  return out;
}

}  // namespace

MetricTable run_study(const std::vector<Scenario>& scenarios,
                      const std::vector<double>& lambdas, const EmConfig& cfg) {
  cfg.validate();

  // lambda = 0 is always the baseline cell.
  std::vector<double> lams{0.0};
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw std::invalid_argument("run_study: lambda < 0");
    if (std::find(lams.begin(), lams.end(), l) == lams.end()) lams.push_back(l);
  }
  std::sort(lams.begin(), lams.end());

  MetricTable table;
  for (size_t s = 0; s < scenarios.size(); ++s) {
    const Scenario& sc = scenarios[s];
    sc.validate();
    const int R = sc.n_replicates;
    const int k = sc.k();
    const int p = static_cast<int>(sc.beta.size());
    const int L = static_cast<int>(lams.size());

    std::vector<SimulatedPanel> panels(R);
    for (int r = 0; r < R; ++r) panels[r] = simulate(sc, r);

    std::vector<std::vector<ReplicateFit>> fits(L, std::vector<ReplicateFit>(R));
    parallel_for(L * R, [&](int j) {
      const int li = j / R, r = j % R;
      EmConfig cell = cfg;
      cell.lambda = lams[li];
      cell.seed = mix64(cfg.seed ^ mix64(0xBE4Cu + s)) ^
                  mix64(static_cast<std::uint64_t>(r) + 0x9E37u);
      fits[li][r] = fit_replicate(panels[r].data, k, cell);
    });

    std::vector<int> included;
    for (int r = 0; r < R; ++r)
      if (fits[0][r].rank_ok) included.push_back(r);

    ScenarioMetrics row;
    row.label = sc.label.empty() ? "scenario" + std::to_string(s) : sc.label;
    row.excluded_replicates = R - static_cast<int>(included.size());
    for (int li = 0; li < L; ++li) {
      StudyCell cell;
      cell.lambda = lams[li];
      cell.replicates_used = static_cast<int>(included.size());
      cell.mse_alpha.assign(k, std::numeric_limits<double>::quiet_NaN());
      cell.mse_beta.assign(p, std::numeric_limits<double>::quiet_NaN());
      cell.mean_se_beta.assign(p, std::numeric_limits<double>::quiet_NaN());
      if (!included.empty()) {
        for (int u = 0; u < k; ++u) {
          std::vector<double> est;
          for (int r : included) est.push_back(fits[li][r].alpha(u));
          cell.mse_alpha[u] = mse(sc.alpha(u), est);
        }
        for (int j = 0; j < p; ++j) {
          std::vector<double> est;
          for (int r : included) est.push_back(fits[li][r].beta(j));
          cell.mse_beta[j] = mse(sc.beta(j), est);
          double se_sum = 0.0;
          int se_count = 0;
          for (int r : included) {
            const double v = fits[li][r].se_beta(j);
            if (std::isfinite(v)) {
              se_sum += v;
              ++se_count;
            }
          }
          if (se_count > 0) cell.mean_se_beta[j] = se_sum / se_count;
        }
        double sec = 0.0;
        for (int r : included) sec += fits[li][r].seconds;
        cell.mean_seconds = sec / included.size();
      }
      row.cells.push_back(std::move(cell));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace penhmm
