#include "penhmm/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace penhmm {

namespace {
constexpr double kSimplexTol = 1e-12;
}

void HmmParams::validate(int expected_p) const {
  if (k < 1) throw std::invalid_argument("params: k must be >= 1");
  if (alpha.size() != k) throw std::invalid_argument("params: alpha size != k");
  if (pi.size() != k) throw std::invalid_argument("params: pi size != k");
  if (Pi.rows() != k || Pi.cols() != k)
    throw std::invalid_argument("params: Pi must be k x k");
  if (expected_p >= 0 && beta.size() != expected_p)
    throw std::invalid_argument("params: beta size does not match covariates");
  if (!alpha.allFinite() || !beta.allFinite() || !pi.allFinite() ||
      !Pi.allFinite())
    throw std::invalid_argument("params: non-finite entries");
  if (pi.minCoeff() < 0.0 || std::abs(pi.sum() - 1.0) > kSimplexTol)
    throw std::invalid_argument("params: pi is not a probability vector");
  for (int u = 0; u < k; ++u) {
    if (Pi.row(u).minCoeff() < 0.0 ||
        std::abs(Pi.row(u).sum() - 1.0) > kSimplexTol)
      throw std::invalid_argument("params: Pi row is not a probability vector");
  }
}

void HmmParams::canonicalize() {
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return alpha(a) < alpha(b); });
  bool identity = true;
  for (int u = 0; u < k; ++u) identity = identity && order[u] == u;
  if (identity) return;

  Eigen::VectorXd a(k), p0(k);
  Eigen::MatrixXd P(k, k);
  for (int u = 0; u < k; ++u) {
    a(u) = alpha(order[u]);
    p0(u) = pi(order[u]);
    for (int v = 0; v < k; ++v) P(u, v) = Pi(order[u], order[v]);
  }
  alpha = a;
  pi = p0;
  Pi = P;
}

Eigen::VectorXd HmmParams::flatten() const {
  const int p = static_cast<int>(beta.size());
  Eigen::VectorXd v(k + p + k + k * k);
  v.head(k) = alpha;
  v.segment(k, p) = beta;
  v.segment(k + p, k) = pi;
  for (int u = 0; u < k; ++u) v.segment(k + p + k + u * k, k) = Pi.row(u);
  return v;
}

}  // namespace penhmm
