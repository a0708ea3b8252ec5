#ifndef PENHMM_NUMERICS_HPP
#define PENHMM_NUMERICS_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace penhmm {

// Logistic function, safe for |eta| far beyond 1e3.
inline double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(logistic(eta)), computed without cancellation for large |eta|.
inline double log_logistic(double eta) {
  if (eta >= 0.0) return -std::log1p(std::exp(-eta));
  return eta - std::log1p(std::exp(eta));
}

// log p(y | eta) for a Bernoulli with success log-odds eta.
inline double bernoulli_logprob(int y, double eta) {
  return y != 0 ? log_logistic(eta) : log_logistic(-eta);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// splitmix64 finalizer; used to derive independent RNG streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic RNG for stream (seed, a, b, c). Streams with distinct
// components are independent for practical purposes.
inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t a = 0,
                                  std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0x853c49e6748fea9bull);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return std::mt19937_64(h);
}

// Uniform draw from the probability simplex of dimension k.
inline Eigen::VectorXd flat_simplex(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd v(k);
  for (int u = 0; u < k; ++u) v(u) = -std::log1p(-unif(rng));
  return v / v.sum();
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

// Worker count; PENHMM_THREADS is the only environment knob.
inline int thread_count() {
  const char* s = std::getenv("PENHMM_THREADS");
  if (s == nullptr) return 1;
  int v = std::atoi(s);
  if (v < 1) v = 1;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw > 0 && v > hw) v = hw;
  return v;
}

// Runs body(0..count-1), possibly on several threads. Each index is
// processed exactly once; callers must write only to index-owned slots so
// results do not depend on the schedule.
inline void parallel_for(int count, const std::function<void(int)>& body) {
  const int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace penhmm

#endif  // PENHMM_NUMERICS_HPP
