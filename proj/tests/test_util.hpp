#ifndef HMMFDR_TEST_UTIL_HPP
#define HMMFDR_TEST_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hmmfdr/hmm.hpp"
#include "hmmfdr/rng.hpp"
#include "hmmfdr/smoothing.hpp"

namespace hmmfdr::testutil {

inline TransitionMatrix two_state(double p, double q) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0 - p, p, q, 1.0 - q;
  return TransitionMatrix(m);
}

inline HmmParams make_hmm(double p, double q, EmissionModel f0,
                          EmissionModel f1,
                          Measure measure = Measure::Continuous) {
  TransitionMatrix Q = two_state(p, q);
  return HmmParams(Q, stationary_distribution(Q), {std::move(f0), std::move(f1)},
                   measure);
}

/// Random two-state Gaussian HMM with well-separated parameters.
inline HmmParams random_hmm(Rng& rng) {
  const double p = rng.uniform(0.1, 0.9);
  const double q = rng.uniform(0.1, 0.9);
  const double m0 = rng.uniform(-2.0, 0.0);
  const double m1 = rng.uniform(0.5, 2.5);
  return make_hmm(p, q, Gaussian{m0, rng.uniform(0.5, 2.0)},
                  Gaussian{m1, rng.uniform(0.5, 2.0)});
}

/// Exhaustive-path posterior null probabilities, O(2^N * N). Oracle for the
/// forward-backward recursion.
inline std::vector<double> enumerated_posterior(std::span<const double> X,
                                                const HmmParams& H) {
  const std::size_t N = X.size();
  const auto& Q = H.Q;
  double total = 0.0;
  std::vector<double> null_mass(N, 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << N); ++mask) {
    int prev = int(mask & 1);
    // same likelihood floor the smoother applies at evaluation time
    auto lik = [&](int j, double x) {
      return std::max(H.emissions[j].density_at(x), kDensityFloor);
    };
    double w = H.pi[prev] * lik(prev, X[0]);
    for (std::size_t n = 1; n < N; ++n) {
      const int cur = int((mask >> n) & 1);
      w *= Q(prev, cur) * lik(cur, X[n]);
      prev = cur;
    }
    total += w;
    for (std::size_t i = 0; i < N; ++i)
      if (((mask >> i) & 1) == 0) null_mass[i] += w;
  }
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) out[i] = null_mass[i] / total;
  return out;
}

/// Composite Simpson rule; an integration path independent of the adaptive
/// Gauss-Legendre quadrature in the library.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n = 20000) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace hmmfdr::testutil

#endif
