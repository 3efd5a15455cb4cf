#include "hmmfdr/smoothing.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "hmmfdr/errors.hpp"

namespace hmmfdr {

namespace {

// Scaled forward-backward over an arbitrary observation window, initial
// distribution pi. Returns the state-0 smoothing probability at each window
// position.
std::vector<double> smooth_window(std::span<const double> X,
                                  const HmmParams& H, double floor) {
  const std::size_t N = X.size();
  const int J = H.states();
  std::vector<std::vector<double>> lik(N, std::vector<double>(J));
  for (std::size_t n = 0; n < N; ++n) {
    double row_max = 0.0;
    for (int j = 0; j < J; ++j) {
      lik[n][j] = std::max(H.emissions[j].density_at(X[n]), floor);
      row_max = std::max(row_max, lik[n][j]);
    }
    if (row_max <= 0.0)
      throw DegenerateLikelihood("all states have zero likelihood at position " +
                                 std::to_string(n));
  }

  std::vector<std::vector<double>> alpha(N, std::vector<double>(J));
  std::vector<double> scale(N);
  for (int j = 0; j < J; ++j) alpha[0][j] = H.pi[j] * lik[0][j];
  for (std::size_t n = 0; n < N; ++n) {
    if (n > 0) {
      for (int j = 0; j < J; ++j) {
        double acc = 0.0;
        for (int i = 0; i < J; ++i) acc += alpha[n - 1][i] * H.Q(i, j);
        alpha[n][j] = acc * lik[n][j];
      }
    }
    double c = 0.0;
    for (int j = 0; j < J; ++j) c += alpha[n][j];
    if (c <= 0.0)
      throw DegenerateLikelihood("forward pass vanished at position " +
                                 std::to_string(n));
    scale[n] = c;
    for (int j = 0; j < J; ++j) alpha[n][j] /= c;
  }

  std::vector<double> beta(J, 1.0), beta_next(J);
  std::vector<double> out(N);
  for (std::size_t n = N; n-- > 0;) {
    double norm = 0.0;
    for (int j = 0; j < J; ++j) norm += alpha[n][j] * beta[j];
    out[n] = alpha[n][0] * beta[0] / norm;
    if (n == 0) break;
    for (int i = 0; i < J; ++i) {
      double acc = 0.0;
      for (int j = 0; j < J; ++j) acc += H.Q(i, j) * lik[n][j] * beta[j];
      beta_next[i] = acc / scale[n];
    }
    beta.swap(beta_next);
  }
  return out;
}

}  // namespace

LValueVector l_values(std::span<const double> X, const HmmParams& H,
                      double density_floor) {
  LValueVector lv;
  lv.values = smooth_window(X, H, density_floor);
  lv.params_tag = std::hash<std::string>{}(to_json(H));
  return lv;
}

double windowed_l_value(std::span<const double> X, const HmmParams& H,
                        std::size_t i, std::size_t A, double density_floor) {
  if (i < A || i + A >= X.size())
    throw IndexOutOfWindow("window of half-width " + std::to_string(A) +
                           " does not fit around index " + std::to_string(i));
  auto window = X.subspan(i - A, 2 * A + 1);
  return smooth_window(window, H, density_floor)[A];
}

FilterState filter_step(FilterState state, double x, const HmmParams& H) {
  if (H.states() != 2) throw Error("filter_step requires a two-state chain");
  const double p = H.Q(0, 1);
  const double q = H.Q(1, 0);
  const double a = (1.0 - p) * state.phi + q * (1.0 - state.phi);
  const double f0 = H.emissions[0].density_at(x);
  const double f1 = H.emissions[1].density_at(x);
  double r;
  if (f0 > 0.0)
    r = f1 / f0;
  else
    r = f1 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  if (std::isinf(r)) return FilterState{0.0};
  double denom = a + r * (1.0 - a);
  if (denom <= 0.0) return FilterState{a > 0.0 ? 1.0 : 0.0};
  return FilterState{a / denom};
}

}  // namespace hmmfdr
