#include "hmmfdr/testing.hpp"

#include <algorithm>
#include <numeric>

#include "hmmfdr/errors.hpp"

namespace hmmfdr {

std::vector<std::uint8_t> threshold_procedure(const LValueVector& lv,
                                              Threshold lambda) {
  std::vector<std::uint8_t> phi(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i)
    phi[i] = lambda.admits(lv[i]) ? 1 : 0;
  return phi;
}

double post_fdr(const LValueVector& lv, std::span<const std::uint8_t> phi) {
  if (phi.size() != lv.size()) throw Error("post_fdr length mismatch");
  double selected_sum = 0.0;
  std::size_t n_selected = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (phi[i]) {
      selected_sum += lv[i];
      ++n_selected;
    }
  }
  return selected_sum / static_cast<double>(std::max<std::size_t>(1, n_selected));
}

KHatResult select_k_hat(const LValueVector& lv, double t) {
  if (t <= 0.0 || t >= 1.0) throw Error("level t must be in (0,1)");
  std::vector<double> sorted(lv.values);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t N = sorted.size();
  // Prefix means of sorted values are nondecreasing, so K_hat is the largest
  // K whose prefix mean is <= t (K = 0 always qualifies by convention).
  std::size_t K = 0;
  double prefix = 0.0;
  for (std::size_t k = 1; k <= N; ++k) {
    prefix += sorted[k - 1];
    if (prefix / static_cast<double>(k) <= t) K = k;
  }
  KHatResult out;
  out.K_hat = K;
  out.lambda_hat =
      K == N ? Threshold::infinite() : Threshold::finite(sorted[K]);
  return out;
}

TestingOutcome procedure_hat(const LValueVector& lv, double t) {
  KHatResult kh = select_k_hat(lv, t);
  const std::size_t N = lv.size();
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  // Stable sort on value: ties resolved by lowest original index.
  std::stable_sort(order.begin(), order.end(),
                   [&lv](std::size_t a, std::size_t b) { return lv[a] < lv[b]; });
  TestingOutcome out;
  out.K_hat = kh.K_hat;
  out.lambda_hat = kh.lambda_hat;
  out.level_t = t;
  out.rejections.assign(N, 0);
  for (std::size_t k = 0; k < kh.K_hat; ++k) out.rejections[order[k]] = 1;
  out.post_fdr = post_fdr(lv, out.rejections);
  return out;
}

ErrorReport error_report(std::span<const int> theta,
                         std::span<const std::uint8_t> phi) {
  if (theta.size() != phi.size()) throw Error("error_report length mismatch");
  ErrorReport r;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    bool rejected = phi[i] != 0;
    bool signal = theta[i] != 0;
    if (rejected) ++r.n_rejected;
    if (signal) ++r.n_signals;
    if (rejected && !signal) ++r.n_false;
  }
  std::size_t true_disc = r.n_rejected - r.n_false;
  r.fdp = static_cast<double>(r.n_false) /
          static_cast<double>(std::max<std::size_t>(1, r.n_rejected));
  r.tdp = static_cast<double>(true_disc) /
          static_cast<double>(std::max<std::size_t>(1, r.n_signals));
  return r;
}

std::pair<double, double> marginal_rates(
    std::span<const std::pair<std::vector<int>, std::vector<std::uint8_t>>>
        replicates) {
  if (replicates.empty()) throw Error("marginal_rates requires replicates");
  double n_false = 0, n_rejected = 0, n_true_disc = 0, n_signals = 0;
  for (const auto& [theta, phi] : replicates) {
    ErrorReport r = error_report(theta, phi);
    n_false += static_cast<double>(r.n_false);
    n_rejected += static_cast<double>(r.n_rejected);
    n_true_disc += static_cast<double>(r.n_rejected - r.n_false);
    n_signals += static_cast<double>(r.n_signals);
  }
  double mfdr = n_rejected > 0.0 ? n_false / n_rejected : 0.0;
  double mtdr = n_signals > 0.0 ? n_true_disc / n_signals : 0.0;
  return {mfdr, mtdr};
}

}  // namespace hmmfdr
