#ifndef HMMFDR_TESTING_HPP
#define HMMFDR_TESTING_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hmmfdr/smoothing.hpp"

namespace hmmfdr {

/// An l-value threshold; +infinity gets a distinguished marker rather than
/// a float sentinel.
struct Threshold {
  double value = 0.0;
  bool is_infinite = false;

  static Threshold finite(double v) { return {v, false}; }
  static Threshold infinite() { return {0.0, true}; }
  bool admits(double l) const { return is_infinite || l < value; }
};

/// phi_i = 1{l_i < lambda} (strict inequality).
std::vector<std::uint8_t> threshold_procedure(const LValueVector& lv,
                                              Threshold lambda);

/// Average of the selected l-values: sum(l_i phi_i) / max(1, sum(phi_i)).
double post_fdr(const LValueVector& lv, std::span<const std::uint8_t> phi);

struct KHatResult {
  std::size_t K_hat = 0;
  Threshold lambda_hat;
};

/// K_hat = the unique K with mean of the K smallest l-values <= t < mean of
/// the K+1 smallest; lambda_hat = the (K_hat+1)-th order statistic (infinite
/// when K_hat = N).
KHatResult select_k_hat(const LValueVector& lv, double t);

struct TestingOutcome {
  std::size_t K_hat = 0;
  Threshold lambda_hat;
  std::vector<std::uint8_t> rejections;
  double post_fdr = 0.0;
  double level_t = 0.0;
};

/// Rejects exactly K_hat of the smallest l-values, ties broken by lowest
/// index. Realized post_fdr <= t by construction.
TestingOutcome procedure_hat(const LValueVector& lv, double t);

struct ErrorReport {
  double fdp = 0.0;
  double tdp = 0.0;
  std::size_t n_rejected = 0;
  std::size_t n_signals = 0;
  std::size_t n_false = 0;
};

ErrorReport error_report(std::span<const int> theta,
                         std::span<const std::uint8_t> phi);

/// Ratio-of-sums estimators of (mFDR, mTDR) over replicates, 0/0 -> 0.
std::pair<double, double> marginal_rates(
    std::span<const std::pair<std::vector<int>, std::vector<std::uint8_t>>>
        replicates);

}  // namespace hmmfdr

#endif
