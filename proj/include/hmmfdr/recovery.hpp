#ifndef HMMFDR_RECOVERY_HPP
#define HMMFDR_RECOVERY_HPP

#include <array>
#include <span>
#include <vector>

#include "hmmfdr/hmm.hpp"
#include "hmmfdr/spectral.hpp"

namespace hmmfdr {

/// Rule for resolving label switching so state 0 is the null.
struct AlignmentRule {
  enum class Kind { ByStationaryMass, ByTailRatio };
  Kind kind = Kind::ByStationaryMass;
  double x_star = 0.0;
  bool x_star_infinite = true;

  static AlignmentRule by_stationary_mass() {
    return {Kind::ByStationaryMass, 0.0, false};
  }
  static AlignmentRule by_tail_ratio(double x_star) {
    return {Kind::ByTailRatio, x_star, false};
  }
  static AlignmentRule by_tail_ratio_infinite() {
    return {Kind::ByTailRatio, 0.0, true};
  }
};

struct RecoveredParams {
  TransitionMatrix Q_hat;
  StationaryDist pi_hat;
  std::array<int, 2> permutation{0, 1};
  double loglik = 0.0;
};

/// Profile MLE of the two-state transition matrix with the emission
/// densities held fixed: coarse 32x32 grid over (p, q) then a Nelder-Mead
/// polish. Deterministic for fixed inputs.
RecoveredParams estimate_transition(std::span<const double> X,
                                    const std::vector<EmissionModel>& emissions,
                                    double density_floor = 1e-12);

/// Forward-algorithm log-likelihood for given (p, q) = (Q_01, Q_10) with
/// stationary initial distribution; exposed for oracle cross-checks.
double transition_loglik(std::span<const double> X,
                         const std::vector<EmissionModel>& emissions, double p,
                         double q, double density_floor = 1e-12);

/// Estimated permutation tau: element j gives the true-label estimate for
/// estimator slot j. Throws AmbiguousAlignment when the deciding comparison
/// is within 1e-12.
std::array<int, 2> align_labels(const SpectralFit& fit,
                                const RecoveredParams& params,
                                const AlignmentRule& rule,
                                std::span<const double> X);

}  // namespace hmmfdr

#endif
