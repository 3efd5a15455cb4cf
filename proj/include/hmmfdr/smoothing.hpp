#ifndef HMMFDR_SMOOTHING_HPP
#define HMMFDR_SMOOTHING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hmmfdr/hmm.hpp"

namespace hmmfdr {

/// Per-position posterior null probabilities l_i = P(theta_i = 0 | X).
struct LValueVector {
  std::vector<double> values;
  std::uint64_t params_tag = 0;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

// Density floor applied at likelihood evaluation; estimated densities can be
// zero or negative on parts of the grid.
inline constexpr double kDensityFloor = 1e-12;

/// Scaled forward-backward smoothing. For J > 2 the returned values are the
/// state-0 posterior marginals.
LValueVector l_values(std::span<const double> X, const HmmParams& H,
                      double density_floor = kDensityFloor);

/// Posterior at position i given only the window X_{i-A}..X_{i+A}, with the
/// window-start state drawn from pi. Indices are 0-based.
double windowed_l_value(std::span<const double> X, const HmmParams& H,
                        std::size_t i, std::size_t A,
                        double density_floor = kDensityFloor);

/// Filtering state Phi = P(theta_i = 0 | X_{<=i}) for the two-state chain.
struct FilterState {
  double phi = 0.5;
};

/// One step of the scalar forward filter recursion, using the conventions
/// 1/0 = infinity and 0/0 = 0 for the likelihood ratio f_1/f_0.
FilterState filter_step(FilterState state, double x, const HmmParams& H);

}  // namespace hmmfdr

#endif
