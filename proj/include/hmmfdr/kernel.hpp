#ifndef HMMFDR_KERNEL_HPP
#define HMMFDR_KERNEL_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "hmmfdr/hmm.hpp"

namespace hmmfdr {

namespace quad {

// Adaptive composite Gauss-Legendre quadrature. Bisects until the estimate
// on an interval agrees with the sum over its halves within the tolerance
// share assigned to it. Throws QuadratureFailure when recursion bottoms out.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-8);

// Splits [a,b] at the given internal break points before integrating, for
// integrands that are only piecewise smooth.
double integrate_split(const std::function<double(double)>& f, double a,
                       double b, const std::vector<double>& breaks,
                       double abs_tol = 1e-8);

}  // namespace quad

/// Compactly supported convolution kernel: an even polynomial times the
/// bump (1-u^2)^2, so K vanishes with its derivative at the endpoints.
/// Vanishing moments 1..order are enforced by a moment linear system.
class Kernel {
 public:
  int order() const { return order_; }
  double lipschitz_bound() const { return lipschitz_bound_; }
  double sup_bound() const { return sup_bound_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  // K(u); zero outside [-1,1].
  double operator()(double u) const;

 private:
  friend Kernel build_kernel(double s);
  std::vector<double> coeffs_;  // monomial coefficients on [-1,1]
  int order_ = 0;
  double lipschitz_bound_ = 0.0;
  double sup_bound_ = 0.0;
};

struct BandwidthLevel {
  int L = 0;
  double scale() const { return static_cast<double>(1 << L); }
  double halfwidth() const { return 1.0 / scale(); }
};

/// Kernel of order ceil(s)-1 for estimating C^s densities.
Kernel build_kernel(double s);

/// Dyadic level with 2^L ~= (N/log N)^{1/(1+2s)}, rounded on the log2 scale.
BandwidthLevel choose_level(std::size_t N, double s);

/// K_L(x,y) = 2^L K(2^L (x-y)).
double eval_KL(const Kernel& K, BandwidthLevel L, double x, double y);

/// x -> integral of K_L(x,y) f(y) dy by adaptive quadrature. Test oracle.
std::function<double(double)> smooth(const Kernel& K, BandwidthLevel L,
                                     const EmissionModel& f);

}  // namespace hmmfdr

#endif
