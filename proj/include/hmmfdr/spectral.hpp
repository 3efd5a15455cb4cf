#ifndef HMMFDR_SPECTRAL_HPP
#define HMMFDR_SPECTRAL_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hmmfdr/hmm.hpp"
#include "hmmfdr/kernel.hpp"

namespace hmmfdr {

/// Uniformly bounded feature functions h_1..h_L0 for the moment matrices.
struct FeatureSet {
  std::vector<std::function<double(double)>> h;
  double bound = 1.0;
  // Discontinuity points of the features; quadrature oracles split here.
  std::vector<double> breaks;

  int size() const { return static_cast<int>(h.size()); }

  // Indicators of an L0-cell partition of [lo, hi] (half-open cells, last
  // cell closed).
  static FeatureSet partition_indicators(int L0, double lo, double hi);
  // J=2 shortcut: h_1 = 1, h_2 = indicator of [a, b].
  static FeatureSet constant_and_indicator(double a, double b);
  // Discrete features: h_l = indicator of the l-th support value.
  static FeatureSet point_indicators(const std::vector<double>& support);
};

/// Empirical moment matrices over consecutive observation triples.
/// Triples are sorted once on the middle coordinate so each M_hat(x) query
/// touches only triples with |X_{n+1} - x| <= 2^{-L}.
class MomentMatrices {
 public:
  MomentMatrices(std::span<const double> X, const FeatureSet& h);

  const Eigen::MatrixXd& P_hat() const { return P_; }
  std::size_t triple_count() const { return mid_.size(); }
  int feature_count() const { return static_cast<int>(h_first_.rows()); }

  Eigen::MatrixXd M_hat(const Kernel& K, BandwidthLevel L, double x) const;
  // Naive O(N) reference sum, used to validate the pruned path.
  Eigen::MatrixXd M_hat_naive(const Kernel& K, BandwidthLevel L,
                              double x) const;

 private:
  std::vector<double> mid_;       // middle coordinates, ascending
  Eigen::MatrixXd h_first_;       // L0 x T, h_l(X_n) in sorted-triple order
  Eigen::MatrixXd h_last_;        // L0 x T, h_m(X_{n+2})
  Eigen::MatrixXd P_;
};

Eigen::MatrixXd empirical_P(std::span<const double> X, const FeatureSet& h);
Eigen::MatrixXd empirical_M(const MomentMatrices& mm, const Kernel& K,
                            BandwidthLevel L, double x);

/// Population counterparts computed by quadrature; test oracle only.
struct PopulationMoments {
  Eigen::MatrixXd P;  // O diag(pi) Q^2 O^T
  Eigen::MatrixXd M;  // O diag(pi) Q D^x Q O^T
  Eigen::MatrixXd O;  // O_{l,j} = E[h_l(X_1) | theta_1 = j]
  Eigen::MatrixXd D;  // diag(K_L[f_j](x))
};
PopulationMoments population_moments(const HmmParams& H, const FeatureSet& h,
                                     const Kernel& K, BandwidthLevel L,
                                     double x);

/// Top-J right singular vectors of P_hat, sign-fixed (largest-magnitude
/// entry positive). Throws RankDeficient when sigma_J < 1e-10.
Eigen::MatrixXd project_svd(const Eigen::MatrixXd& P_hat, int J);

/// B^x = (V^T P V)^{-1} V^T M^x V.
Eigen::MatrixXd b_matrix(const MomentMatrices& mm, const Eigen::MatrixXd& V,
                         const Kernel& K, BandwidthLevel L, double x);

/// Min pairwise eigenvalue gap; 0 for matrices with materially complex
/// spectra or repeated eigenvalues.
double eigen_separation(const Eigen::MatrixXd& B);

/// Candidate (a, u) pairs with sum |a_i| <= 1, from deterministic dyadic
/// grids. For J = 2 the a component degenerates to the scalar 1.
struct DiagonalizerSearchSpace {
  struct Point {
    Eigen::VectorXd a;
    Eigen::VectorXd u;
  };
  std::vector<Point> points;

  // u-grid of dyadic rationals of the given depth on [lo, hi], a = 1 (J=2).
  static DiagonalizerSearchSpace dyadic_scalar(int depth, double lo,
                                               double hi);
  static DiagonalizerSearchSpace from_points(const std::vector<double>& us);
};

struct DiagonalizerChoice {
  Eigen::VectorXd a, u;
  Eigen::MatrixXd R;          // unit-norm eigenvector columns, ascending eigenvalue
  double sep_achieved = 0.0;
};

DiagonalizerChoice select_diagonalizer(const MomentMatrices& mm,
                                       const Eigen::MatrixXd& V,
                                       const Kernel& K, BandwidthLevel L,
                                       const DiagonalizerSearchSpace& space,
                                       int J);

struct EvalGrid {
  double lo = 0.0, hi = 1.0;
  int nodes = 1024;
  double step() const { return (hi - lo) / (nodes - 1); }
  double node(int i) const { return lo + step() * i; }
};

struct SpectralFit {
  Eigen::MatrixXd V_hat;
  Eigen::MatrixXd R_hat;
  std::vector<GridDensity> densities;  // estimator-internal label order
  BandwidthLevel level;
  double alpha = 0.0;
  double sep_achieved = 0.0;
  Eigen::VectorXd a_hat, u_hat;
};

/// Full continuous-case pipeline: empirical moments, SVD projection,
/// diagonalizer search, pointwise eigenvalue read-off on the grid, with
/// values clamped to +-N^alpha. bandwidth_multiplier scales the target
/// 2^L before rounding.
SpectralFit estimate_emissions(std::span<const double> X, double s,
                               const FeatureSet& h,
                               const DiagonalizerSearchSpace& space,
                               double alpha, const EvalGrid& grid, int J = 2,
                               double bandwidth_multiplier = 1.0);

/// Discrete variant: features and kernel replaced by exact point indicators;
/// outputs pmfs over the observed support, clipped at 0 and renormalized.
std::vector<DiscretePmf> estimate_emissions_discrete(
    std::span<const double> X, int J = 2);

std::string to_json(const SpectralFit& fit);

}  // namespace hmmfdr

#endif
