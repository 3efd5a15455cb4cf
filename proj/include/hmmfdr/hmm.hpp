#ifndef HMMFDR_HMM_HPP
#define HMMFDR_HMM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hmmfdr/errors.hpp"
#include "hmmfdr/rng.hpp"

namespace hmmfdr {

enum class Measure { Continuous, DiscreteInteger };

/// Row-stochastic J x J transition matrix, validated on construction.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const { return entries_; }
  int states() const { return static_cast<int>(entries_.rows()); }
  double operator()(int i, int j) const { return entries_(i, j); }

  double min_entry() const { return entries_.minCoeff(); }
  bool is_strictly_positive() const { return min_entry() > 0.0; }
  bool is_full_rank(double tol = 1e-12) const;

 private:
  Eigen::MatrixXd entries_;
};

class StationaryDist {
 public:
  explicit StationaryDist(Eigen::VectorXd probs);

  const Eigen::VectorXd& probs() const { return probs_; }
  double operator[](int j) const { return probs_(j); }
  int size() const { return static_cast<int>(probs_.size()); }

 private:
  Eigen::VectorXd probs_;
};

struct Gaussian {
  double mean, sd;
};
struct Cauchy {
  double location, scale;
};
struct BetaDist {
  double alpha, beta;
};
struct UniformDist {
  double lo, hi;
};
struct DiscretePmf {
  std::map<int, double> probs;  // must sum to 1 within 1e-12
};
// Grid-backed density estimate on a uniform grid with linear interpolation.
// Values may be negative (the spectral estimator is not a density); they are
// clamped to [-cap, cap] on construction.
struct GridDensity {
  double lo = 0.0;
  double step = 1.0;
  std::vector<double> values;
  double cap = 1e300;

  GridDensity() = default;
  GridDensity(double lo_, double step_, std::vector<double> vals, double cap_);
  double hi() const { return lo + step * (values.size() - 1); }
};

class EmissionModel {
 public:
  using Variant =
      std::variant<Gaussian, Cauchy, BetaDist, UniformDist, DiscretePmf,
                   GridDensity>;

  EmissionModel(Gaussian g) : v_(g) {}
  EmissionModel(Cauchy c) : v_(c) {}
  EmissionModel(BetaDist b);
  EmissionModel(UniformDist u);
  EmissionModel(DiscretePmf p);
  EmissionModel(GridDensity g) : v_(std::move(g)) {}

  double density_at(double x) const;
  double sample(Rng& rng) const;
  bool is_discrete() const { return std::holds_alternative<DiscretePmf>(v_); }
  bool is_grid() const { return std::holds_alternative<GridDensity>(v_); }
  const Variant& variant() const { return v_; }

  // Interval containing all the mass (finite for compact supports, wide for
  // heavy tails); used by quadrature oracles.
  std::pair<double, double> quadrature_support() const;

 private:
  Variant v_;
};

struct HmmParams {
  TransitionMatrix Q;
  StationaryDist pi;
  std::vector<EmissionModel> emissions;
  Measure measure = Measure::Continuous;

  HmmParams(TransitionMatrix q, StationaryDist p,
            std::vector<EmissionModel> em,
            Measure m = Measure::Continuous);
  int states() const { return Q.states(); }
};

struct SampledPath {
  std::vector<int> states;
  std::vector<double> observations;
  std::uint64_t seed = 0;
};

/// Solves pi Q = pi with a normalization row; throws NonIrreducible when the
/// system is singular beyond tolerance.
StationaryDist stationary_distribution(const TransitionMatrix& Q);

double marginal_density(const HmmParams& H, double x);

SampledPath simulate(const HmmParams& H, std::size_t N, std::uint64_t seed);

// JSON schema:
// {"Q": [[..]], "pi": [..], "emissions": [{"kind": ..}], "measure": ..}
std::string to_json(const HmmParams& H);
HmmParams params_from_json(const std::string& text);

}  // namespace hmmfdr

#endif
