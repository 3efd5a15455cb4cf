#include "hmmfdr/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "hmmfdr/errors.hpp"

namespace hmmfdr {

namespace {

constexpr double kParamLo = 1e-4;
constexpr double kParamHi = 1.0 - 1e-4;

double clamp_param(double v) { return std::clamp(v, kParamLo, kParamHi); }

// Scaled forward pass over precomputed per-observation likelihoods.
double loglik_pq(const std::vector<double>& l0, const std::vector<double>& l1,
                 double p, double q) {
  const double pi0 = q / (p + q);
  double a0 = pi0 * l0[0];
  double a1 = (1.0 - pi0) * l1[0];
  double ll = 0.0;
  for (std::size_t n = 0;; ++n) {
    double c = a0 + a1;
    ll += std::log(c);
    a0 /= c;
    a1 /= c;
    if (n + 1 == l0.size()) break;
    double b0 = (a0 * (1.0 - p) + a1 * q) * l0[n + 1];
    double b1 = (a0 * p + a1 * (1.0 - q)) * l1[n + 1];
    a0 = b0;
    a1 = b1;
  }
  return ll;
}

struct NmPoint {
  double p, q, value;
};

}  // namespace

double transition_loglik(std::span<const double> X,
                         const std::vector<EmissionModel>& emissions, double p,
                         double q, double density_floor) {
  std::vector<double> l0(X.size()), l1(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    l0[i] = std::max(emissions[0].density_at(X[i]), density_floor);
    l1[i] = std::max(emissions[1].density_at(X[i]), density_floor);
  }
  return loglik_pq(l0, l1, p, q);
}

RecoveredParams estimate_transition(std::span<const double> X,
                                    const std::vector<EmissionModel>& emissions,
                                    double density_floor) {
  if (emissions.size() != 2)
    throw Error("estimate_transition supports exactly two states");
  if (X.empty()) throw Error("estimate_transition requires observations");

  std::vector<double> l0(X.size()), l1(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    l0[i] = std::max(emissions[0].density_at(X[i]), density_floor);
    l1[i] = std::max(emissions[1].density_at(X[i]), density_floor);
  }
  auto objective = [&](double p, double q) {
    return loglik_pq(l0, l1, clamp_param(p), clamp_param(q));
  };

  // Coarse grid stage.
  const int G = 32;
  double best_p = 0.5, best_q = 0.5;
  double best = -std::numeric_limits<double>::infinity();
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < G; ++i) {
    for (int j = 0; j < G; ++j) {
      double p = kParamLo + (kParamHi - kParamLo) * (i + 0.5) / G;
      double q = kParamLo + (kParamHi - kParamLo) * (j + 0.5) / G;
      double v = objective(p, q);
      if (v > best) {
        best = v;
        best_p = p;
        best_q = q;
      }
      worst = std::min(worst, v);
    }
  }
  if (best - worst < 1e-10)
    throw FlatLikelihood("likelihood surface is flat in (p, q)");

  // Nelder-Mead polish.
  std::array<NmPoint, 3> simplex{
      NmPoint{best_p, best_q, best},
      NmPoint{clamp_param(best_p + 0.02), best_q, 0.0},
      NmPoint{best_p, clamp_param(best_q + 0.02), 0.0}};
  simplex[1].value = objective(simplex[1].p, simplex[1].q);
  simplex[2].value = objective(simplex[2].p, simplex[2].q);

  for (int iter = 0; iter < 300; ++iter) {
    std::sort(simplex.begin(), simplex.end(),
              [](const NmPoint& a, const NmPoint& b) { return a.value > b.value; });
    if (simplex[0].value - simplex[2].value < 1e-12) break;
    double cp = 0.5 * (simplex[0].p + simplex[1].p);
    double cq = 0.5 * (simplex[0].q + simplex[1].q);
    // Reflection.
    double rp = clamp_param(cp + (cp - simplex[2].p));
    double rq = clamp_param(cq + (cq - simplex[2].q));
    double rv = objective(rp, rq);
    if (rv > simplex[0].value) {
      double ep = clamp_param(cp + 2.0 * (cp - simplex[2].p));
      double eq = clamp_param(cq + 2.0 * (cq - simplex[2].q));
      double evv = objective(ep, eq);
      simplex[2] = evv > rv ? NmPoint{ep, eq, evv} : NmPoint{rp, rq, rv};
    } else if (rv > simplex[1].value) {
      simplex[2] = NmPoint{rp, rq, rv};
    } else {
      double sp = clamp_param(cp + 0.5 * (simplex[2].p - cp));
      double sq = clamp_param(cq + 0.5 * (simplex[2].q - cq));
      double sv = objective(sp, sq);
      if (sv > simplex[2].value) {
        simplex[2] = NmPoint{sp, sq, sv};
      } else {
        // Shrink toward the best vertex.
        for (int k = 1; k < 3; ++k) {
          simplex[k].p =
              clamp_param(simplex[0].p + 0.5 * (simplex[k].p - simplex[0].p));
          simplex[k].q =
              clamp_param(simplex[0].q + 0.5 * (simplex[k].q - simplex[0].q));
          simplex[k].value = objective(simplex[k].p, simplex[k].q);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(),
            [](const NmPoint& a, const NmPoint& b) { return a.value > b.value; });

  const double p = simplex[0].p, q = simplex[0].q;
  Eigen::MatrixXd Q(2, 2);
  Q << 1.0 - p, p, q, 1.0 - q;
  TransitionMatrix Qm(Q);
  return RecoveredParams{Qm, stationary_distribution(Qm), {0, 1},
                         simplex[0].value};
}

std::array<int, 2> align_labels(const SpectralFit& fit,
                                const RecoveredParams& params,
                                const AlignmentRule& rule,
                                std::span<const double> X) {
  if (rule.kind == AlignmentRule::Kind::ByStationaryMass) {
    double diff = params.pi_hat[1] - params.pi_hat[0];
    if (std::abs(diff) < 1e-12)
      throw AmbiguousAlignment("stationary masses are tied");
    return diff > 0.0 ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
  }

  // ByTailRatio: evaluate at M_N = max of the truncated observations over
  // the first ceil(ln N) positions.
  if (X.empty()) throw Error("align_labels requires observations");
  std::size_t count = static_cast<std::size_t>(
      std::max(1.0, std::ceil(std::log(static_cast<double>(X.size())))));
  count = std::min(count, X.size());
  double m_n = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    double xt = (rule.x_star_infinite || X[i] <= rule.x_star) ? X[i] : 0.0;
    m_n = std::max(m_n, xt);
  }
  EmissionModel f0(fit.densities[0]);
  EmissionModel f1(fit.densities[1]);
  double d0 = f0.density_at(m_n);
  double d1 = f1.density_at(m_n);
  if (std::abs(d0 - d1) < 1e-12)
    throw AmbiguousAlignment("densities tied at the tail evaluation point");
  // The slot with the larger density at M_N is the alternative.
  return d0 > d1 ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
}

}  // namespace hmmfdr
