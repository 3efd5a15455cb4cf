#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmmfdr/recovery.hpp"
#include "test_util.hpp"

using namespace hmmfdr;
using testutil::make_hmm;
using testutil::random_hmm;
using testutil::two_state;

namespace {

// Independent scaled forward pass for the profile likelihood.
double forward_loglik(std::span<const double> X,
                      const std::vector<EmissionModel>& ems, double p,
                      double q) {
  const double pi0 = q / (p + q);
  double a0 = pi0 * std::max(1e-12, ems[0].density_at(X[0]));
  double a1 = (1.0 - pi0) * std::max(1e-12, ems[1].density_at(X[0]));
  const double c0 = a0 + a1;
  double ll = std::log(c0);
  a0 /= c0;
  a1 /= c0;
  for (std::size_t n = 1; n < X.size(); ++n) {
    const double f0 = std::max(1e-12, ems[0].density_at(X[n]));
    const double f1 = std::max(1e-12, ems[1].density_at(X[n]));
    const double b0 = (a0 * (1.0 - p) + a1 * q) * f0;
    const double b1 = (a0 * p + a1 * (1.0 - q)) * f1;
    const double c = b0 + b1;
    ll += std::log(c);
    a0 = b0 / c;
    a1 = b1 / c;
  }
  return ll;
}

// A grid-density snapshot of a parametric emission, for SpectralFit stubs.
GridDensity snapshot(const EmissionModel& f, double lo, double hi, int n) {
  std::vector<double> vals(n);
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) vals[i] = f.density_at(lo + step * i);
  return GridDensity(lo, step, std::move(vals), 1e6);
}

SpectralFit stub_fit(const EmissionModel& f0, const EmissionModel& f1) {
  SpectralFit fit;
  fit.densities = {snapshot(f0, -6, 9, 512), snapshot(f1, -6, 9, 512)};
  return fit;
}

RecoveredParams stub_params(double p, double q) {
  TransitionMatrix Q = two_state(p, q);
  return {Q, stationary_distribution(Q), {0, 1}, 0.0};
}

}  // namespace

TEST_CASE("transition recovery is consistent with true emissions") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{2, 1});
  SampledPath path = simulate(H, 20000, 19);
  RecoveredParams rec = estimate_transition(path.observations, H.emissions);
  CHECK(std::abs(rec.Q_hat(0, 1) - 0.2) < 0.03);
  CHECK(std::abs(rec.Q_hat(1, 0) - 0.3) < 0.03);
  // pi_hat stationary for Q_hat
  Eigen::RowVector2d pi(rec.pi_hat[0], rec.pi_hat[1]);
  CHECK((pi * rec.Q_hat.entries() - pi).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("identical emissions flatten the likelihood") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{0, 1});
  SampledPath path = simulate(H, 2000, 7);
  CHECK_THROWS_AS(
      estimate_transition(path.observations, H.emissions),
      FlatLikelihood);
}

TEST_CASE("tiny inputs give a deterministic interior optimum") {
  std::vector<double> X{0.4, 1.7};
  std::vector<EmissionModel> ems{EmissionModel(Gaussian{0, 1}),
                                 EmissionModel(Gaussian{2, 1})};
  RecoveredParams a = estimate_transition(X, ems);
  RecoveredParams b = estimate_transition(X, ems);
  CHECK(a.Q_hat.entries() == b.Q_hat.entries());
  CHECK(a.loglik == b.loglik);
  CHECK(a.Q_hat.min_entry() > 0.0);
}

TEST_CASE("log-likelihood matches an independent forward pass") {
  Rng rng(61);
  for (int rep = 0; rep < 20; ++rep) {
    HmmParams H = random_hmm(rng);
    SampledPath path = simulate(H, 200, 300 + rep);
    const double p = rng.uniform(0.05, 0.95);
    const double q = rng.uniform(0.05, 0.95);
    const double mine =
        transition_loglik(path.observations, H.emissions, p, q);
    const double ref = forward_loglik(path.observations, H.emissions, p, q);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("recovery is invariant to jointly permuting emissions") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{2, 1});
  SampledPath path = simulate(H, 5000, 83);
  RecoveredParams rec = estimate_transition(path.observations, H.emissions);
  std::vector<EmissionModel> swapped{H.emissions[1], H.emissions[0]};
  RecoveredParams rec_sw = estimate_transition(path.observations, swapped);
  CHECK(std::abs(rec_sw.Q_hat(0, 1) - rec.Q_hat(1, 0)) < 1e-6);
  CHECK(std::abs(rec_sw.Q_hat(1, 0) - rec.Q_hat(0, 1)) < 1e-6);
  CHECK(std::abs(rec_sw.pi_hat[0] - rec.pi_hat[1]) < 1e-6);
}

TEST_CASE("stationary-mass alignment") {
  SpectralFit fit = stub_fit(EmissionModel(Gaussian{0, 1}),
                             EmissionModel(Gaussian{2, 1}));
  std::vector<double> X{0.1, 0.2};
  // stub_params(p, q) has pi_0 = q/(p+q): (0.3, 0.7) puts the heavier mass
  // in slot 0, so the permutation is the identity
  auto tau1 = align_labels(fit, stub_params(0.3, 0.7),
                           AlignmentRule::by_stationary_mass(), X);
  CHECK(tau1 == std::array<int, 2>{0, 1});
  auto tau2 = align_labels(fit, stub_params(0.7, 0.3),
                           AlignmentRule::by_stationary_mass(), X);
  CHECK(tau2 == std::array<int, 2>{1, 0});

  // exact tie is ambiguous
  CHECK_THROWS_AS(align_labels(fit, stub_params(0.5, 0.5),
                               AlignmentRule::by_stationary_mass(), X),
                  AmbiguousAlignment);
}

TEST_CASE("alignment equivariance under pre-swapped labels") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{3, 1});
  SampledPath path = simulate(H, 20000, 9);
  SpectralFit fit = stub_fit(H.emissions[0], H.emissions[1]);
  SpectralFit swapped = stub_fit(H.emissions[1], H.emissions[0]);
  RecoveredParams rec = stub_params(0.2, 0.3);
  AlignmentRule rule = AlignmentRule::by_tail_ratio_infinite();
  auto tau = align_labels(fit, rec, rule, path.observations);
  auto tau_sw = align_labels(swapped, rec, rule, path.observations);
  CHECK(tau[0] == tau_sw[1]);
  CHECK(tau[1] == tau_sw[0]);
}

TEST_CASE("tail-ratio alignment identifies the gaussian shift") {
  // Under a positive mean shift the alternative dominates at the running
  // max, so the slot with the larger density there is the alternative.
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{3, 1});
  int correct = 0;
  for (int rep = 0; rep < 20; ++rep) {
    SampledPath path = simulate(H, 20000, 400 + rep);
    SpectralFit fit = stub_fit(H.emissions[0], H.emissions[1]);
    auto tau = align_labels(fit, stub_params(0.2, 0.3),
                            AlignmentRule::by_tail_ratio_infinite(),
                            path.observations);
    if (tau == std::array<int, 2>{0, 1}) ++correct;
  }
  CHECK(correct >= 19);
}
