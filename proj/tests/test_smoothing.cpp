#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmmfdr/smoothing.hpp"
#include "test_util.hpp"

using namespace hmmfdr;
using testutil::make_hmm;
using testutil::enumerated_posterior;
using testutil::random_hmm;

TEST_CASE("identical emissions make observations uninformative") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{0, 1});
  SampledPath path = simulate(H, 50, 1);
  LValueVector lv = l_values(path.observations, H);
  for (double l : lv.values) CHECK(l == doctest::Approx(H.pi[0]).epsilon(1e-10));
}

TEST_CASE("single observation reduces to Bayes rule") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{2, 1});
  const double x = 1.3;
  std::vector<double> X{x};
  LValueVector lv = l_values(X, H);
  const double n0 = H.pi[0] * H.emissions[0].density_at(x);
  const double n1 = H.pi[1] * H.emissions[1].density_at(x);
  CHECK(lv[0] == doctest::Approx(n0 / (n0 + n1)).epsilon(1e-12));
}

TEST_CASE("matches exhaustive path enumeration") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    HmmParams H = random_hmm(rng);
    SampledPath path = simulate(H, 10, 1000 + rep);
    LValueVector lv = l_values(path.observations, H);
    std::vector<double> oracle = enumerated_posterior(path.observations, H);
    for (std::size_t i = 0; i < oracle.size(); ++i)
      CHECK(std::abs(lv[i] - oracle[i]) < 1e-10);
  }
}

TEST_CASE("l-values live in [0,1] and tag the parameters") {
  Rng rng(3);
  HmmParams H = random_hmm(rng);
  SampledPath path = simulate(H, 200, 9);
  LValueVector lv = l_values(path.observations, H);
  CHECK(lv.size() == 200);
  for (double l : lv.values) {
    CHECK(l >= 0.0);
    CHECK(l <= 1.0);
  }
  CHECK(lv.params_tag != 0);
  CHECK(lv.params_tag ==
        l_values(path.observations, H).params_tag);
}

TEST_CASE("state relabeling maps l to 1-l") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{2, 1});
  const Eigen::MatrixXd& q = H.Q.entries();
  Eigen::MatrixXd qs = q;  // rows and columns of Q swapped
  qs(0, 0) = q(1, 1);
  qs(0, 1) = q(1, 0);
  qs(1, 0) = q(0, 1);
  qs(1, 1) = q(0, 0);
  TransitionMatrix Qs(qs);
  HmmParams Hs(Qs, stationary_distribution(Qs),
               {H.emissions[1], H.emissions[0]});
  SampledPath path = simulate(H, 100, 5);
  LValueVector lv = l_values(path.observations, H);
  LValueVector lvs = l_values(path.observations, Hs);
  for (std::size_t i = 0; i < lv.size(); ++i)
    CHECK(lv[i] == doctest::Approx(1.0 - lvs[i]).epsilon(1e-12));
}

TEST_CASE("ergodic mean of l-values approaches pi_0") {
  HmmParams H = make_hmm(0.3, 0.2, Gaussian{0, 1}, Gaussian{2, 1});
  // pi = (0.4, 0.6)
  SampledPath path = simulate(H, 100000, 77);
  LValueVector lv = l_values(path.observations, H);
  double mean = 0.0;
  for (double l : lv.values) mean += l;
  mean /= double(lv.size());
  CHECK(std::abs(mean - H.pi[0]) < 0.01);
}

TEST_CASE("windowed value: zero half-width is the single-site posterior") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{2, 1});
  SampledPath path = simulate(H, 20, 2);
  const std::size_t i = 7;
  const double x = path.observations[i];
  const double n0 = H.pi[0] * H.emissions[0].density_at(x);
  const double n1 = H.pi[1] * H.emissions[1].density_at(x);
  CHECK(windowed_l_value(path.observations, H, i, 0) ==
        doctest::Approx(n0 / (n0 + n1)).epsilon(1e-12));
}

TEST_CASE("windowed value: full window equals the smoother") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{2, 1});
  SampledPath path = simulate(H, 21, 6);
  LValueVector lv = l_values(path.observations, H);
  CHECK(windowed_l_value(path.observations, H, 10, 10) ==
        doctest::Approx(lv[10]).epsilon(1e-12));
}

TEST_CASE("windowed value: index bounds enforced") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{2, 1});
  SampledPath path = simulate(H, 10, 3);
  CHECK_THROWS_AS(windowed_l_value(path.observations, H, 1, 3),
                  IndexOutOfWindow);
  CHECK_THROWS_AS(windowed_l_value(path.observations, H, 8, 3),
                  IndexOutOfWindow);
}

TEST_CASE("geometric forgetting of the window boundary") {
  Rng rng(41);
  for (int rep = 0; rep < 100; ++rep) {
    HmmParams H = random_hmm(rng);
    const double delta = H.Q.min_entry();
    const double rho = (1.0 - 2.0 * delta) / (1.0 - delta);
    SampledPath path = simulate(H, 41, 5000 + rep);
    LValueVector lv = l_values(path.observations, H);
    const std::size_t i = 20;
    for (std::size_t A : {5, 10, 15}) {
      const double lw = windowed_l_value(path.observations, H, i, A);
      CHECK(std::abs(lw - lv[i]) <= 4.0 * std::pow(rho, double(A)) + 1e-12);
    }
  }
}

TEST_CASE("filter step conventions") {
  HmmParams H = make_hmm(0.2, 0.3, Gaussian{0, 1}, Gaussian{0, 1});
  // identical emissions: r = 1, so the step is the pure Markov predictor
  FilterState st{0.6};
  const double a = (1.0 - 0.2) * 0.6 + 0.3 * 0.4;
  CHECK(filter_step(st, 0.5, H).phi == doctest::Approx(a).epsilon(1e-12));

  // f_0 = 0 < f_1: likelihood ratio infinite, posterior null mass dies
  HmmParams Hd = make_hmm(0.2, 0.3, UniformDist{0, 1}, UniformDist{1, 2});
  CHECK(filter_step(FilterState{0.5}, 1.5, Hd).phi == 0.0);
  // f_1 = 0 < f_0: all mass on the null
  CHECK(filter_step(FilterState{0.5}, 0.5, Hd).phi == 1.0);
}

TEST_CASE("two filter steps match direct enumeration") {
  Rng rng(29);
  for (int rep = 0; rep < 50; ++rep) {
    HmmParams H = random_hmm(rng);
    SampledPath path = simulate(H, 2, 800 + rep);
    const double x1 = path.observations[0], x2 = path.observations[1];
    // start from the stationary prior, absorb x1, step, absorb x2
    const double n0 = H.pi[0] * H.emissions[0].density_at(x1);
    const double n1 = H.pi[1] * H.emissions[1].density_at(x1);
    FilterState st{n0 / (n0 + n1)};
    const double phi2 = filter_step(st, x2, H).phi;

    // direct sum over both hidden states at both times
    double num = 0.0, den = 0.0;
    for (int t1 = 0; t1 < 2; ++t1)
      for (int t2 = 0; t2 < 2; ++t2) {
        const double w = H.pi[t1] * H.emissions[t1].density_at(x1) *
                         H.Q(t1, t2) * H.emissions[t2].density_at(x2);
        den += w;
        if (t2 == 0) num += w;
      }
    CHECK(phi2 == doctest::Approx(num / den).epsilon(1e-12));
  }
}

TEST_CASE("filter at the last position equals the smoother there") {
  Rng rng(53);
  for (int rep = 0; rep < 20; ++rep) {
    HmmParams H = random_hmm(rng);
    SampledPath path = simulate(H, 30, 600 + rep);
    LValueVector lv = l_values(path.observations, H);
    const double x0 = path.observations[0];
    const double n0 = H.pi[0] * H.emissions[0].density_at(x0);
    const double n1 = H.pi[1] * H.emissions[1].density_at(x0);
    FilterState st{n0 / (n0 + n1)};
    for (std::size_t n = 1; n < path.observations.size(); ++n)
      st = filter_step(st, path.observations[n], H);
    CHECK(std::abs(st.phi - lv[lv.size() - 1]) < 1e-10);
  }
}
