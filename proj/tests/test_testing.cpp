#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hmmfdr/testing.hpp"
#include "test_util.hpp"

using namespace hmmfdr;

namespace {

LValueVector lvec(std::vector<double> vals) {
  LValueVector lv;
  lv.values = std::move(vals);
  return lv;
}

// Brute-force K_hat: check both defining inequalities for every K.
std::size_t brute_k_hat(std::vector<double> sorted, double t) {
  std::sort(sorted.begin(), sorted.end());
  const std::size_t N = sorted.size();
  std::vector<double> prefix(N + 1, 0.0);
  for (std::size_t i = 0; i < N; ++i) prefix[i + 1] = prefix[i] + sorted[i];
  for (std::size_t K = N + 1; K-- > 0;) {
    const bool left = K == 0 || prefix[K] / double(K) <= t;
    const bool right = K == N || prefix[K + 1] / double(K + 1) > t;
    if (left && right) return K;
  }
  return 0;  // unreachable: some K always satisfies both
}

std::vector<double> random_lvalues(Rng& rng) {
  const std::size_t n = 1 + rng.next_u64() % 40;
  std::vector<double> v(n);
  for (double& x : v) {
    const auto kind = rng.next_u64() % 4;
    if (kind == 0)
      x = 0.0;
    else if (kind == 1)
      x = 1.0;
    else if (kind == 2)
      x = std::round(rng.uniform() * 4.0) / 4.0;  // forced ties
    else
      x = rng.uniform();
  }
  return v;
}

}  // namespace

TEST_CASE("threshold procedure is strict") {
  LValueVector lv = lvec({0.1, 0.5, 0.5});
  auto none = threshold_procedure(lv, Threshold::finite(0.0));
  CHECK(none == std::vector<std::uint8_t>{0, 0, 0});
  auto all = threshold_procedure(lv, Threshold::infinite());
  CHECK(all == std::vector<std::uint8_t>{1, 1, 1});
  auto strict = threshold_procedure(lv, Threshold::finite(0.5));
  CHECK(strict == std::vector<std::uint8_t>{1, 0, 0});
}

TEST_CASE("post fdr") {
  CHECK(post_fdr(lvec({0.3, 0.4}), std::vector<std::uint8_t>{0, 0}) == 0.0);
  CHECK(post_fdr(lvec({0.1, 0.2}), std::vector<std::uint8_t>{1, 1}) ==
        doctest::Approx(0.15));
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v = random_lvalues(rng);
    std::vector<std::uint8_t> phi(v.size());
    for (auto& p : phi) p = rng.next_u64() % 2;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      num += v[i] * phi[i];
      den += phi[i];
    }
    const double oracle = num / std::max(1.0, den);
    CHECK(std::abs(post_fdr(lvec(v), phi) - oracle) < 1e-15);
  }
}

TEST_CASE("k hat selection: spec vectors") {
  auto all_zero = select_k_hat(lvec({0, 0, 0}), 0.05);
  CHECK(all_zero.K_hat == 3);
  CHECK(all_zero.lambda_hat.is_infinite);

  auto none = select_k_hat(lvec({0.5, 0.6}), 0.05);
  CHECK(none.K_hat == 0);
  CHECK(none.lambda_hat.value == doctest::Approx(0.5));
  CHECK(!none.lambda_hat.is_infinite);

  auto mid = select_k_hat(lvec({0.01, 0.08, 0.2}), 0.05);
  CHECK(mid.K_hat == 2);
  CHECK(mid.lambda_hat.value == doctest::Approx(0.2));
}

TEST_CASE("k hat selection: brute force on random vectors") {
  Rng rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> v = random_lvalues(rng);
    const double t = rng.uniform(0.01, 0.99);
    CHECK(select_k_hat(lvec(v), t).K_hat == brute_k_hat(v, t));
  }
}

TEST_CASE("dichotomy: postFDR <= t iff lambda <= lambda hat") {
  Rng rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v = random_lvalues(rng);
    const double t = rng.uniform(0.01, 0.99);
    LValueVector lv = lvec(v);
    const KHatResult kh = select_k_hat(lv, t);
    for (int g = 0; g <= 100; ++g) {
      const double lambda = 1.2 * g / 100.0;
      const double pf = post_fdr(lv, threshold_procedure(
                                         lv, Threshold::finite(lambda)));
      const bool below =
          kh.lambda_hat.is_infinite || lambda <= kh.lambda_hat.value;
      CHECK((pf <= t) == below);
    }
  }
}

TEST_CASE("k hat is monotone in the level") {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v = random_lvalues(rng);
    std::size_t prev = 0;
    for (double t : {0.05, 0.1, 0.2, 0.4, 0.8}) {
      const std::size_t k = select_k_hat(lvec(v), t).K_hat;
      CHECK(k >= prev);
      prev = k;
    }
  }
}

TEST_CASE("procedure: tie handling rejects lowest indices") {
  TestingOutcome out = procedure_hat(lvec({0.2, 0.0, 0.2}), 0.1);
  CHECK(out.K_hat == 2);
  CHECK(out.rejections == std::vector<std::uint8_t>{1, 1, 0});
  CHECK(out.post_fdr <= 0.1);
}

TEST_CASE("procedure: nothing passes at a low level") {
  TestingOutcome out = procedure_hat(lvec({1, 1, 1, 1}), 0.5);
  CHECK(out.K_hat == 0);
  CHECK(out.rejections == std::vector<std::uint8_t>{0, 0, 0, 0});
}

TEST_CASE("procedure invariants on random vectors") {
  Rng rng(37);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<double> v = random_lvalues(rng);
    const double t = rng.uniform(0.01, 0.99);
    LValueVector lv = lvec(v);
    TestingOutcome out = procedure_hat(lv, t);
    std::size_t count = 0;
    for (auto r : out.rejections) count += r;
    CHECK(count == out.K_hat);
    CHECK(out.post_fdr <= t + 1e-15);
    // strictly-below set included, nothing above lambda hat rejected
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!out.lambda_hat.is_infinite) {
        if (v[i] < out.lambda_hat.value) CHECK(out.rejections[i] == 1);
        if (v[i] > out.lambda_hat.value) CHECK(out.rejections[i] == 0);
      }
    }
  }
}

TEST_CASE("procedure is permutation-equivariant on distinct values") {
  LValueVector lv = lvec({0.05, 0.9, 0.01, 0.4, 0.15});
  TestingOutcome out = procedure_hat(lv, 0.1);
  std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  std::vector<double> shuffled(lv.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    shuffled[i] = lv[perm[i]];
  TestingOutcome out2 = procedure_hat(lvec(shuffled), 0.1);
  for (std::size_t i = 0; i < perm.size(); ++i)
    CHECK(out2.rejections[i] == out.rejections[perm[i]]);
}

TEST_CASE("error report") {
  std::vector<int> theta{0, 1, 0};
  std::vector<std::uint8_t> phi{1, 1, 0};
  ErrorReport r = error_report(theta, phi);
  CHECK(r.fdp == doctest::Approx(0.5));
  CHECK(r.tdp == doctest::Approx(1.0));
  CHECK(r.n_rejected == 2);
  CHECK(r.n_signals == 1);
  CHECK(r.n_false == 1);

  std::vector<std::uint8_t> none{0, 0, 0};
  ErrorReport r0 = error_report(theta, none);
  CHECK(r0.fdp == 0.0);
  CHECK(r0.tdp == 0.0);

  Rng rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng.next_u64() % 30;
    std::vector<int> th(n);
    std::vector<std::uint8_t> ph(n);
    for (std::size_t i = 0; i < n; ++i) {
      th[i] = int(rng.next_u64() % 2);
      ph[i] = std::uint8_t(rng.next_u64() % 2);
    }
    std::size_t rej = 0, sig = 0, fa = 0, tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      rej += ph[i];
      sig += th[i];
      if (ph[i] && th[i] == 0) ++fa;
      if (ph[i] && th[i] == 1) ++tp;
    }
    ErrorReport rr = error_report(th, ph);
    CHECK(rr.fdp == double(fa) / std::max<std::size_t>(1, rej));
    CHECK(rr.tdp == double(tp) / std::max<std::size_t>(1, sig));
  }
}

TEST_CASE("marginal rates") {
  using Rep = std::pair<std::vector<int>, std::vector<std::uint8_t>>;
  std::vector<Rep> one{{{0, 1}, {0, 1}}};
  auto [mfdr1, mtdr1] = marginal_rates(one);
  CHECK(mfdr1 == 0.0);
  CHECK(mtdr1 == 1.0);

  std::vector<Rep> silent{{{0, 1}, {0, 0}}, {{1, 1}, {0, 0}}};
  auto [mfdr0, mtdr0] = marginal_rates(silent);
  CHECK(mfdr0 == 0.0);
  CHECK(mtdr0 == 0.0);

  // hand-computed ratio of sums: falses 1+0=1, rejections 2+1=3,
  // true discoveries 1+1=2, signals 1+2=3
  std::vector<Rep> mixed{{{0, 1}, {1, 1}}, {{1, 1, 0}, {1, 0, 0}}};
  auto [mfdr, mtdr] = marginal_rates(mixed);
  CHECK(mfdr == doctest::Approx(1.0 / 3.0));
  CHECK(mtdr == doctest::Approx(2.0 / 3.0));
}
