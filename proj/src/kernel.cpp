#include "hmmfdr/kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "hmmfdr/errors.hpp"

namespace hmmfdr {

namespace quad {
namespace {

struct GlRule {
  std::array<double, 20> nodes{};
  std::array<double, 20> weights{};
};

// 20-point Gauss-Legendre rule on [-1,1], nodes found by Newton iteration
// on the Legendre recurrence.
GlRule make_rule() {
  GlRule rule;
  const int n = 20;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

const GlRule& rule() {
  static const GlRule r = make_rule();
  return r;
}

double gl20(const std::function<double(double)>& f, double a, double b) {
  const GlRule& r = rule();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double total = 0.0;
  for (int i = 0; i < 20; ++i)
    total += r.weights[i] * f(mid + half * r.nodes[i]);
  return total * half;
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double whole, double tol, int depth) {
  double mid = 0.5 * (a + b);
  double left = gl20(f, a, mid);
  double right = gl20(f, mid, b);
  if (std::abs(left + right - whole) <= tol) return left + right;
  if (depth >= 40)
    throw QuadratureFailure("quadrature tolerance not reached");
  return adaptive(f, a, mid, left, 0.5 * tol, depth + 1) +
         adaptive(f, mid, b, right, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
  if (a >= b) return 0.0;
  return adaptive(f, a, b, gl20(f, a, b), abs_tol, 0);
}

double integrate_split(const std::function<double(double)>& f, double a,
                       double b, const std::vector<double>& breaks,
                       double abs_tol) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  double tol_each = abs_tol / static_cast<double>(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += integrate(f, pts[i], pts[i + 1], tol_each);
  return total;
}

}  // namespace quad

double Kernel::operator()(double u) const {
  // Inclusive boundary: the (1-u^2)^2 factor vanishes at +-1 analytically,
  // but the expanded monomial form only reaches ~1e-16 there.
  if (u <= -1.0 || u >= 1.0) return 0.0;
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = acc * u + *it;
  return acc;
}

Kernel build_kernel(double s) {
  if (s <= 0.0) throw Error("kernel smoothness must be > 0");
  const int ell = static_cast<int>(std::ceil(s)) - 1;
  // Even polynomial ansatz: odd moments vanish by symmetry, so only the even
  // moments 0, 2, ..., up to ell are constrained.
  const int m = ell / 2 + 1;

  // I(p) = int_{-1}^{1} u^p (1-u^2)^2 du, p even.
  auto bump_moment = [](int p) {
    return 2.0 * (1.0 / (p + 1) - 2.0 / (p + 3) + 1.0 / (p + 5));
  };

  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(0) = 1.0;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) A(k, j) = bump_moment(2 * k + 2 * j);
  Eigen::VectorXd c = A.fullPivLu().solve(b);

  // Expand c_j u^{2j} (1 - 2u^2 + u^4) into monomial coefficients.
  std::vector<double> coeffs(2 * (m - 1) + 5, 0.0);
  for (int j = 0; j < m; ++j) {
    coeffs[2 * j] += c(j);
    coeffs[2 * j + 2] += -2.0 * c(j);
    coeffs[2 * j + 4] += c(j);
  }

  Kernel K;
  K.coeffs_ = std::move(coeffs);
  K.order_ = ell;

  // Derivative max on a fine grid gives the Lipschitz constant; the kernel
  // is C^1 across the support boundary since K and K' vanish at +-1.
  double lip = 0.0, sup = 0.0;
  const int n_grid = 4096;
  for (int i = 0; i <= n_grid; ++i) {
    double u = -1.0 + 2.0 * i / n_grid;
    sup = std::max(sup, std::abs(K(u)));
    double d = 0.0;
    for (std::size_t p = K.coeffs_.size() - 1; p >= 1; --p)
      d = d * u + static_cast<double>(p) * K.coeffs_[p];
    lip = std::max(lip, std::abs(d));
  }
  K.lipschitz_bound_ = lip * 1.0001;
  K.sup_bound_ = sup * 1.0001;
  return K;
}

BandwidthLevel choose_level(std::size_t N, double s) {
  if (N < 3) throw Error("choose_level requires N >= 3");
  double ratio = static_cast<double>(N) / std::log(static_cast<double>(N));
  double log2_scale = std::log2(std::pow(ratio, 1.0 / (1.0 + 2.0 * s)));
  long L = std::lround(log2_scale);
  return BandwidthLevel{static_cast<int>(std::max(0L, L))};
}

double eval_KL(const Kernel& K, BandwidthLevel L, double x, double y) {
  double scale = L.scale();
  return scale * K(scale * (x - y));
}

std::function<double(double)> smooth(const Kernel& K, BandwidthLevel L,
                                     const EmissionModel& f) {
  if (f.is_discrete())
    throw Error("smooth requires a continuous emission model");
  auto [flo, fhi] = f.quadrature_support();
  return [K, L, f, flo = flo, fhi = fhi](double x) {
    double h = L.halfwidth();
    double a = std::max(x - h, flo);
    double b = std::min(x + h, fhi);
    if (a >= b) return 0.0;
    auto integrand = [&](double y) {
      return eval_KL(K, L, x, y) * f.density_at(y);
    };
    // Split at interior support edges of f (kinks of Uniform/Beta etc).
    return quad::integrate_split(integrand, a, b, {flo, fhi}, 1e-8);
  };
}

}  // namespace hmmfdr
