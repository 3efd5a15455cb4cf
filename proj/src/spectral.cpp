#include "hmmfdr/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hmmfdr/errors.hpp"

namespace hmmfdr {

using json = nlohmann::json;

FeatureSet FeatureSet::partition_indicators(int L0, double lo, double hi) {
  if (L0 < 1 || hi <= lo) throw Error("bad partition feature request");
  FeatureSet fs;
  fs.bound = 1.0;
  double width = (hi - lo) / L0;
  for (int l = 0; l < L0; ++l) {
    double a = lo + l * width;
    double b = lo + (l + 1) * width;
    bool last = (l == L0 - 1);
    fs.h.push_back([a, b, last](double x) {
      return (x >= a && (last ? x <= b : x < b)) ? 1.0 : 0.0;
    });
    fs.breaks.push_back(a);
  }
  fs.breaks.push_back(hi);
  return fs;
}

FeatureSet FeatureSet::constant_and_indicator(double a, double b) {
  FeatureSet fs;
  fs.bound = 1.0;
  fs.h.push_back([](double) { return 1.0; });
  fs.h.push_back([a, b](double x) { return (x >= a && x <= b) ? 1.0 : 0.0; });
  fs.breaks = {a, b};
  return fs;
}

FeatureSet FeatureSet::point_indicators(const std::vector<double>& support) {
  FeatureSet fs;
  fs.bound = 1.0;
  for (double v : support)
    fs.h.push_back([v](double x) { return x == v ? 1.0 : 0.0; });
  fs.breaks = support;
  return fs;
}

MomentMatrices::MomentMatrices(std::span<const double> X,
                               const FeatureSet& h) {
  if (X.size() < 3)
    throw TooFewObservations("need at least 3 observations to form a triple");
  const std::size_t T = X.size() - 2;
  const int L0 = h.size();

  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&X](std::size_t a, std::size_t b) { return X[a + 1] < X[b + 1]; });

  mid_.resize(T);
  h_first_.resize(L0, static_cast<Eigen::Index>(T));
  h_last_.resize(L0, static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t n = order[t];
    mid_[t] = X[n + 1];
    for (int l = 0; l < L0; ++l) {
      h_first_(l, static_cast<Eigen::Index>(t)) = h.h[l](X[n]);
      h_last_(l, static_cast<Eigen::Index>(t)) = h.h[l](X[n + 2]);
    }
  }
  P_ = (h_first_ * h_last_.transpose()) / static_cast<double>(T);
}

Eigen::MatrixXd MomentMatrices::M_hat(const Kernel& K, BandwidthLevel L,
                                      double x) const {
  const double hw = L.halfwidth();
  auto lo = std::lower_bound(mid_.begin(), mid_.end(), x - hw);
  auto hi = std::upper_bound(mid_.begin(), mid_.end(), x + hw);
  const auto i0 = static_cast<Eigen::Index>(lo - mid_.begin());
  const auto n = static_cast<Eigen::Index>(hi - lo);
  const int L0 = feature_count();
  if (n == 0) return Eigen::MatrixXd::Zero(L0, L0);
  Eigen::VectorXd w(n);
  for (Eigen::Index k = 0; k < n; ++k)
    w(k) = eval_KL(K, L, x, mid_[static_cast<std::size_t>(i0 + k)]);
  Eigen::MatrixXd M = h_first_.middleCols(i0, n) * w.asDiagonal() *
                      h_last_.middleCols(i0, n).transpose();
  return M / static_cast<double>(triple_count());
}

Eigen::MatrixXd MomentMatrices::M_hat_naive(const Kernel& K, BandwidthLevel L,
                                            double x) const {
  const int L0 = feature_count();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(L0, L0);
  for (std::size_t t = 0; t < mid_.size(); ++t) {
    double w = eval_KL(K, L, x, mid_[t]);
    if (w == 0.0) continue;
    M += w * h_first_.col(static_cast<Eigen::Index>(t)) *
         h_last_.col(static_cast<Eigen::Index>(t)).transpose();
  }
  return M / static_cast<double>(triple_count());
}

Eigen::MatrixXd empirical_P(std::span<const double> X, const FeatureSet& h) {
  return MomentMatrices(X, h).P_hat();
}

Eigen::MatrixXd empirical_M(const MomentMatrices& mm, const Kernel& K,
                            BandwidthLevel L, double x) {
  return mm.M_hat(K, L, x);
}

PopulationMoments population_moments(const HmmParams& H, const FeatureSet& h,
                                     const Kernel& K, BandwidthLevel L,
                                     double x) {
  const int J = H.states();
  const int L0 = h.size();
  PopulationMoments out;
  out.O.resize(L0, J);
  for (int j = 0; j < J; ++j) {
    auto [flo, fhi] = H.emissions[j].quadrature_support();
    for (int l = 0; l < L0; ++l) {
      auto integrand = [&](double y) {
        return h.h[l](y) * H.emissions[j].density_at(y);
      };
      out.O(l, j) =
          quad::integrate_split(integrand, flo, fhi, h.breaks, 1e-9);
    }
  }
  out.D = Eigen::MatrixXd::Zero(J, J);
  for (int j = 0; j < J; ++j) out.D(j, j) = smooth(K, L, H.emissions[j])(x);
  Eigen::MatrixXd dpi = H.pi.probs().asDiagonal();
  const Eigen::MatrixXd& Q = H.Q.entries();
  out.P = out.O * dpi * Q * Q * out.O.transpose();
  out.M = out.O * dpi * Q * out.D * Q * out.O.transpose();
  return out;
}

Eigen::MatrixXd project_svd(const Eigen::MatrixXd& P_hat, int J) {
  if (P_hat.cols() < J) throw Error("need L0 >= J for SVD projection");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(P_hat,
                                        Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  if (svd.singularValues()(J - 1) < 1e-10)
    throw RankDeficient("P_hat has rank below J");
  Eigen::MatrixXd V = svd.matrixV().leftCols(J);
  for (int j = 0; j < J; ++j) {
    Eigen::Index imax;
    V.col(j).cwiseAbs().maxCoeff(&imax);
    if (V(imax, j) < 0.0) V.col(j) = -V.col(j);
  }
  return V;
}

namespace {

Eigen::MatrixXd projected_b(const Eigen::MatrixXd& inv_vpv,
                            const Eigen::MatrixXd& V,
                            const Eigen::MatrixXd& M) {
  return inv_vpv * (V.transpose() * M * V);
}

Eigen::MatrixXd inverse_vpv(const Eigen::MatrixXd& V,
                            const Eigen::MatrixXd& P) {
  Eigen::MatrixXd A = V.transpose() * P * V;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0 || svd.singularValues().maxCoeff() / smin > 1e12)
    throw NearSingularProjection("V^T P V is near singular");
  return A.inverse();
}

}  // namespace

Eigen::MatrixXd b_matrix(const MomentMatrices& mm, const Eigen::MatrixXd& V,
                         const Kernel& K, BandwidthLevel L, double x) {
  return projected_b(inverse_vpv(V, mm.P_hat()), V, mm.M_hat(K, L, x));
}

double eigen_separation(const Eigen::MatrixXd& B) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) return 0.0;
  auto ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i).imag()) > 1e-8) return 0.0;
  double sep = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    for (Eigen::Index j = i + 1; j < ev.size(); ++j)
      sep = std::min(sep, std::abs(ev(i).real() - ev(j).real()));
  return std::isfinite(sep) ? sep : 0.0;
}

DiagonalizerSearchSpace DiagonalizerSearchSpace::dyadic_scalar(int depth,
                                                               double lo,
                                                               double hi) {
  DiagonalizerSearchSpace space;
  const int n = 1 << depth;
  for (int k = 0; k <= n; ++k) {
    Point p;
    p.a = Eigen::VectorXd::Ones(1);
    p.u = Eigen::VectorXd::Constant(1, lo + (hi - lo) * k / n);
    space.points.push_back(std::move(p));
  }
  return space;
}

DiagonalizerSearchSpace DiagonalizerSearchSpace::from_points(
    const std::vector<double>& us) {
  DiagonalizerSearchSpace space;
  for (double u : us) {
    Point p;
    p.a = Eigen::VectorXd::Ones(1);
    p.u = Eigen::VectorXd::Constant(1, u);
    space.points.push_back(std::move(p));
  }
  return space;
}

namespace {

// Unit-norm real eigenvectors ordered by ascending eigenvalue, with a
// deterministic sign convention. Throws NotDiagonalisable on materially
// complex spectra.
Eigen::MatrixXd real_eigenvectors_sorted(const Eigen::MatrixXd& B) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success)
    throw NotDiagonalisable("eigen decomposition failed");
  auto ev = es.eigenvalues();
  const int J = static_cast<int>(B.rows());
  for (int i = 0; i < J; ++i)
    if (std::abs(ev(i).imag()) > 1e-8)
      throw NotDiagonalisable("complex eigenvalues beyond tolerance");
  std::vector<int> order(J);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&ev](int a, int b) { return ev(a).real() < ev(b).real(); });
  Eigen::MatrixXd R(J, J);
  for (int j = 0; j < J; ++j) {
    Eigen::VectorXd col = es.eigenvectors().col(order[j]).real();
    col.normalize();
    Eigen::Index imax;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0.0) col = -col;
    R.col(j) = col;
  }
  return R;
}

}  // namespace

DiagonalizerChoice select_diagonalizer(const MomentMatrices& mm,
                                       const Eigen::MatrixXd& V,
                                       const Kernel& K, BandwidthLevel L,
                                       const DiagonalizerSearchSpace& space,
                                       int J) {
  if (space.points.empty()) throw Error("empty diagonalizer search space");
  Eigen::MatrixXd inv_vpv = inverse_vpv(V, mm.P_hat());

  double best_sep = -1.0;
  std::size_t best_idx = 0;
  Eigen::MatrixXd best_B;
  for (std::size_t i = 0; i < space.points.size(); ++i) {
    const auto& pt = space.points[i];
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(J, J);
    for (Eigen::Index k = 0; k < pt.u.size(); ++k)
      B += pt.a(k) * projected_b(inv_vpv, V, mm.M_hat(K, L, pt.u(k)));
    double sep = eigen_separation(B);
    if (sep > best_sep) {  // strict: ties keep the first enumeration index
      best_sep = sep;
      best_idx = i;
      best_B = B;
    }
  }
  if (best_sep < 1e-10)
    throw NotDiagonalisable("no search point achieves eigen-separation");

  DiagonalizerChoice out;
  out.a = space.points[best_idx].a;
  out.u = space.points[best_idx].u;
  out.sep_achieved = best_sep;
  out.R = real_eigenvectors_sorted(best_B);
  return out;
}

SpectralFit estimate_emissions(std::span<const double> X, double s,
                               const FeatureSet& h,
                               const DiagonalizerSearchSpace& space,
                               double alpha, const EvalGrid& grid, int J,
                               double bandwidth_multiplier) {
  const std::size_t N = X.size();
  if (N < 100)
    throw TooFewObservations("estimate_emissions requires N >= 100");

  double ratio = static_cast<double>(N) / std::log(static_cast<double>(N));
  double target =
      bandwidth_multiplier * std::pow(ratio, 1.0 / (1.0 + 2.0 * s));
  BandwidthLevel level{
      static_cast<int>(std::max(0L, std::lround(std::log2(target))))};

  Kernel K = build_kernel(s);
  MomentMatrices mm(X, h);
  Eigen::MatrixXd V = project_svd(mm.P_hat(), J);
  Eigen::MatrixXd inv_vpv = inverse_vpv(V, mm.P_hat());
  DiagonalizerChoice choice = select_diagonalizer(mm, V, K, level, space, J);

  const double cap = std::pow(static_cast<double>(N), alpha);
  Eigen::PartialPivLU<Eigen::MatrixXd> Rlu(choice.R);

  std::vector<std::vector<double>> values(J,
                                          std::vector<double>(grid.nodes));
  for (int i = 0; i < grid.nodes; ++i) {
    double x = grid.node(i);
    Eigen::MatrixXd B = projected_b(inv_vpv, V, mm.M_hat(K, level, x));
    Eigen::MatrixXd diag = Rlu.solve(B * choice.R);
    for (int j = 0; j < J; ++j) values[j][i] = diag(j, j);
  }

  SpectralFit fit;
  fit.V_hat = std::move(V);
  fit.R_hat = choice.R;
  fit.level = level;
  fit.alpha = alpha;
  fit.sep_achieved = choice.sep_achieved;
  fit.a_hat = choice.a;
  fit.u_hat = choice.u;
  for (int j = 0; j < J; ++j)
    fit.densities.emplace_back(
        GridDensity(grid.lo, grid.step(), std::move(values[j]), cap));
  return fit;
}

std::vector<DiscretePmf> estimate_emissions_discrete(std::span<const double> X,
                                                     int J) {
  if (X.size() < 3)
    throw TooFewObservations("need at least 3 observations");
  std::vector<int> xs(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    double r = std::round(X[i]);
    if (std::abs(X[i] - r) > 1e-9)
      throw Error("discrete estimator requires integral observations");
    xs[i] = static_cast<int>(r);
  }
  std::vector<int> support(xs);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  const int L0 = static_cast<int>(support.size());
  if (L0 < J) throw RankDeficient("observed support smaller than state count");
  std::map<int, int> index;
  for (int l = 0; l < L0; ++l) index[support[l]] = l;

  const std::size_t T = xs.size() - 2;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(L0, L0);
  std::vector<Eigen::MatrixXd> M(static_cast<std::size_t>(L0),
                                 Eigen::MatrixXd::Zero(L0, L0));
  for (std::size_t n = 0; n < T; ++n) {
    int l = index[xs[n]], x = index[xs[n + 1]], m = index[xs[n + 2]];
    P(l, m) += 1.0;
    M[static_cast<std::size_t>(x)](l, m) += 1.0;
  }
  P /= static_cast<double>(T);
  for (auto& Mx : M) Mx /= static_cast<double>(T);

  Eigen::MatrixXd V = project_svd(P, J);
  Eigen::MatrixXd A = V.transpose() * P * V;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0 || svd.singularValues().maxCoeff() / smin > 1e12)
    throw NearSingularProjection("V^T P V is near singular");
  Eigen::MatrixXd inv_vpv = A.inverse();

  std::vector<Eigen::MatrixXd> B(M.size());
  double best_sep = -1.0;
  std::size_t best = 0;
  for (std::size_t x = 0; x < M.size(); ++x) {
    B[x] = projected_b(inv_vpv, V, M[x]);
    double sep = eigen_separation(B[x]);
    if (sep > best_sep) {
      best_sep = sep;
      best = x;
    }
  }
  if (best_sep < 1e-10)
    throw NotDiagonalisable("no support point achieves eigen-separation");
  Eigen::MatrixXd R = real_eigenvectors_sorted(B[best]);
  Eigen::PartialPivLU<Eigen::MatrixXd> Rlu(R);

  std::vector<std::vector<double>> raw(static_cast<std::size_t>(J),
                                       std::vector<double>(L0, 0.0));
  for (int x = 0; x < L0; ++x) {
    Eigen::MatrixXd diag = Rlu.solve(B[static_cast<std::size_t>(x)] * R);
    for (int j = 0; j < J; ++j)
      raw[static_cast<std::size_t>(j)][static_cast<std::size_t>(x)] =
          diag(j, j);
  }

  std::vector<DiscretePmf> out;
  for (int j = 0; j < J; ++j) {
    DiscretePmf pmf;
    double total = 0.0;
    for (int l = 0; l < L0; ++l) {
      double v = std::max(0.0, raw[j][l]);
      pmf.probs[support[l]] = v;
      total += v;
    }
    if (total <= 0.0)
      throw NotDiagonalisable("estimated pmf is identically zero");
    for (auto& [k, v] : pmf.probs) v /= total;
    out.push_back(std::move(pmf));
  }
  return out;
}

std::string to_json(const SpectralFit& fit) {
  json j;
  j["level"] = fit.level.L;
  j["alpha"] = fit.alpha;
  j["sep_achieved"] = fit.sep_achieved;
  j["a_hat"] = std::vector<double>(fit.a_hat.begin(), fit.a_hat.end());
  j["u_hat"] = std::vector<double>(fit.u_hat.begin(), fit.u_hat.end());
  j["densities"] = json::array();
  for (const auto& g : fit.densities) {
    j["densities"].push_back({{"lo", g.lo},
                              {"step", g.step},
                              {"values", g.values},
                              {"cap", g.cap}});
  }
  return j.dump(2);
}

}  // namespace hmmfdr
