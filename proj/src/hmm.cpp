#include "hmmfdr/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hmmfdr {

using json = nlohmann::json;

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 2)
    throw Error("transition matrix must be square with J >= 2");
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    double row_sum = entries_.row(i).sum();
    if (std::abs(row_sum - 1.0) > 1e-12)
      throw Error("transition matrix row " + std::to_string(i) +
                  " does not sum to 1");
    if (entries_.row(i).minCoeff() < 0.0)
      throw Error("transition matrix has negative entries");
  }
}

bool TransitionMatrix::is_full_rank(double tol) const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(entries_);
  return svd.singularValues().minCoeff() > tol;
}

StationaryDist::StationaryDist(Eigen::VectorXd probs)
    : probs_(std::move(probs)) {
  if (probs_.minCoeff() < 0.0) throw Error("stationary dist has negative entry");
  if (std::abs(probs_.sum() - 1.0) > 1e-12)
    throw Error("stationary dist does not sum to 1");
}

GridDensity::GridDensity(double lo_, double step_, std::vector<double> vals,
                         double cap_)
    : lo(lo_), step(step_), values(std::move(vals)), cap(cap_) {
  if (step <= 0.0 || values.size() < 2) throw Error("bad grid density");
  for (double& v : values) v = std::clamp(v, -cap, cap);
}

EmissionModel::EmissionModel(BetaDist b) : v_(b) {
  if (b.alpha <= 0.0 || b.beta <= 0.0) throw Error("beta params must be > 0");
}

EmissionModel::EmissionModel(UniformDist u) : v_(u) {
  if (u.hi <= u.lo) throw Error("uniform requires lo < hi");
}

EmissionModel::EmissionModel(DiscretePmf p) : v_(std::move(p)) {
  double total = 0.0;
  for (auto& [k, v] : std::get<DiscretePmf>(v_).probs) {
    if (v < 0.0) throw Error("pmf has negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("pmf does not sum to 1");
}

namespace {

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

struct DensityVisitor {
  double x;
  double operator()(const Gaussian& g) const {
    double z = (x - g.mean) / g.sd;
    return std::exp(-0.5 * z * z) /
           (g.sd * std::sqrt(2.0 * std::numbers::pi));
  }
  double operator()(const Cauchy& c) const {
    double z = (x - c.location) / c.scale;
    return 1.0 / (std::numbers::pi * c.scale * (1.0 + z * z));
  }
  double operator()(const BetaDist& b) const {
    if (x <= 0.0 || x >= 1.0) {
      // Endpoint conventions: density 0 outside the open interval unless the
      // exponent makes the endpoint finite.
      if (x == 0.0 && b.alpha == 1.0)
        return std::exp(-log_beta_fn(b.alpha, b.beta));
      if (x == 1.0 && b.beta == 1.0)
        return std::exp(-log_beta_fn(b.alpha, b.beta));
      return 0.0;
    }
    return std::exp((b.alpha - 1.0) * std::log(x) +
                    (b.beta - 1.0) * std::log1p(-x) -
                    log_beta_fn(b.alpha, b.beta));
  }
  double operator()(const UniformDist& u) const {
    return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0;
  }
  double operator()(const DiscretePmf& p) const {
    double k = std::round(x);
    auto it = p.probs.find(static_cast<int>(k));
    return it == p.probs.end() ? 0.0 : it->second;
  }
  double operator()(const GridDensity& g) const {
    if (x < g.lo || x > g.hi()) return 0.0;
    double pos = (x - g.lo) / g.step;
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= g.values.size()) return g.values.back();
    double frac = pos - static_cast<double>(i);
    return g.values[i] * (1.0 - frac) + g.values[i + 1] * frac;
  }
};

struct SampleVisitor {
  Rng& rng;
  double operator()(const Gaussian& g) const {
    return g.mean + g.sd * rng.normal();
  }
  double operator()(const Cauchy& c) const {
    return rng.cauchy(c.location, c.scale);
  }
  double operator()(const BetaDist& b) const {
    return rng.beta(b.alpha, b.beta);
  }
  double operator()(const UniformDist& u) const {
    return rng.uniform(u.lo, u.hi);
  }
  double operator()(const DiscretePmf& p) const {
    double u = rng.uniform();
    double acc = 0.0;
    for (auto& [k, v] : p.probs) {
      acc += v;
      if (u < acc) return static_cast<double>(k);
    }
    return static_cast<double>(p.probs.rbegin()->first);
  }
  double operator()(const GridDensity&) const {
    throw Error("GridDensity is not sampleable");
  }
};

}  // namespace

double EmissionModel::density_at(double x) const {
  return std::visit(DensityVisitor{x}, v_);
}

double EmissionModel::sample(Rng& rng) const {
  return std::visit(SampleVisitor{rng}, v_);
}

std::pair<double, double> EmissionModel::quadrature_support() const {
  struct V {
    std::pair<double, double> operator()(const Gaussian& g) const {
      return {g.mean - 12.0 * g.sd, g.mean + 12.0 * g.sd};
    }
    std::pair<double, double> operator()(const Cauchy& c) const {
      return {c.location - 1e7 * c.scale, c.location + 1e7 * c.scale};
    }
    std::pair<double, double> operator()(const BetaDist&) const {
      return {0.0, 1.0};
    }
    std::pair<double, double> operator()(const UniformDist& u) const {
      return {u.lo, u.hi};
    }
    std::pair<double, double> operator()(const DiscretePmf& p) const {
      return {static_cast<double>(p.probs.begin()->first),
              static_cast<double>(p.probs.rbegin()->first)};
    }
    std::pair<double, double> operator()(const GridDensity& g) const {
      return {g.lo, g.hi()};
    }
  };
  return std::visit(V{}, v_);
}

HmmParams::HmmParams(TransitionMatrix q, StationaryDist p,
                     std::vector<EmissionModel> em, Measure m)
    : Q(std::move(q)), pi(std::move(p)), emissions(std::move(em)), measure(m) {
  if (pi.size() != Q.states())
    throw Error("stationary dist size does not match state count");
  if (static_cast<int>(emissions.size()) != Q.states())
    throw Error("emission count does not match state count");
  Eigen::RowVectorXd check = pi.probs().transpose() * Q.entries();
  if ((check.transpose() - pi.probs()).lpNorm<Eigen::Infinity>() > 1e-10)
    throw Error("pi is not stationary for Q");
  for (const auto& f : emissions) {
    bool discrete = f.is_discrete();
    if (discrete != (measure == Measure::DiscreteInteger))
      throw Error("emission measure does not match declared measure");
  }
}

StationaryDist stationary_distribution(const TransitionMatrix& Q) {
  const int J = Q.states();
  // (Q^T - I) pi = 0 with a normalization row appended.
  Eigen::MatrixXd A(J + 1, J);
  A.topRows(J) = Q.entries().transpose() - Eigen::MatrixXd::Identity(J, J);
  A.bottomRows(1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(J + 1);
  b(J) = 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  if (svd.singularValues().minCoeff() < 1e-10)
    throw NonIrreducible("chain appears reducible: singular stationary system");
  Eigen::VectorXd pi = svd.solve(b);
  // Clean tiny negative round-off.
  for (int j = 0; j < J; ++j) pi(j) = std::max(pi(j), 0.0);
  pi /= pi.sum();
  Eigen::RowVectorXd check = pi.transpose() * Q.entries();
  if ((check.transpose() - pi).lpNorm<Eigen::Infinity>() > 1e-10)
    throw NonIrreducible("stationary system inconsistent");
  return StationaryDist(pi);
}

double marginal_density(const HmmParams& H, double x) {
  double total = 0.0;
  for (int j = 0; j < H.states(); ++j)
    total += H.pi[j] * H.emissions[j].density_at(x);
  return total;
}

SampledPath simulate(const HmmParams& H, std::size_t N, std::uint64_t seed) {
  if (N < 1) throw Error("simulate requires N >= 1");
  Rng rng(Rng::mix(seed));
  SampledPath path;
  path.seed = seed;
  path.states.resize(N);
  path.observations.resize(N);
  const int J = H.states();
  std::vector<double> w(J);
  for (int j = 0; j < J; ++j) w[j] = H.pi[j];
  int state = rng.categorical(w);
  for (std::size_t n = 0; n < N; ++n) {
    if (n > 0) {
      for (int j = 0; j < J; ++j) w[j] = H.Q(state, j);
      state = rng.categorical(w);
    }
    path.states[n] = state;
    path.observations[n] = H.emissions[state].sample(rng);
  }
  return path;
}

namespace {

json emission_to_json(const EmissionModel& f) {
  struct V {
    json operator()(const Gaussian& g) const {
      return {{"kind", "gaussian"}, {"mean", g.mean}, {"sd", g.sd}};
    }
    json operator()(const Cauchy& c) const {
      return {{"kind", "cauchy"},
              {"location", c.location},
              {"scale", c.scale}};
    }
    json operator()(const BetaDist& b) const {
      return {{"kind", "beta"}, {"alpha", b.alpha}, {"beta", b.beta}};
    }
    json operator()(const UniformDist& u) const {
      return {{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}};
    }
    json operator()(const DiscretePmf& p) const {
      json probs = json::object();
      for (auto& [k, v] : p.probs) probs[std::to_string(k)] = v;
      return {{"kind", "discrete_pmf"}, {"probs", probs}};
    }
    json operator()(const GridDensity& g) const {
      return {{"kind", "grid"},
              {"lo", g.lo},
              {"step", g.step},
              {"values", g.values},
              {"cap", g.cap}};
    }
  };
  return std::visit(V{}, f.variant());
}

EmissionModel emission_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "gaussian")
    return EmissionModel(Gaussian{j.at("mean"), j.at("sd")});
  if (kind == "cauchy")
    return EmissionModel(Cauchy{j.at("location"), j.at("scale")});
  if (kind == "beta")
    return EmissionModel(BetaDist{j.at("alpha"), j.at("beta")});
  if (kind == "uniform")
    return EmissionModel(UniformDist{j.at("lo"), j.at("hi")});
  if (kind == "discrete_pmf") {
    DiscretePmf p;
    for (auto& [k, v] : j.at("probs").items())
      p.probs[std::stoi(k)] = v.get<double>();
    return EmissionModel(std::move(p));
  }
  if (kind == "grid") {
    return EmissionModel(GridDensity(j.at("lo"), j.at("step"),
                                     j.at("values").get<std::vector<double>>(),
                                     j.at("cap")));
  }
  throw Error("unknown emission kind: " + kind);
}

}  // namespace

std::string to_json(const HmmParams& H) {
  json j;
  j["Q"] = json::array();
  for (int i = 0; i < H.states(); ++i) {
    json row = json::array();
    for (int k = 0; k < H.states(); ++k) row.push_back(H.Q(i, k));
    j["Q"].push_back(row);
  }
  j["pi"] = json::array();
  for (int i = 0; i < H.states(); ++i) j["pi"].push_back(H.pi[i]);
  j["emissions"] = json::array();
  for (const auto& f : H.emissions) j["emissions"].push_back(emission_to_json(f));
  j["measure"] =
      H.measure == Measure::Continuous ? "continuous" : "discrete";
  return j.dump(2);
}

HmmParams params_from_json(const std::string& text) {
  json j = json::parse(text);
  const auto& q = j.at("Q");
  const int J = static_cast<int>(q.size());
  Eigen::MatrixXd Q(J, J);
  for (int i = 0; i < J; ++i)
    for (int k = 0; k < J; ++k) Q(i, k) = q.at(i).at(k).get<double>();
  Eigen::VectorXd pi(J);
  for (int i = 0; i < J; ++i) pi(i) = j.at("pi").at(i).get<double>();
  std::vector<EmissionModel> emissions;
  for (const auto& e : j.at("emissions"))
    emissions.push_back(emission_from_json(e));
  Measure m = j.at("measure").get<std::string>() == "discrete"
                  ? Measure::DiscreteInteger
                  : Measure::Continuous;
  return HmmParams(TransitionMatrix(Q), StationaryDist(pi),
                   std::move(emissions), m);
}

}  // namespace hmmfdr
