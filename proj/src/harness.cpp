#include "hmmfdr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hmmfdr/smoothing.hpp"

namespace hmmfdr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sup_diff_on_grid(const EvalGrid& grid,
                        const std::function<double(double)>& f,
                        const std::function<double(double)>& g) {
  double worst = 0.0;
  for (int i = 0; i < grid.nodes; ++i) {
    const double x = grid.node(i);
    worst = std::max(worst, std::abs(f(x) - g(x)));
  }
  return worst;
}

std::function<double(double)> density_fn(const EmissionModel& em) {
  return [&em](double x) { return em.density_at(x); };
}

// Builds the estimated HMM with labels aligned so slot tau^{-1}(0) becomes
// state 0.
HmmParams assemble_aligned(const RecoveredParams& rec,
                           const std::vector<EmissionModel>& slot_emissions,
                           const std::array<int, 2>& tau, Measure measure) {
  std::array<int, 2> slot_of{};  // label -> estimator slot
  for (int j = 0; j < 2; ++j) slot_of[tau[j]] = j;

  Eigen::MatrixXd q(2, 2);
  Eigen::VectorXd p(2);
  for (int a = 0; a < 2; ++a) {
    p(a) = rec.pi_hat[slot_of[a]];
    for (int b = 0; b < 2; ++b)
      q(a, b) = rec.Q_hat(slot_of[a], slot_of[b]);
  }
  std::vector<EmissionModel> ems{slot_emissions[slot_of[0]],
                                 slot_emissions[slot_of[1]]};
  return HmmParams(TransitionMatrix(q), StationaryDist(p), std::move(ems),
                   measure);
}

struct EstimationMetrics {
  double sup_err0 = kNaN, sup_err1 = kNaN, rho = kNaN;
  double q_err = kNaN, pi_err = kNaN;
};

EstimationMetrics estimation_metrics(const ExperimentConfig& cfg,
                                     const HmmParams& H_hat,
                                     const EvalGrid& grid) {
  EstimationMetrics m;
  const auto f0 = density_fn(cfg.params.emissions[0]);
  const auto f1 = density_fn(cfg.params.emissions[1]);
  const auto g0 = density_fn(H_hat.emissions[0]);
  const auto g1 = density_fn(H_hat.emissions[1]);
  const double e00 = sup_diff_on_grid(grid, f0, g0);
  const double e11 = sup_diff_on_grid(grid, f1, g1);
  const double e01 = sup_diff_on_grid(grid, f0, g1);
  const double e10 = sup_diff_on_grid(grid, f1, g0);
  if (e00 + e11 <= e01 + e10) {
    m.sup_err0 = e00;
    m.sup_err1 = e11;
  } else {
    m.sup_err0 = e01;
    m.sup_err1 = e10;
  }
  m.rho = std::min(e00 + e11, e01 + e10);
  m.q_err =
      (H_hat.Q.entries() - cfg.params.Q.entries()).norm();  // Frobenius
  m.pi_err =
      (H_hat.pi.probs() - cfg.params.pi.probs()).cwiseAbs().maxCoeff();
  return m;
}

ReplicateRow run_one(const ExperimentConfig& cfg, std::size_t N, int replicate,
                     std::uint64_t seed) {
  ReplicateRow row;
  row.N = N;
  row.replicate = replicate;
  row.sup_err0 = row.sup_err1 = row.rho_loss = row.q_err = row.pi_err = kNaN;
  try {
    const SampledPath path = simulate(cfg.params, N, seed);
    std::span<const double> X(path.observations);

    LValueVector lv;
    if (cfg.pipeline == Pipeline::FullEmpirical) {
      HmmParams H_hat = [&] {
        const auto [lo_it, hi_it] =
            std::minmax_element(X.begin(), X.end());
        const double lo = *lo_it, hi = *hi_it;
        const double pad = 0.05 * (hi - lo);
        const EvalGrid grid{lo - pad, hi + pad, cfg.grid_nodes};
        if (cfg.params.measure == Measure::DiscreteInteger) {
          if (cfg.alignment.kind != AlignmentRule::Kind::ByStationaryMass)
            throw Error("tail-ratio alignment needs continuous observations");
          auto pmfs = estimate_emissions_discrete(X);
          std::vector<EmissionModel> ems;
          for (auto& p : pmfs) ems.emplace_back(std::move(p));
          const RecoveredParams rec = estimate_transition(X, ems);
          const std::array<int, 2> tau =
              rec.pi_hat[1] > rec.pi_hat[0] ? std::array<int, 2>{1, 0}
                                            : std::array<int, 2>{0, 1};
          return assemble_aligned(rec, ems, tau, Measure::DiscreteInteger);
        }
        const auto features =
            FeatureSet::partition_indicators(cfg.L0, lo, hi);
        const auto space =
            DiagonalizerSearchSpace::dyadic_scalar(cfg.search_depth, lo, hi);
        const SpectralFit fit =
            estimate_emissions(X, cfg.s, features, space, cfg.alpha, grid,
                               2, cfg.bandwidth_multiplier);
        std::vector<EmissionModel> ems;
        for (const auto& d : fit.densities) ems.emplace_back(d);
        const RecoveredParams rec = estimate_transition(X, ems);
        const std::array<int, 2> tau =
            align_labels(fit, rec, cfg.alignment, X);
        return assemble_aligned(rec, ems, tau, Measure::Continuous);
      }();
      const auto [lo_it, hi_it] = std::minmax_element(X.begin(), X.end());
      const double pad = 0.05 * (*hi_it - *lo_it);
      const EvalGrid grid{*lo_it - pad, *hi_it + pad, cfg.grid_nodes};
      const EstimationMetrics m = estimation_metrics(cfg, H_hat, grid);
      row.sup_err0 = m.sup_err0;
      row.sup_err1 = m.sup_err1;
      row.rho_loss = m.rho;
      row.q_err = m.q_err;
      row.pi_err = m.pi_err;
      lv = l_values(X, H_hat);
    } else {
      lv = l_values(X, cfg.params);
    }

    std::vector<std::uint8_t> phi;
    if (cfg.pipeline == Pipeline::Oracle) {
      // Threshold rule at the data-driven lambda: reject {l_i < lambda_hat}.
      const KHatResult kh = select_k_hat(lv, cfg.t);
      phi = threshold_procedure(lv, kh.lambda_hat);
      row.K_hat = kh.K_hat;
      row.lambda_hat = kh.lambda_hat.value;
      row.lambda_infinite = kh.lambda_hat.is_infinite;
      row.post_fdr = post_fdr(lv, phi);
    } else {
      // Top-K rule: reject exactly K_hat of the smallest l-values.
      const TestingOutcome out = procedure_hat(lv, cfg.t);
      phi = out.rejections;
      row.K_hat = out.K_hat;
      row.lambda_hat = out.lambda_hat.value;
      row.lambda_infinite = out.lambda_hat.is_infinite;
      row.post_fdr = out.post_fdr;
    }

    const ErrorReport err = error_report(path.states, phi);
    row.fdp = err.fdp;
    row.tdp = err.tdp;
    row.n_rejected = err.n_rejected;
    row.n_signals = err.n_signals;
    row.n_false = err.n_false;
  } catch (const Error& e) {
    row.failed = true;
    row.failure = e.what();
  }
  return row;
}

double sample_se(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1)) /
         std::sqrt(static_cast<double>(n));
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  struct Task {
    std::size_t N;
    int replicate;
    std::uint64_t seed;
    std::size_t slot;
  };
  std::vector<Task> tasks;
  std::size_t idx = 0;
  for (std::size_t N : cfg.N_grid)
    for (int r = 0; r < cfg.replicates; ++r) {
      Rng stream = Rng::stream(cfg.master_seed, idx);
      tasks.push_back({N, r, stream.next_u64(), idx});
      ++idx;
    }

  ExperimentReport report;
  report.rows.resize(tasks.size());
  report.config_echo = config_to_json(cfg);

  const int n_threads =
      std::max(1, std::min<int>(cfg.threads, static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& tk = tasks[i];
      report.rows[tk.slot] = run_one(cfg, tk.N, tk.replicate, tk.seed);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t N : cfg.N_grid) {
    Aggregate agg;
    agg.N = N;
    std::vector<double> fdps, tdps, rhos;
    double sum_false = 0, sum_true = 0, sum_rej = 0, sum_sig = 0;
    for (const ReplicateRow& row : report.rows) {
      if (row.N != N) continue;
      if (row.failed) {
        ++agg.rows_flagged;
        continue;
      }
      ++agg.rows_aggregated;
      fdps.push_back(row.fdp);
      tdps.push_back(row.tdp);
      if (!std::isnan(row.rho_loss)) rhos.push_back(row.rho_loss);
      sum_false += static_cast<double>(row.n_false);
      sum_rej += static_cast<double>(row.n_rejected);
      sum_true += static_cast<double>(row.n_rejected - row.n_false);
      sum_sig += static_cast<double>(row.n_signals);
    }
    auto mean = [](const std::vector<double>& xs) {
      if (xs.empty()) return 0.0;
      double s = 0.0;
      for (double x : xs) s += x;
      return s / static_cast<double>(xs.size());
    };
    agg.fdr = mean(fdps);
    agg.tdr = mean(tdps);
    agg.fdr_se = sample_se(fdps);
    agg.tdr_se = sample_se(tdps);
    agg.mfdr = sum_rej > 0 ? sum_false / sum_rej : 0.0;
    agg.mtdr = sum_sig > 0 ? sum_true / sum_sig : 0.0;
    agg.median_rho = median(rhos);
    report.aggregates.push_back(agg);
  }
  return report;
}

double rho_loss_on_grid(const EvalGrid& grid,
                        const std::function<double(double)>& f0,
                        const std::function<double(double)>& f1,
                        const std::function<double(double)>& g0,
                        const std::function<double(double)>& g1) {
  const double identity = sup_diff_on_grid(grid, f0, g0) +
                          sup_diff_on_grid(grid, f1, g1);
  const double swapped = sup_diff_on_grid(grid, f0, g1) +
                         sup_diff_on_grid(grid, f1, g0);
  return std::min(identity, swapped);
}

std::vector<RiskCurveRow> estimation_risk_curve(const ExperimentReport& report,
                                                double s) {
  std::vector<RiskCurveRow> curve;
  for (const Aggregate& agg : report.aggregates)
    curve.push_back({agg.N, agg.median_rho, minimax_rate(agg.N, s)});
  return curve;
}

double minimax_rate(std::size_t N, double s) {
  const double n = static_cast<double>(N);
  return std::pow(n / std::log(n), -s / (1.0 + 2.0 * s));
}

namespace {
double smooth_bump(double x) {
  return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
}
}  // namespace

double minimax_bump(double u) {
  // Antisymmetric pair of smooth bumps, scaled to unit sup-norm.
  return std::numbers::e * (smooth_bump(4.0 * u + 1.0) -
                            smooth_bump(4.0 * u - 1.0));
}

MinimaxInstance minimax_instance(int m, double A, int M, double r) {
  if (M < 1 || m < 1 || m > M)
    throw Error("bump cell index out of range");
  if (r <= 0.0) throw Error("base density scale must be positive");

  MinimaxInstance inst;
  inst.r = r;
  inst.A = A;
  inst.M = M;
  inst.m = m;
  inst.g0 = [r](double x) {
    return r * std::exp(-0.5 * r * x * r * x) /
           std::sqrt(2.0 * std::numbers::pi);
  };
  const double Md = static_cast<double>(M), md = static_cast<double>(m);
  inst.g = [g0 = inst.g0, A, Md, md](double x) {
    return g0(x) + A * minimax_bump(Md * x - md + 0.5);
  };

  // The perturbation lives in cell ((m-1)/M, m/M); reject heights that push
  // the density negative there.
  const double lo = (md - 1.0) / Md, hi = md / Md;
  for (int i = 0; i <= 4096; ++i) {
    const double x = lo + (hi - lo) * i / 4096.0;
    if (inst.g(x) < -1e-12)
      throw NotADensity("perturbed density is negative at x=" +
                        std::to_string(x));
  }
  return inst;
}

Diagnostics diagnostics(const TransitionMatrix& Q) {
  Diagnostics d;
  d.delta = Q.min_entry();

  if (Q.states() == 2) {
    const double p = Q(0, 1), q = Q(1, 0);
    d.gamma_star = 1.0 - std::abs(1.0 - p - q);
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(Q.entries());
    std::vector<double> mods;
    for (int i = 0; i < Q.states(); ++i)
      mods.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(mods.begin(), mods.end(), std::greater<>());
    d.gamma_star = 1.0 - mods[1];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q.entries());
  const double smin = svd.singularValues().minCoeff();
  if (smin >= 1e-14)
    d.kappa = svd.singularValues().maxCoeff() / smin;
  return d;
}

void write_fdr_trend_svg(const std::vector<Aggregate>& aggregates, double t,
                         const std::string& path) {
  const int W = 640, H = 400, ml = 70, mr = 20, mt = 20, mb = 50;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (!aggregates.empty()) {
    double nmin = 1e300, nmax = 0.0, ymax = t;
    for (const auto& a : aggregates) {
      nmin = std::min(nmin, static_cast<double>(a.N));
      nmax = std::max(nmax, static_cast<double>(a.N));
      ymax = std::max(ymax, std::max(a.fdr + a.fdr_se, a.tdr));
    }
    ymax = std::min(1.05, ymax * 1.1 + 1e-12);
    const double lmin = std::log(nmin), lmax = std::log(std::max(nmax, nmin * 1.0001));
    auto px = [&](double N) {
      const double f = lmax > lmin ? (std::log(N) - lmin) / (lmax - lmin) : 0.5;
      return ml + f * (W - ml - mr);
    };
    auto py = [&](double y) { return H - mb - (y / ymax) * (H - mt - mb); };

    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
        << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
        << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    // nominal level
    svg << "<line x1=\"" << ml << "\" y1=\"" << py(t) << "\" x2=\"" << W - mr
        << "\" y2=\"" << py(t)
        << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n"
        << "<text x=\"" << W - mr - 4 << "\" y=\"" << py(t) - 5
        << "\" text-anchor=\"end\" font-size=\"12\">t=" << t << "</text>\n";

    auto polyline = [&](auto get, const char* color) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
      for (const auto& a : aggregates)
        svg << px(static_cast<double>(a.N)) << "," << py(get(a)) << " ";
      svg << "\"/>\n";
      for (const auto& a : aggregates)
        svg << "<circle cx=\"" << px(static_cast<double>(a.N)) << "\" cy=\""
            << py(get(a)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    };
    polyline([](const Aggregate& a) { return a.fdr; }, "#c0392b");
    polyline([](const Aggregate& a) { return a.tdr; }, "#2980b9");

    for (const auto& a : aggregates) {
      svg << "<text x=\"" << px(static_cast<double>(a.N)) << "\" y=\""
          << H - mb + 18 << "\" text-anchor=\"middle\" font-size=\"12\">"
          << a.N << "</text>\n";
      // FDR standard-error whiskers
      svg << "<line x1=\"" << px(static_cast<double>(a.N)) << "\" y1=\""
          << py(std::max(0.0, a.fdr - a.fdr_se)) << "\" x2=\""
          << px(static_cast<double>(a.N)) << "\" y2=\""
          << py(std::min(ymax, a.fdr + a.fdr_se))
          << "\" stroke=\"#c0392b\"/>\n";
    }
    svg << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">N (log scale)"
        << "</text>\n"
        << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 14
        << "\" font-size=\"13\" fill=\"#c0392b\">FDR</text>\n"
        << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 30
        << "\" font-size=\"13\" fill=\"#2980b9\">TDR</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << svg.str();
}

void write_report(const ExperimentReport& report, const ReportPaths& paths) {
  if (!paths.csv.empty()) {
    std::ofstream csv(paths.csv);
    if (!csv) throw IoError("cannot open " + paths.csv);
    csv << "N,replicate,failed,failure,fdp,tdp,k_hat,lambda_hat,post_fdr,"
           "sup_err_0,sup_err_1,rho_loss,q_err_frob,pi_err,"
           "n_rejected,n_signals,n_false\n";
    for (const ReplicateRow& r : report.rows) {
      csv << r.N << ',' << r.replicate << ',' << (r.failed ? 1 : 0) << ','
          << csv_quote(r.failure) << ',' << format_double(r.fdp) << ','
          << format_double(r.tdp) << ',' << r.K_hat << ','
          << (r.lambda_infinite ? "inf" : format_double(r.lambda_hat)) << ','
          << format_double(r.post_fdr) << ',' << format_double(r.sup_err0)
          << ',' << format_double(r.sup_err1) << ','
          << format_double(r.rho_loss) << ',' << format_double(r.q_err) << ','
          << format_double(r.pi_err) << ',' << r.n_rejected << ','
          << r.n_signals << ',' << r.n_false << '\n';
    }
  }

  if (!paths.json.empty()) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(report.config_echo);
    j["aggregates"] = nlohmann::json::array();
    for (const Aggregate& a : report.aggregates) {
      nlohmann::json row = {
          {"N", a.N},           {"fdr", a.fdr},
          {"tdr", a.tdr},       {"fdr_se", a.fdr_se},
          {"tdr_se", a.tdr_se}, {"mfdr", a.mfdr},
          {"mtdr", a.mtdr},     {"rows_aggregated", a.rows_aggregated},
          {"rows_flagged", a.rows_flagged}};
      if (std::isnan(a.median_rho))
        row["median_rho"] = nullptr;
      else
        row["median_rho"] = a.median_rho;
      j["aggregates"].push_back(row);
    }
    j["rows_total"] = report.rows.size();
    std::ofstream out(paths.json);
    if (!out) throw IoError("cannot open " + paths.json);
    out << j.dump(2) << '\n';
  }

  if (!paths.svg.empty()) {
    double t = 0.1;
    try {
      t = nlohmann::json::parse(report.config_echo).at("t").get<double>();
    } catch (...) {
    }
    write_fdr_trend_svg(report.aggregates, t, paths.svg);
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["params"] = nlohmann::json::parse(to_json(cfg.params));
  j["N_grid"] = cfg.N_grid;
  j["replicates"] = cfg.replicates;
  j["t"] = cfg.t;
  j["s"] = cfg.s;
  j["alpha"] = cfg.alpha;
  j["L0"] = cfg.L0;
  j["search_depth"] = cfg.search_depth;
  j["bandwidth_multiplier"] = cfg.bandwidth_multiplier;
  j["master_seed"] = cfg.master_seed;
  switch (cfg.pipeline) {
    case Pipeline::Oracle: j["pipeline"] = "oracle"; break;
    case Pipeline::PluginTrueH: j["pipeline"] = "plugin_true_h"; break;
    case Pipeline::FullEmpirical: j["pipeline"] = "full_empirical"; break;
  }
  if (cfg.alignment.kind == AlignmentRule::Kind::ByStationaryMass) {
    j["alignment"] = {{"rule", "stationary_mass"}};
  } else if (cfg.alignment.x_star_infinite) {
    j["alignment"] = {{"rule", "tail_ratio"}, {"x_star", "inf"}};
  } else {
    j["alignment"] = {{"rule", "tail_ratio"}, {"x_star", cfg.alignment.x_star}};
  }
  j["threads"] = cfg.threads;
  j["grid_nodes"] = cfg.grid_nodes;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad experiment config: ") + e.what());
  }
  try {
    ExperimentConfig cfg{params_from_json(j.at("params").dump())};
    cfg.N_grid = j.at("N_grid").get<std::vector<std::size_t>>();
    cfg.replicates = j.at("replicates").get<int>();
    cfg.t = j.at("t").get<double>();
    if (j.contains("s")) cfg.s = j["s"].get<double>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("L0")) cfg.L0 = j["L0"].get<int>();
    if (j.contains("search_depth"))
      cfg.search_depth = j["search_depth"].get<int>();
    if (j.contains("bandwidth_multiplier"))
      cfg.bandwidth_multiplier = j["bandwidth_multiplier"].get<double>();
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    const std::string pipe = j.at("pipeline").get<std::string>();
    if (pipe == "oracle")
      cfg.pipeline = Pipeline::Oracle;
    else if (pipe == "plugin_true_h")
      cfg.pipeline = Pipeline::PluginTrueH;
    else if (pipe == "full_empirical")
      cfg.pipeline = Pipeline::FullEmpirical;
    else
      throw IoError("unknown pipeline: " + pipe);
    if (j.contains("alignment")) {
      const auto& a = j["alignment"];
      const std::string rule = a.at("rule").get<std::string>();
      if (rule == "stationary_mass") {
        cfg.alignment = AlignmentRule::by_stationary_mass();
      } else if (rule == "tail_ratio") {
        if (!a.contains("x_star") || a["x_star"] == "inf")
          cfg.alignment = AlignmentRule::by_tail_ratio_infinite();
        else
          cfg.alignment =
              AlignmentRule::by_tail_ratio(a["x_star"].get<double>());
      } else {
        throw IoError("unknown alignment rule: " + rule);
      }
    }
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("grid_nodes")) cfg.grid_nodes = j["grid_nodes"].get<int>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad experiment config: ") + e.what());
  }
}

}  // namespace hmmfdr
