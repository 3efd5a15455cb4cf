// Command-line front end: simulate paths, fit emission densities, compute
// l-values, threshold them, run Monte Carlo campaigns, render reports.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hmmfdr/harness.hpp"
#include "hmmfdr/hmm.hpp"
#include "hmmfdr/recovery.hpp"
#include "hmmfdr/smoothing.hpp"
#include "hmmfdr/spectral.hpp"
#include "hmmfdr/testing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hmmfdr::IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hmmfdr::IoError("cannot open " + path);
  std::vector<double> xs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    xs.push_back(std::stod(line));
  }
  return xs;
}

void write_lines(const std::string& path, const std::vector<double>& xs) {
  std::ofstream out(path);
  if (!out) throw hmmfdr::IoError("cannot open " + path);
  char buf[40];
  for (double x : xs) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf << '\n';
  }
}

hmmfdr::HmmParams load_params(const std::string& config_path) {
  return hmmfdr::params_from_json(slurp(config_path));
}

int cmd_simulate(const std::string& config, std::uint64_t seed, std::size_t n,
                 const std::string& out_dir, const std::string& format) {
  const hmmfdr::HmmParams H = load_params(config);
  const hmmfdr::SampledPath path = hmmfdr::simulate(H, n, seed);
  fs::create_directories(out_dir);
  if (format == "json") {
    json j;
    j["seed"] = path.seed;
    j["states"] = path.states;
    j["observations"] = path.observations;
    std::ofstream out(fs::path(out_dir) / "path.json");
    out << j.dump() << '\n';
  } else {
    write_lines((fs::path(out_dir) / "observations.txt").string(),
                path.observations);
    std::ofstream st(fs::path(out_dir) / "states.txt");
    for (int s : path.states) st << s << '\n';
  }
  std::cout << "simulated N=" << n << " seed=" << seed << " -> " << out_dir
            << '\n';
  return 0;
}

int cmd_estimate(const std::string& input, double s, double alpha, int L0,
                 int depth, int grid_nodes, bool discrete,
                 const std::string& out_dir) {
  const std::vector<double> X = read_observations(input);
  fs::create_directories(out_dir);
  if (discrete) {
    const auto pmfs = hmmfdr::estimate_emissions_discrete(X);
    json j = json::array();
    for (const auto& pmf : pmfs) {
      json one;
      for (const auto& [k, v] : pmf.probs) one[std::to_string(k)] = v;
      j.push_back(one);
    }
    std::ofstream out(fs::path(out_dir) / "fit.json");
    out << j.dump(2) << '\n';
  } else {
    const auto [lo_it, hi_it] = std::minmax_element(X.begin(), X.end());
    const double pad = 0.05 * (*hi_it - *lo_it);
    const hmmfdr::EvalGrid grid{*lo_it - pad, *hi_it + pad, grid_nodes};
    const auto features =
        hmmfdr::FeatureSet::partition_indicators(L0, *lo_it, *hi_it);
    const auto space =
        hmmfdr::DiagonalizerSearchSpace::dyadic_scalar(depth, *lo_it, *hi_it);
    const hmmfdr::SpectralFit fit =
        hmmfdr::estimate_emissions(X, s, features, space, alpha, grid);
    std::ofstream out(fs::path(out_dir) / "fit.json");
    out << hmmfdr::to_json(fit) << '\n';
  }
  std::cout << "fit written to " << out_dir << "/fit.json\n";
  return 0;
}

int cmd_lvalues(const std::string& config, const std::string& input,
                const std::string& out_dir, const std::string& format) {
  const hmmfdr::HmmParams H = load_params(config);
  const std::vector<double> X = read_observations(input);
  const hmmfdr::LValueVector lv = hmmfdr::l_values(X, H);
  fs::create_directories(out_dir);
  if (format == "json") {
    json j;
    j["params_tag"] = lv.params_tag;
    j["values"] = lv.values;
    std::ofstream out(fs::path(out_dir) / "lvalues.json");
    out << j.dump() << '\n';
  } else {
    write_lines((fs::path(out_dir) / "lvalues.txt").string(), lv.values);
  }
  std::cout << lv.size() << " l-values written to " << out_dir << '\n';
  return 0;
}

int cmd_test(const std::string& input, double t, const std::string& out_dir,
             const std::string& format) {
  hmmfdr::LValueVector lv;
  lv.values = read_observations(input);
  const hmmfdr::TestingOutcome out = hmmfdr::procedure_hat(lv, t);
  fs::create_directories(out_dir);
  if (format == "json") {
    json j;
    j["K_hat"] = out.K_hat;
    if (out.lambda_hat.is_infinite)
      j["lambda_hat"] = "inf";
    else
      j["lambda_hat"] = out.lambda_hat.value;
    j["post_fdr"] = out.post_fdr;
    j["t"] = out.level_t;
    j["rejections"] = out.rejections;
    std::ofstream f(fs::path(out_dir) / "test.json");
    f << j.dump() << '\n';
  } else {
    std::ofstream f(fs::path(out_dir) / "rejections.txt");
    for (auto r : out.rejections) f << int(r) << '\n';
  }
  std::cout << "K_hat=" << out.K_hat << " lambda_hat="
            << (out.lambda_hat.is_infinite
                    ? std::string("inf")
                    : std::to_string(out.lambda_hat.value))
            << " post_fdr=" << out.post_fdr << '\n';
  return 0;
}

int cmd_experiment(const std::string& config, const std::string& out_dir,
                   int threads, std::uint64_t seed_override, bool has_seed) {
  hmmfdr::ExperimentConfig cfg = hmmfdr::config_from_json(slurp(config));
  if (threads > 0) cfg.threads = threads;
  if (has_seed) cfg.master_seed = seed_override;
  const hmmfdr::ExperimentReport report = hmmfdr::run_experiment(cfg);
  fs::create_directories(out_dir);
  hmmfdr::ReportPaths paths;
  paths.csv = (fs::path(out_dir) / "report.csv").string();
  paths.json = (fs::path(out_dir) / "report.json").string();
  paths.svg = (fs::path(out_dir) / "fdr_trend.svg").string();
  hmmfdr::write_report(report, paths);
  for (const auto& a : report.aggregates)
    std::cout << "N=" << a.N << " FDR=" << a.fdr << " TDR=" << a.tdr
              << " mFDR=" << a.mfdr << " mTDR=" << a.mtdr
              << " flagged=" << a.rows_flagged << '\n';
  return 0;
}

// Rebuild per-N aggregates from a report CSV and render the trend chart.
int cmd_report(const std::string& input, double t, const std::string& out) {
  std::ifstream in(input);
  if (!in) throw hmmfdr::IoError("cannot open " + input);
  std::string line;
  std::getline(in, line);  // header
  struct Acc {
    std::vector<double> fdps, tdps;
  };
  std::map<std::size_t, Acc> by_n;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Columns: N,replicate,failed,failure,fdp,tdp,...; the failure string is
    // quoted, so split carefully.
    std::vector<std::string> cells;
    bool quoted = false;
    std::string cell;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    if (cells.size() < 6) continue;
    if (cells[2] == "1") continue;  // flagged row
    Acc& acc = by_n[std::stoull(cells[0])];
    acc.fdps.push_back(std::stod(cells[4]));
    acc.tdps.push_back(std::stod(cells[5]));
  }
  std::vector<hmmfdr::Aggregate> aggs;
  for (const auto& [N, acc] : by_n) {
    hmmfdr::Aggregate a;
    a.N = N;
    a.rows_aggregated = acc.fdps.size();
    double sf = 0, st = 0;
    for (double v : acc.fdps) sf += v;
    for (double v : acc.tdps) st += v;
    const double n = std::max<std::size_t>(1, acc.fdps.size());
    a.fdr = sf / n;
    a.tdr = st / n;
    double ss = 0;
    for (double v : acc.fdps) ss += (v - a.fdr) * (v - a.fdr);
    if (acc.fdps.size() > 1)
      a.fdr_se = std::sqrt(ss / (acc.fdps.size() - 1.0)) /
                 std::sqrt(double(acc.fdps.size()));
    aggs.push_back(a);
  }
  hmmfdr::write_fdr_trend_svg(aggs, t, out);
  std::cout << "chart written to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple testing for nonparametric hidden Markov models"};
  app.require_subcommand(1);

  std::string config, input, out_dir = ".", format = "csv", out_file;
  std::uint64_t seed = 1;
  std::size_t n = 1000;
  double t = 0.1, s = 1.0, alpha = 0.1;
  int L0 = 4, depth = 7, grid_nodes = 1024, threads = 0;
  bool discrete = false;

  auto* sim = app.add_subcommand("simulate", "Sample a hidden path");
  sim->add_option("--config", config, "HMM parameter JSON")->required();
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("-n,--length", n, "sequence length");
  sim->add_option("--out-dir", out_dir, "output directory");
  sim->add_option("--format", format, "csv|json");

  auto* est = app.add_subcommand("estimate", "Fit emission densities");
  est->add_option("--input", input, "observations, one float per line")
      ->required();
  est->add_option("--s", s, "assumed smoothness");
  est->add_option("--alpha", alpha, "truncation exponent");
  est->add_option("--features", L0, "feature count");
  est->add_option("--depth", depth, "diagonalizer grid depth");
  est->add_option("--grid-nodes", grid_nodes, "evaluation grid size");
  est->add_flag("--discrete", discrete, "integer-valued observations");
  est->add_option("--out-dir", out_dir, "output directory");

  auto* lv = app.add_subcommand("lvalues", "Posterior null probabilities");
  lv->add_option("--config", config, "HMM parameter JSON")->required();
  lv->add_option("--input", input, "observations file")->required();
  lv->add_option("--out-dir", out_dir, "output directory");
  lv->add_option("--format", format, "csv|json");

  auto* tst = app.add_subcommand("test", "Threshold an l-value file");
  tst->add_option("--input", input, "l-values, one per line")->required();
  tst->add_option("--t", t, "FDR level in (0,1)");
  tst->add_option("--out-dir", out_dir, "output directory");
  tst->add_option("--format", format, "csv|json");

  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo campaign");
  exp->add_option("--config", config, "experiment config JSON")->required();
  exp->add_option("--out-dir", out_dir, "output directory");
  exp->add_option("--threads", threads, "worker threads (override)");
  auto* seed_opt = exp->add_option("--seed", seed, "master seed (override)");

  auto* rep = app.add_subcommand("report", "Render SVG from a report CSV");
  rep->add_option("--input", input, "report.csv")->required();
  rep->add_option("--t", t, "nominal level line");
  rep->add_option("--out", out_file, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config, seed, n, out_dir, format);
    if (est->parsed())
      return cmd_estimate(input, s, alpha, L0, depth, grid_nodes, discrete,
                          out_dir);
    if (lv->parsed()) return cmd_lvalues(config, input, out_dir, format);
    if (tst->parsed()) return cmd_test(input, t, out_dir, format);
    if (exp->parsed())
      return cmd_experiment(config, out_dir, threads, seed,
                            seed_opt->count() > 0);
    if (rep->parsed()) return cmd_report(input, t, out_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
