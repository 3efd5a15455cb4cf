#ifndef HMMFDR_HARNESS_HPP
#define HMMFDR_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hmmfdr/hmm.hpp"
#include "hmmfdr/recovery.hpp"
#include "hmmfdr/spectral.hpp"
#include "hmmfdr/testing.hpp"

namespace hmmfdr {

enum class Pipeline { Oracle, PluginTrueH, FullEmpirical };

struct ExperimentConfig {
  HmmParams params;  // ground truth
  std::vector<std::size_t> N_grid;
  int replicates = 1;
  double t = 0.1;               // FDR level
  double s = 1.0;               // smoothness assumed by the estimator
  double alpha = 0.1;           // truncation exponent
  int L0 = 4;                   // feature count
  int search_depth = 7;         // dyadic depth of the diagonalizer u-grid
  double bandwidth_multiplier = 1.0;
  std::uint64_t master_seed = 1;
  Pipeline pipeline = Pipeline::Oracle;
  AlignmentRule alignment = AlignmentRule::by_stationary_mass();
  int threads = 1;
  int grid_nodes = 1024;
};

struct ReplicateRow {
  std::size_t N = 0;
  int replicate = 0;
  bool failed = false;
  std::string failure;
  double fdp = 0.0, tdp = 0.0;
  std::size_t K_hat = 0;
  double lambda_hat = 0.0;
  bool lambda_infinite = false;
  double post_fdr = 0.0;
  // Estimation metrics; NaN for pipelines that do not estimate.
  double sup_err0 = 0.0, sup_err1 = 0.0;
  double rho_loss = 0.0;
  double q_err = 0.0, pi_err = 0.0;
  std::size_t n_rejected = 0, n_signals = 0, n_false = 0;
};

struct Aggregate {
  std::size_t N = 0;
  double fdr = 0.0, tdr = 0.0;
  double fdr_se = 0.0, tdr_se = 0.0;
  double mfdr = 0.0, mtdr = 0.0;
  double median_rho = 0.0;
  std::size_t rows_aggregated = 0, rows_flagged = 0;
};

struct ExperimentReport {
  std::vector<ReplicateRow> rows;  // sorted by (N, replicate)
  std::vector<Aggregate> aggregates;
  std::string config_echo;  // JSON echo of the config
};

/// Runs the full Monte Carlo campaign. Replicates execute on a thread pool
/// with pre-assigned RNG streams; output is deterministic in master_seed.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Permutation-minimized loss: min over label swaps of the summed grid-sup
/// errors between density pairs.
double rho_loss_on_grid(const EvalGrid& grid,
                        const std::function<double(double)>& f0,
                        const std::function<double(double)>& f1,
                        const std::function<double(double)>& g0,
                        const std::function<double(double)>& g1);

struct RiskCurveRow {
  std::size_t N = 0;
  double median_rho = 0.0;
  double r_N = 0.0;  // (N/log N)^{-s/(1+2s)}
};

/// Median rho-loss per N from a FullEmpirical report.
std::vector<RiskCurveRow> estimation_risk_curve(const ExperimentReport& report,
                                                double s);

double minimax_rate(std::size_t N, double s);

/// Perturbation instance: base density r*phi(r x) plus a zero-integral bump
/// of height A placed in cell m of an M-cell partition of (0, 1).
struct MinimaxInstance {
  double r = 1.0, A = 0.0;
  int M = 2, m = 1;
  std::function<double(double)> g0;  // r phi(r x)
  std::function<double(double)> g;   // g_{m,A}
};

MinimaxInstance minimax_instance(int m, double A, int M, double r);

/// The zero-integral bump psi: unit sup-norm, support in (-1/2, 1/2).
double minimax_bump(double u);

struct Diagnostics {
  std::optional<double> kappa;  // empty when Q is singular
  double gamma_star = 0.0;
  double delta = 0.0;
};

/// Condition number, absolute spectral gap and minimum entry of a two-state
/// transition matrix.
Diagnostics diagnostics(const TransitionMatrix& Q);

struct ReportPaths {
  std::string csv;
  std::string json;
  std::string svg;  // empty = skip
};

void write_report(const ExperimentReport& report, const ReportPaths& paths);

/// FDR-vs-N trend chart rendered directly as SVG paths.
void write_fdr_trend_svg(const std::vector<Aggregate>& aggregates, double t,
                         const std::string& path);

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

}  // namespace hmmfdr

#endif
