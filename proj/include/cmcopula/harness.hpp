#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cmcopula/copula.hpp"
#include "cmcopula/empirical.hpp"
#include "cmcopula/estimators.hpp"
#include "cmcopula/rng.hpp"

namespace cmcopula {

/// (alpha, beta) with Kendall's tau equal to tau_target:
/// beta = 2 / ((1 - tau)(2 + alpha)). Throws OutOfRangeError when beta < 1
/// and DomainError for tau outside (0, 1) or alpha <= 0.
TransformedGumbelParams calibrate_params(double tau_target, double alpha);

struct McCell {
  TransformedGumbelParams theta0;
  int n = 200;
  std::vector<Method> estimators{Method::cm};
};

struct McConfig {
  std::vector<McCell> cells;
  int replications = 1000;
  std::uint64_t master_seed = 20240101;
  std::string output_path = ".";  // directory receiving results.csv and timing.csv
  CountRule count_rule = CountRule::strict;

  /// Throws DomainError unless N >= 1, n >= 10 and every theta0 is valid.
  void validate() const;
};

/// Reads a JSON config. Either a grid
///   {"theta0": [{"alpha": a, "beta": b} | {"tau": t, "alpha": a}, ...],
///    "sample_sizes": [...], "estimators": ["CM", ...]}
/// or an explicit "cells" list of {"alpha", "beta", "n", "estimators"}, plus
/// optional "replications", "master_seed", "output_path", "count_rule"
/// ("strict" or "inclusive"). Unknown keys are rejected. Throws ParseError.
McConfig parse_config(const std::string& json_text);
McConfig load_config(const std::string& path);

/// Outcome of one replication. `estimate` holds the unclamped estimator output.
struct ReplicationOutcome {
  bool failed = false;
  bool converged = false;
  TransformedGumbelParams estimate{0.0, 0.0};
  std::string error;
};

struct McCellResult {
  Method estimator = Method::cm;
  TransformedGumbelParams theta0;
  int n = 0;
  int replications = 0;
  std::array<double, 2> bias{};
  std::array<double, 2> rmse{};
  std::array<double, 2> mean{};
  double failure_rate = 0.0;
  double nonconverged_rate = 0.0;
  double wall_time = 0.0;  // seconds, machine dependent
};

/// Per-cell master stream. Depends only on the master seed and the cell's
/// (theta0, n), so every estimator of a cell sees the same samples and cell
/// order does not matter.
SeededRng cell_rng(std::uint64_t master_seed, const TransformedGumbelParams& theta0, int n);

/// The pseudo sample of replication `index`: derive_replication_rng, draw n
/// pairs at theta0, rank.
PseudoSample replication_sample(const SeededRng& cell_master, std::int64_t index,
                                const TransformedGumbelParams& theta0, int n);

/// Runs replications 0..N-1 of one estimator on `threads` workers. Outcomes
/// are stored by replication index, so they do not depend on scheduling.
std::vector<ReplicationOutcome> run_replications(const TransformedGumbelParams& theta0, int n,
                                                 Method method, int replications,
                                                 const SeededRng& cell_master, int threads = 1,
                                                 CountRule rule = CountRule::strict);

/// Bias/RMSE/mean over non-failed replications, summed in replication order.
McCellResult aggregate(Method method, const TransformedGumbelParams& theta0, int n,
                       const std::vector<ReplicationOutcome>& outcomes);

McCellResult run_cell(const McCell& cell, Method method, int replications,
                      const SeededRng& cell_master, int threads = 1,
                      CountRule rule = CountRule::strict);

/// All (cell, estimator) pairs in config order.
std::vector<McCellResult> run_study(const McConfig& config, int threads = 1);

/// results.csv: estimator, alpha0, beta0, tau0, n, N, bias_alpha, rmse_alpha,
/// bias_beta, rmse_beta, failure_rate, mean_alpha, mean_beta,
/// nonconverged_rate. Wall time is kept out so the file is reproducible.
std::string results_csv(const std::vector<McCellResult>& results);
/// timing.csv: estimator, alpha0, beta0, n, N, seconds.
std::string timing_csv(const std::vector<McCellResult>& results);
/// Aligned text: one block per theta0, rows (n, estimator), Bias/RMSE pairs.
std::string render_table(const std::vector<McCellResult>& results);

/// Writes results.csv and timing.csv into `directory` (created if missing),
/// each via temporary file and rename. Throws IoError.
void write_study_outputs(const std::string& directory, const std::vector<McCellResult>& results);

}  // namespace cmcopula
