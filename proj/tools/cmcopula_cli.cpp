// cmcopula: fit, simulate, calibrate and sample the transformed Gumbel copula.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "cmcopula/copula.hpp"
#include "cmcopula/empirical.hpp"
#include "cmcopula/error.hpp"
#include "cmcopula/estimators.hpp"
#include "cmcopula/harness.hpp"
#include "cmcopula/rng.hpp"
#include "cmcopula/sampling.hpp"
#include "cmcopula/table_io.hpp"

namespace {

using namespace cmcopula;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEstimator = 3;
constexpr int kExitIo = 4;

// Round to 10 significant digits so the JSON text is stable.
double sig10(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(format_number(v));
}

ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return sig10(v);
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::parse: return kExitUsage;
    case ErrorCode::io: return kExitIo;
    default: return kExitEstimator;
  }
}

int report_error(const Error& e) {
  ordered_json err;
  err["error"]["code"] = to_string(e.code());
  err["error"]["message"] = e.what();
  if (const auto* pe = dynamic_cast<const ParseError*>(&e); pe && pe->line() > 0)
    err["error"]["line"] = pe->line();
  std::cout << err.dump(2) << '\n';
  std::cerr << "error: " << e.what() << '\n';
  return exit_code_for(e);
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string method = "cm";
  std::string data;
  bool rescale = false;
  std::optional<double> alpha_init;
  std::optional<double> beta_init;
  std::string count_rule = "strict";
  bool covariance = true;
};

CsvTable read_table(const std::string& path) {
  if (path == "-") return read_numeric_csv(std::cin);
  return read_numeric_csv_file(path);
}

int cmd_estimate(const EstimateArgs& args) {
  const auto method = parse_method(args.method);
  if (!method || *method == Method::tau_inv) throw ParseError("unknown method '" + args.method + "'");
  if (args.alpha_init.has_value() != args.beta_init.has_value())
    throw ParseError("--alpha-init and --beta-init must be given together");

  const CsvTable table = read_table(args.data);
  if (table.data.cols() < 2)
    throw ParseError("data must have at least 2 columns, found " + std::to_string(table.data.cols()));
  if (table.data.rows() < 2) throw ParseError("data must have at least 2 rows");
  if (table.data.cols() > 2 && *method != Method::cm)
    throw ParseError("only the cm method accepts more than 2 columns");

  const PseudoSample pseudo =
      pseudo_observations(RawSample(table.data), PseudoOptions{.rescale = args.rescale});
  const CountRule rule = args.count_rule == "inclusive" ? CountRule::inclusive : CountRule::strict;

  ordered_json out;
  out["method"] = to_string(*method);
  out["n"] = pseudo.n();
  out["d"] = pseudo.d();
  std::vector<std::string> warnings;
  if (pseudo.ties_present()) warnings.push_back("ties present in the data; max-ranks used");

  const MomentVector moments = empirical_moments(pseudo, 2, rule);
  out["moments"] = {{"M1", num(moments.moment(1))}, {"M2", num(moments.moment(2))}};

  if (pseudo.d() > 2) {
    warnings.push_back("the two-parameter model is bivariate; only the copula moments are reported for d > 2");
    out["tau_hat_from_M1"] = num(kendall_tau_from_first_moment(moments.moment(1), static_cast<int>(pseudo.d())));
    out["warnings"] = warnings;
    std::cout << out.dump(2) << '\n';
    return kExitOk;
  }

  out["tau_hat"] = num(empirical_tau(pseudo));
  out["rho_hat"] = num(empirical_rho(pseudo));

  FitOptions opts;
  opts.count_rule = rule;
  if (args.alpha_init) opts.initial = TransformedGumbelParams{*args.alpha_init, *args.beta_init};
  const EstimateReport rep = fit(pseudo, *method, opts);

  out["estimate"] = {{"alpha", num(rep.params.alpha)}, {"beta", num(rep.params.beta)}};
  if (!(rep.raw == rep.params))
    out["raw_estimate"] = {{"alpha", num(rep.raw.alpha)}, {"beta", num(rep.raw.beta)}};
  if (*method == Method::cm && args.covariance) {
    try {
      const VarianceComponents vc = asymptotic_covariance(rep.params);
      const double n = static_cast<double>(pseudo.n());
      out["standard_errors"] = {{"alpha", num(std::sqrt(vc.sandwich(0, 0) / n))},
                                {"beta", num(std::sqrt(vc.sandwich(1, 1) / n))}};
      out["covariance"] = {{num(vc.sandwich(0, 0) / n), num(vc.sandwich(0, 1) / n)},
                           {num(vc.sandwich(1, 0) / n), num(vc.sandwich(1, 1) / n)}};
    } catch (const Error& e) {
      warnings.push_back(std::string("standard errors unavailable: ") + e.what());
    }
  }
  out["converged"] = rep.converged;
  out["status"] = to_string(rep.status);
  out["iterations"] = rep.iterations;
  for (const auto& d : rep.diagnostics) warnings.push_back(d);
  out["warnings"] = warnings;
  std::cout << out.dump(2) << '\n';

  // A clamped closed-form CM estimate is a boundary warning, not a solver failure.
  if (!rep.converged && *method != Method::cm) return kExitEstimator;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 1;
};

int cmd_simulate(const SimulateArgs& args) {
  McConfig cfg = load_config(args.config);
  if (args.replications) cfg.replications = *args.replications;
  if (args.seed) cfg.master_seed = *args.seed;
  if (args.out) cfg.output_path = *args.out;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  const auto results = run_study(cfg, args.threads);
  write_study_outputs(cfg.output_path, results);
  std::cout << render_table(results);
  std::cerr << "wrote " << (std::filesystem::path(cfg.output_path) / "results.csv").string() << '\n';
  return kExitOk;
}

int cmd_calibrate(double tau, double alpha) {
  const TransformedGumbelParams p = calibrate_params(tau, alpha);
  ordered_json out{{"tau", num(tau)}, {"alpha", num(p.alpha)}, {"beta", num(p.beta)}};
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_sample(double alpha, double beta, long long n, std::uint64_t seed,
               const std::optional<std::string>& out_path) {
  const TransformedGumbelParams p{alpha, beta};
  p.validate();
  if (n < 1) throw ParseError("--n must be >= 1");
  SeededRng rng(seed);
  const Matrix sample = sample_archimedean_bivariate(p.generator(), n, rng);
  std::ostringstream text;
  write_numeric_csv(text, sample, {"u1", "u2"});
  if (out_path) {
    write_file_atomically(*out_path, text.str());
  } else {
    std::cout << text.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula-moment estimation for the transformed Gumbel copula"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Fit an estimator to a CSV data file");
  estimate->add_option("--method", est.method, "cm, pml or taurho")
      ->check(CLI::IsMember({"cm", "pml", "taurho"}));
  estimate->add_option("--data", est.data, "CSV file ('-' for standard input)")->required();
  estimate->add_flag("--rescale-pseudo", est.rescale, "Scale ranks by 1/(n+1) instead of 1/n");
  estimate->add_option("--alpha-init", est.alpha_init, "Initial alpha (pml, taurho)");
  estimate->add_option("--beta-init", est.beta_init, "Initial beta (pml, taurho)");
  estimate->add_option("--count-rule", est.count_rule,
                       "Empirical copula at the observations: strict (<) or inclusive (<=)")
      ->check(CLI::IsMember({"strict", "inclusive"}));
  estimate->add_flag("!--no-covariance", est.covariance, "Skip CM standard errors");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo study from a config file");
  simulate->add_option("--config", sim.config, "JSON config file")->required();
  simulate->add_option("--replications", sim.replications, "Override N")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Override the master seed");
  simulate->add_option("--out", sim.out, "Output directory");
  simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::Range(1, 1024));

  double tau = 0.0, alpha = 0.0;
  auto* calibrate = app.add_subcommand("calibrate", "Beta giving Kendall's tau at fixed alpha");
  calibrate->add_option("--tau", tau)->required();
  calibrate->add_option("--alpha", alpha)->required();

  double s_alpha = 0.0, s_beta = 0.0;
  long long s_n = 0;
  std::uint64_t s_seed = 0;
  std::optional<std::string> s_out;
  auto* sample = app.add_subcommand("sample", "Draw pairs from the copula as CSV");
  sample->add_option("--alpha", s_alpha)->required();
  sample->add_option("--beta", s_beta)->required();
  sample->add_option("--n", s_n)->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", s_seed)->required();
  sample->add_option("--out", s_out, "Output CSV (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*estimate) return cmd_estimate(est);
    if (*simulate) return cmd_simulate(sim);
    if (*calibrate) return cmd_calibrate(tau, alpha);
    if (*sample) return cmd_sample(s_alpha, s_beta, s_n, s_seed, s_out);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
