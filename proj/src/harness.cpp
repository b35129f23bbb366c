#include "cmcopula/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cmcopula/error.hpp"
#include "cmcopula/sampling.hpp"
#include "cmcopula/table_io.hpp"

namespace cmcopula {

TransformedGumbelParams calibrate_params(double tau_target, double alpha) {
  if (!(tau_target > 0.0 && tau_target < 1.0)) throw DomainError("tau target must lie in (0, 1)");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be > 0");
  const double beta = 2.0 / ((1.0 - tau_target) * (2.0 + alpha));
  if (beta < 1.0) {
    std::ostringstream msg;
    msg << "tau " << tau_target << " is not attainable with alpha " << alpha
        << " (needs beta " << beta << " < 1)";
    throw OutOfRangeError(msg.str());
  }
  return {alpha, beta};
}

void McConfig::validate() const {
  if (replications < 1) throw DomainError("replications must be >= 1");
  if (cells.empty()) throw DomainError("config has no cells");
  for (const auto& cell : cells) {
    cell.theta0.validate();
    if (cell.n < 10) throw DomainError("sample size must be >= 10");
    if (cell.estimators.empty()) throw DomainError("cell has no estimators");
  }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ParseError(std::string("unknown key '") + key + "' in " + where);
  }
}

std::vector<Method> parse_estimators(const json& list) {
  if (!list.is_array() || list.empty()) throw ParseError("'estimators' must be a non-empty array");
  std::vector<Method> out;
  for (const auto& item : list) {
    if (!item.is_string()) throw ParseError("estimator tags must be strings");
    const auto m = parse_method(item.get<std::string>());
    if (!m || *m == Method::tau_inv)
      throw ParseError("unknown estimator '" + item.get<std::string>() +
                       "' (expected CM, PML or TAU_RHO_INV)");
    out.push_back(*m);
  }
  return out;
}

double number(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number())
    throw ParseError(std::string("'") + key + "' must be a number");
  return obj.at(key).get<double>();
}

int positive_int(const json& value, const char* what) {
  if (!value.is_number_integer() || value.get<long long>() < 1 ||
      value.get<long long>() > 100'000'000)
    throw ParseError(std::string("'") + what + "' must be a positive integer");
  return static_cast<int>(value.get<long long>());
}

TransformedGumbelParams parse_theta(const json& obj) {
  if (!obj.is_object()) throw ParseError("theta0 entries must be objects");
  reject_unknown(obj, {"alpha", "beta", "tau"}, "theta0 entry");
  const double alpha = number(obj, "alpha");
  if (obj.contains("tau")) {
    if (obj.contains("beta")) throw ParseError("give either 'beta' or 'tau', not both");
    try {
      return calibrate_params(number(obj, "tau"), alpha);
    } catch (const Error& e) {
      throw ParseError(std::string("theta0: ") + e.what());
    }
  }
  return {alpha, number(obj, "beta")};
}

}  // namespace

McConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("config must be a JSON object");
  reject_unknown(root,
                 {"replications", "master_seed", "output_path", "count_rule", "theta0",
                  "sample_sizes", "estimators", "cells", "description"},
                 "config");

  McConfig cfg;
  if (root.contains("replications")) cfg.replications = positive_int(root["replications"], "replications");
  if (root.contains("master_seed")) {
    if (!root["master_seed"].is_number_unsigned() && !root["master_seed"].is_number_integer())
      throw ParseError("'master_seed' must be a non-negative integer");
    if (root["master_seed"].is_number_integer() && root["master_seed"].get<long long>() < 0)
      throw ParseError("'master_seed' must be a non-negative integer");
    cfg.master_seed = root["master_seed"].get<std::uint64_t>();
  }
  if (root.contains("output_path")) {
    if (!root["output_path"].is_string()) throw ParseError("'output_path' must be a string");
    cfg.output_path = root["output_path"].get<std::string>();
  }
  if (root.contains("count_rule")) {
    const json& rule = root["count_rule"];
    if (rule == "strict") cfg.count_rule = CountRule::strict;
    else if (rule == "inclusive") cfg.count_rule = CountRule::inclusive;
    else throw ParseError("'count_rule' must be \"strict\" or \"inclusive\"");
  }

  const bool grid = root.contains("theta0") || root.contains("sample_sizes");
  if (grid == root.contains("cells"))
    throw ParseError("config needs either a theta0/sample_sizes grid or a 'cells' list");

  if (grid) {
    if (!root.contains("theta0") || !root["theta0"].is_array() || root["theta0"].empty())
      throw ParseError("'theta0' must be a non-empty array");
    if (!root.contains("sample_sizes") || !root["sample_sizes"].is_array() ||
        root["sample_sizes"].empty())
      throw ParseError("'sample_sizes' must be a non-empty array");
    const std::vector<Method> estimators =
        root.contains("estimators") ? parse_estimators(root["estimators"]) : std::vector{Method::cm};
    for (const auto& theta : root["theta0"])
      for (const auto& n : root["sample_sizes"])
        cfg.cells.push_back({parse_theta(theta), positive_int(n, "sample_sizes"), estimators});
  } else {
    if (root.contains("estimators")) throw ParseError("'estimators' belongs inside each cell");
    if (!root["cells"].is_array() || root["cells"].empty())
      throw ParseError("'cells' must be a non-empty array");
    for (const auto& c : root["cells"]) {
      if (!c.is_object()) throw ParseError("cells must be objects");
      reject_unknown(c, {"alpha", "beta", "tau", "n", "estimators"}, "cell");
      json theta = c;
      theta.erase("n");
      theta.erase("estimators");
      if (!c.contains("n")) throw ParseError("cell is missing 'n'");
      cfg.cells.push_back({parse_theta(theta), positive_int(c["n"], "n"),
                           c.contains("estimators") ? parse_estimators(c["estimators"])
                                                    : std::vector{Method::cm}});
    }
  }

  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

McConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

// ---------------------------------------------------------------------------
// Replications

SeededRng cell_rng(std::uint64_t master_seed, const TransformedGumbelParams& theta0, int n) {
  std::uint64_t state = std::bit_cast<std::uint64_t>(theta0.alpha);
  std::uint64_t h = splitmix64(state);
  state = h ^ std::bit_cast<std::uint64_t>(theta0.beta);
  h = splitmix64(state);
  state = h ^ static_cast<std::uint64_t>(n);
  h = splitmix64(state);
  return SeededRng(master_seed, h);
}

PseudoSample replication_sample(const SeededRng& cell_master, std::int64_t index,
                                const TransformedGumbelParams& theta0, int n) {
  SeededRng rng = derive_replication_rng(cell_master, index);
  const TransformedGumbelGenerator gen = theta0.generator();
  return pseudo_observations(RawSample(sample_archimedean_bivariate(gen, n, rng)));
}

namespace {

ReplicationOutcome run_one(const TransformedGumbelParams& theta0, int n, Method method,
                           const SeededRng& cell_master, std::int64_t index, CountRule rule) {
  ReplicationOutcome out;
  try {
    const PseudoSample pseudo = replication_sample(cell_master, index, theta0, n);
    FitOptions opts;
    opts.count_rule = rule;
    const EstimateReport rep = fit(pseudo, method, opts);
    out.estimate = rep.raw;
    out.converged = rep.converged;
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<ReplicationOutcome> run_replications(const TransformedGumbelParams& theta0, int n,
                                                 Method method, int replications,
                                                 const SeededRng& cell_master, int threads,
                                                 CountRule rule) {
  if (replications < 1) throw DomainError("replications must be >= 1");
  theta0.validate();
  std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(replications));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < replications; i = next++)
      outcomes[static_cast<std::size_t>(i)] = run_one(theta0, n, method, cell_master, i, rule);
  };
  const int workers = std::clamp(threads, 1, replications);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return outcomes;
}

McCellResult aggregate(Method method, const TransformedGumbelParams& theta0, int n,
                       const std::vector<ReplicationOutcome>& outcomes) {
  McCellResult r;
  r.estimator = method;
  r.theta0 = theta0;
  r.n = n;
  r.replications = static_cast<int>(outcomes.size());
  const std::array<double, 2> truth{theta0.alpha, theta0.beta};
  std::array<double, 2> sum{}, sum_sq{};
  int ok = 0, failed = 0, nonconverged = 0;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++failed;
      continue;
    }
    ++ok;
    if (!o.converged) ++nonconverged;
    const std::array<double, 2> est{o.estimate.alpha, o.estimate.beta};
    for (int j = 0; j < 2; ++j) {
      sum[j] += est[j];
      sum_sq[j] += (est[j] - truth[j]) * (est[j] - truth[j]);
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int j = 0; j < 2; ++j) {
    r.mean[j] = ok ? sum[j] / ok : nan;
    r.bias[j] = ok ? r.mean[j] - truth[j] : nan;
    r.rmse[j] = ok ? std::sqrt(sum_sq[j] / ok) : nan;
  }
  r.failure_rate = outcomes.empty() ? 0.0 : static_cast<double>(failed) / outcomes.size();
  r.nonconverged_rate = outcomes.empty() ? 0.0 : static_cast<double>(nonconverged) / outcomes.size();
  return r;
}

McCellResult run_cell(const McCell& cell, Method method, int replications,
                      const SeededRng& cell_master, int threads, CountRule rule) {
  const auto start = std::chrono::steady_clock::now();
  const auto outcomes =
      run_replications(cell.theta0, cell.n, method, replications, cell_master, threads, rule);
  McCellResult r = aggregate(method, cell.theta0, cell.n, outcomes);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<McCellResult> run_study(const McConfig& config, int threads) {
  config.validate();
  std::vector<McCellResult> results;
  for (const auto& cell : config.cells) {
    const SeededRng master = cell_rng(config.master_seed, cell.theta0, cell.n);
    for (Method m : cell.estimators)
      results.push_back(run_cell(cell, m, config.replications, master, threads, config.count_rule));
  }
  return results;
}

// ---------------------------------------------------------------------------
// Rendering

std::string results_csv(const std::vector<McCellResult>& results) {
  std::ostringstream out;
  out << "estimator,alpha0,beta0,tau0,n,N,bias_alpha,rmse_alpha,bias_beta,rmse_beta,"
         "failure_rate,mean_alpha,mean_beta,nonconverged_rate\n";
  for (const auto& r : results) {
    out << to_string(r.estimator) << ',' << format_number(r.theta0.alpha) << ','
        << format_number(r.theta0.beta) << ',' << format_number(tau_of_params(r.theta0)) << ','
        << r.n << ',' << r.replications << ',' << format_number(r.bias[0]) << ','
        << format_number(r.rmse[0]) << ',' << format_number(r.bias[1]) << ','
        << format_number(r.rmse[1]) << ',' << format_number(r.failure_rate) << ','
        << format_number(r.mean[0]) << ',' << format_number(r.mean[1]) << ','
        << format_number(r.nonconverged_rate) << '\n';
  }
  return out.str();
}

std::string timing_csv(const std::vector<McCellResult>& results) {
  std::ostringstream out;
  out << "estimator,alpha0,beta0,n,N,seconds\n";
  for (const auto& r : results)
    out << to_string(r.estimator) << ',' << format_number(r.theta0.alpha) << ','
        << format_number(r.theta0.beta) << ',' << r.n << ',' << r.replications << ','
        << format_number(r.wall_time) << '\n';
  return out.str();
}

std::string render_table(const std::vector<McCellResult>& results) {
  std::ostringstream out;
  // Group by theta0, preserving first appearance.
  std::vector<TransformedGumbelParams> thetas;
  for (const auto& r : results)
    if (std::find(thetas.begin(), thetas.end(), r.theta0) == thetas.end()) thetas.push_back(r.theta0);

  auto fixed = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  for (const auto& theta : thetas) {
    out << "theta0 = (" << format_number(theta.alpha) << ", " << format_number(theta.beta)
        << "), tau = " << fixed(tau_of_params(theta), 4) << '\n';
    out << std::left << std::setw(6) << "n" << std::setw(13) << "estimator" << std::right
        << std::setw(11) << "bias(a)" << std::setw(11) << "rmse(a)" << std::setw(11) << "bias(b)"
        << std::setw(11) << "rmse(b)" << std::setw(8) << "fail" << std::setw(10) << "time(s)"
        << '\n';
    for (const auto& r : results) {
      if (!(r.theta0 == theta)) continue;
      out << std::left << std::setw(6) << r.n << std::setw(13) << to_string(r.estimator)
          << std::right << std::setw(11) << fixed(r.bias[0], 3) << std::setw(11)
          << fixed(r.rmse[0], 3) << std::setw(11) << fixed(r.bias[1], 3) << std::setw(11)
          << fixed(r.rmse[1], 3) << std::setw(8) << fixed(r.failure_rate, 3) << std::setw(10)
          << fixed(r.wall_time, 2) << '\n';
    }
    out << '\n';
  }
  return out.str();
}

void write_study_outputs(const std::string& directory, const std::vector<McCellResult>& results) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec || !fs::is_directory(directory))
    throw IoError("cannot create output directory '" + directory + "'");
  const std::string csv = results_csv(results);
  const std::string timing = timing_csv(results);
  write_file_atomically((fs::path(directory) / "results.csv").string(), csv);
  write_file_atomically((fs::path(directory) / "timing.csv").string(), timing);
}

}  // namespace cmcopula
