#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cmcopula/copula.hpp"
#include "cmcopula/empirical.hpp"
#include "cmcopula/error.hpp"
#include "cmcopula/estimators.hpp"
#include "cmcopula/generator.hpp"
#include "cmcopula/rng.hpp"
#include "cmcopula/sampling.hpp"

using namespace cmcopula;

namespace {

MomentVector model_moments(const TransformedGumbelParams& p) {
  return MomentVector{{moment_closed_form(1, p), moment_closed_form(2, p)}};
}

Matrix raw_sample(int n, std::uint64_t seed, TransformedGumbelParams p) {
  SeededRng rng(seed);
  return sample_archimedean_bivariate(p.generator(), n, rng);
}

PseudoSample pseudo_sample(int n, std::uint64_t seed, TransformedGumbelParams p) {
  return pseudo_observations(RawSample(raw_sample(n, seed, p)));
}

}  // namespace

TEST_CASE("method tags") {
  CHECK(parse_method("cm") == Method::cm);
  CHECK(parse_method("TAU_RHO_INV") == Method::tau_rho_inv);
  CHECK(parse_method("taurho") == Method::tau_rho_inv);
  CHECK(parse_method("PML") == Method::pml);
  CHECK_FALSE(parse_method("mle").has_value());
  CHECK(std::string(to_string(Method::cm)) == "CM");
}

TEST_CASE("closed-form CM inversion: examples") {
  const EstimateReport a = cm_estimate_closed_form(MomentVector{{0.375, 3.6 / 16.8}});
  CHECK(std::abs(a.params.alpha - 0.5) < 1e-10);
  CHECK(std::abs(a.params.beta - 1.6) < 1e-10);
  CHECK(a.converged);
  CHECK(a.moments_used.has_value());

  const EstimateReport b = cm_estimate_closed_form(model_moments({0.9, 3.45}));
  CHECK(std::abs(b.params.alpha - 0.9) < 1e-10);
  CHECK(std::abs(b.params.beta - 3.45) < 1e-10);

  CHECK_THROWS_AS(cm_estimate_closed_form(MomentVector{{0.5 - 1e-15, 0.3}}), SingularityError);
  CHECK_THROWS_AS(cm_estimate_closed_form(MomentVector{{1.2, 0.3}}), DomainError);
}

TEST_CASE("closed-form CM inversion round trip on a 5x5 grid") {
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const TransformedGumbelParams p{0.1 + 0.2 * i, 1.05 + (4.0 - 1.05) * j / 4.0};
      const EstimateReport r = cm_estimate_closed_form(model_moments(p));
      CHECK(std::abs(r.params.alpha - p.alpha) < 1e-10);
      CHECK(std::abs(r.params.beta - p.beta) < 1e-10);
    }
  }
}

TEST_CASE("closed-form CM clamps inadmissible estimates and keeps the raw values") {
  // Moments of the independence copula perturbed towards negative dependence.
  const EstimateReport r = cm_estimate_closed_form(MomentVector{{0.24, 0.105}});
  CHECK_FALSE(r.converged);
  CHECK(r.params.is_valid());
  CHECK((r.raw.alpha <= 0.0 || r.raw.beta < 1.0));
  CHECK(r.params.alpha == std::max(r.raw.alpha, 1e-6));
  CHECK(r.params.beta == std::max(r.raw.beta, 1.0));
  CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("generic CM solver") {
  const TransformedGumbelFamily family;
  Vector init(2);
  init << 1.0, 2.0;
  const EstimateReport r = cm_estimate_generic(model_moments({0.5, 1.6}), family, init);
  REQUIRE(r.converged);
  CHECK(std::abs(r.parameters[0] - 0.5) < 1e-6);
  CHECK(std::abs(r.parameters[1] - 1.6) < 1e-6);

  Vector exact(2);
  exact << 0.5, 1.6;
  const EstimateReport s = cm_estimate_generic(model_moments({0.5, 1.6}), family, exact);
  CHECK(s.converged);
  CHECK(s.iterations <= 2);

  const EstimateReport bad = cm_estimate_generic(MomentVector{{0.9, 0.1}}, family, init);
  CHECK_FALSE(bad.converged);

  // Agreement with the closed form on sample moments.
  const MomentVector m = empirical_moments(pseudo_sample(400, 3, {0.5, 1.6}), 2, CountRule::strict);
  const EstimateReport closed = cm_estimate_closed_form(m);
  const EstimateReport generic = cm_estimate_generic(m, family, init);
  if (closed.converged && generic.converged) {
    CHECK(std::abs(closed.params.alpha - generic.parameters[0]) < 1e-6);
    CHECK(std::abs(closed.params.beta - generic.parameters[1]) < 1e-6);
  }
}

TEST_CASE("generic CM solver on one-parameter families") {
  // Clayton: tau = theta / (theta + 2), M1 = (tau + 1) / 4.
  const ClaytonFamily clayton;
  const double tau = 3.0 / 5.0;
  const EstimateReport r = cm_estimate_generic(MomentVector{{(tau + 1) / 4}}, clayton, Vector::Constant(1, 1.0));
  REQUIRE(r.converged);
  CHECK(std::abs(r.parameters[0] - 3.0) < 1e-6);
  const GumbelFamily gumbel;
  const EstimateReport g = cm_estimate_generic(MomentVector{{(0.5 + 1) / 4}}, gumbel, Vector::Constant(1, 1.5));
  REQUIRE(g.converged);
  CHECK(std::abs(g.parameters[0] - 2.0) < 1e-6);
  CHECK_THROWS_AS(cm_estimate_generic(MomentVector{{0.3, 0.1}}, gumbel, Vector::Constant(1, 1.5)), DomainError);
  CHECK_THROWS_AS(cm_estimate_generic(MomentVector{{0.3}}, gumbel, Vector::Constant(1, 0.5)), DomainError);
}

TEST_CASE("tau inversion") {
  const EstimateReport a = invert_tau(0.5, {FixedParameter::Which::alpha, 0.5});
  CHECK(a.params.beta == doctest::Approx(1.6).epsilon(1e-9));
  const EstimateReport b = invert_tau(0.8, {FixedParameter::Which::beta, 3.45});
  CHECK(b.params.alpha == doctest::Approx(2.0 / (3.45 * 0.2) - 2.0).epsilon(1e-9));
  CHECK(std::abs(b.params.alpha - 0.9) < 0.01);
  CHECK_THROWS_AS(invert_tau(0.0, {FixedParameter::Which::beta, 1.0}), OutOfRangeError);
  CHECK_THROWS_AS(invert_tau(0.1, {FixedParameter::Which::alpha, 0.5}), OutOfRangeError);
  CHECK_THROWS_AS(invert_tau(1.0, {FixedParameter::Which::alpha, 0.5}), OutOfRangeError);
  const PseudoSample s = pseudo_sample(500, 4, {0.5, 1.6});
  const EstimateReport c = tau_inversion(s, {FixedParameter::Which::alpha, 0.5});
  CHECK(tau_of_params(c.params) == doctest::Approx(empirical_tau(s)).epsilon(1e-9));
}

TEST_CASE("(tau, rho) inversion round trip and range errors") {
  const TransformedGumbelParams p{0.5, 1.6};
  const EstimateReport r = invert_tau_rho(tau_of_params(p), rho_of_params(p));
  CHECK(r.converged);
  CHECK(std::abs(r.params.alpha - 0.5) < 1e-5);
  CHECK(std::abs(r.params.beta - 1.6) < 1e-5);
  CHECK_THROWS_AS(invert_tau_rho(1.0, 1.0), OutOfRangeError);
  CHECK_THROWS_AS(invert_tau_rho(-0.2, 0.1), OutOfRangeError);
}

TEST_CASE("(tau, rho) inversion outside the attainable band returns a least-squares point") {
  const TransformedGumbelParams p{0.5, 1.6};
  const EstimateReport r = invert_tau_rho(tau_of_params(p), rho_of_params(p) + 0.02);
  CHECK_FALSE(r.converged);
  CHECK(r.params.is_valid());
  CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("(tau, rho) inversion on a large sample at strong dependence") {
  const PseudoSample s = pseudo_sample(2000, 42, {0.9, 3.45});
  const EstimateReport r = tau_rho_inversion(s);
  CHECK(r.params.is_valid());
  // Monte Carlo spread of this estimator at n = 2000 is large (the reference study shows
  // rmse near 1 at n = 200); three standard deviations of roughly 0.5 / 0.6.
  CHECK(std::abs(r.params.alpha - 0.9) < 3 * 0.5);
  CHECK(std::abs(r.params.beta - 3.45) < 3 * 0.6);
}

TEST_CASE("PML: likelihood, consistency and robustness") {
  const PseudoSample s = pseudo_sample(2000, 7, {0.5, 1.6});
  CHECK(std::isfinite(pseudo_log_likelihood(s, {0.5, 1.6})));
  CHECK(pseudo_log_likelihood(s, {0.5, 1.6}) > pseudo_log_likelihood(s, {0.5, 3.0}));
  const EstimateReport r = pml_estimate(s);
  CHECK(r.converged);
  // Per-coordinate SD of PML at n = 2000 is about 0.075 / 0.05.
  CHECK(std::abs(r.params.alpha - 0.5) < 3 * 0.075);
  CHECK(std::abs(r.params.beta - 1.6) < 3 * 0.05);

  const EstimateReport far = pml_estimate(s, TransformedGumbelParams{1e6, 1.6});
  CHECK(far.params.is_valid());
  const EstimateReport invalid = pml_estimate(s, TransformedGumbelParams{-1.0, 0.5});
  CHECK(invalid.params.is_valid());
  CHECK_FALSE(invalid.diagnostics.empty());
}

TEST_CASE("estimators are invariant under increasing marginal transforms") {
  const Matrix x = raw_sample(300, 12, {0.5, 1.6});
  Matrix y = x;
  y.col(0) = x.col(0).array().log();
  y.col(1) = x.col(1).array().pow(0.3) * 5.0;
  const PseudoSample a = pseudo_observations(RawSample(x));
  const PseudoSample b = pseudo_observations(RawSample(y));
  for (Method m : {Method::cm, Method::tau_inv, Method::tau_rho_inv, Method::pml}) {
    const EstimateReport ra = fit(a, m);
    const EstimateReport rb = fit(b, m);
    CHECK(ra.raw.alpha == rb.raw.alpha);
    CHECK(ra.raw.beta == rb.raw.beta);
  }
}

TEST_CASE("asymptotic covariance") {
  const TransformedGumbelParams p{0.5, 1.6};
  const VarianceComponents vc = asymptotic_covariance(p);
  // A is minus the analytic moment gradient; check against central differences.
  const double h = 1e-6;
  const double dm1_db = (moment_closed_form(1, {0.5, 1.6 + h}) - moment_closed_form(1, {0.5, 1.6 - h})) / (2 * h);
  CHECK(std::abs(-vc.a_matrix(0, 1) - dm1_db) < 1e-8);
  CHECK((vc.sandwich - vc.sandwich.transpose()).norm() < 1e-12);
  CHECK((vc.d_matrix - vc.d_matrix.transpose()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(vc.sandwich);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_d(vc.d_matrix);
  CHECK(eig_d.eigenvalues().minCoeff() >= -1e-8);
  CHECK(vc.condition_number > 1.0);
  CHECK_THROWS_AS(asymptotic_covariance(p, 3), DomainError);
  CHECK_THROWS_AS(asymptotic_covariance({0.0, 1.6}), DomainError);

  // Standard errors at n = 500 within 25% of the reference CM RMSE (0.155, 0.117).
  const double se_a = std::sqrt(vc.sandwich(0, 0) / 500);
  const double se_b = std::sqrt(vc.sandwich(1, 1) / 500);
  CHECK(std::abs(se_a / 0.155 - 1.0) < 0.25);
  CHECK(std::abs(se_b / 0.117 - 1.0) < 0.25);

  // fit() attaches the covariance divided by n.
  const PseudoSample s = pseudo_sample(500, 8, p);
  FitOptions opts;
  opts.with_covariance = true;
  const EstimateReport r = fit(s, Method::cm, opts);
  REQUIRE(r.covariance.has_value());
  CHECK((*r.covariance)(0, 0) > 0.0);
  CHECK((*r.covariance)(1, 1) > 0.0);
}

TEST_CASE("CM consistency: error shrinks at the root-n rate") {
  const TransformedGumbelParams p{0.5, 1.6};
  std::vector<double> rmse;
  for (int n : {500, 2000, 8000}) {
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < 50; ++i) {
      const EstimateReport r = fit(pseudo_sample(n, 1000 + static_cast<std::uint64_t>(i) + 97ULL * n, p), Method::cm);
      sa += std::pow(r.raw.alpha - p.alpha, 2);
      sb += std::pow(r.raw.beta - p.beta, 2);
    }
    rmse.push_back(std::sqrt((sa + sb) / 50));
  }
  CHECK(rmse[1] < rmse[0]);
  CHECK(rmse[2] < rmse[1]);
  const double ratio = rmse[1] / rmse[0];
  CHECK(ratio >= 0.4);
  CHECK(ratio <= 0.65);
}

TEST_CASE("CM asymptotic normality: skewness and CI coverage at n = 500") {
  // Skewness is estimated from 10000 replications (sampling SE about 0.025);
  // coverage uses the first 1000.
  const TransformedGumbelParams p{0.5, 1.6};
  const VarianceComponents vc = asymptotic_covariance(p);
  const double sd[2] = {std::sqrt(vc.sandwich(0, 0) / 500), std::sqrt(vc.sandwich(1, 1) / 500)};
  constexpr int kSkewReps = 10000, kCoverageReps = 1000;
  std::vector<double> za, zb;
  for (int i = 0; i < kSkewReps; ++i) {
    const EstimateReport r = fit(pseudo_sample(500, 50'000 + static_cast<std::uint64_t>(i), p), Method::cm);
    za.push_back((r.raw.alpha - p.alpha) / sd[0]);
    zb.push_back((r.raw.beta - p.beta) / sd[1]);
  }
  for (const auto* z : {&za, &zb}) {
    const double mean = std::accumulate(z->begin(), z->end(), 0.0) / z->size();
    double m2 = 0.0, m3 = 0.0;
    for (double v : *z) {
      m2 += (v - mean) * (v - mean);
      m3 += std::pow(v - mean, 3);
    }
    m2 /= z->size();
    m3 /= z->size();
    CHECK(std::abs(m3 / std::pow(m2, 1.5)) < 0.3);
    int covered = 0;
    for (int i = 0; i < kCoverageReps; ++i) covered += std::abs((*z)[i]) <= 1.959964 ? 1 : 0;
    const double coverage = covered / static_cast<double>(kCoverageReps);
    CHECK(coverage >= 0.90);
    CHECK(coverage <= 0.98);
  }
}
