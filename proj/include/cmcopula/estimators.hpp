#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmcopula/copula.hpp"
#include "cmcopula/empirical.hpp"
#include "cmcopula/generator.hpp"
#include "cmcopula/optim.hpp"

namespace cmcopula {

enum class Method { cm, tau_inv, tau_rho_inv, pml };

const char* to_string(Method method);
/// Accepts the CLI spellings (cm, pml, taurho, tau) and the tags
/// (CM, PML, TAU_RHO_INV, TAU_INV).
std::optional<Method> parse_method(std::string_view text);

struct EstimateReport {
  Method method = Method::cm;
  /// Admissible estimate (clamped onto the parameter set when needed).
  TransformedGumbelParams params;
  /// Unclamped solver output; equals params whenever converged.
  TransformedGumbelParams raw;
  /// Solution vector for generic families; (alpha, beta) for the shipped model.
  Vector parameters;
  std::optional<MomentVector> moments_used;
  /// Asymptotic covariance of the estimate, already divided by n.
  std::optional<Eigen::Matrix2d> covariance;
  bool converged = false;
  int iterations = 0;
  SolverStatus status = SolverStatus::converged;
  std::vector<std::string> diagnostics;
};

struct VarianceComponents {
  Eigen::MatrixXd a_matrix;  // integral of the estimating-function Jacobian against dK
  Eigen::MatrixXd d_matrix;  // variance of the influence term
  Eigen::MatrixXd sandwich;  // a^-1 d a^-T
  double condition_number = 0.0;
};

/// Closed-form inversion of (M_1, M_2) for the transformed Gumbel model:
///   alpha = (8 M1 - 9 M2 - 1) / (1 - 4 M1 + 3 M2)
///   beta  = (1 - 4 M1 + 3 M2) / ((1 - 2 M1)(1 - 3 M2))
/// Estimates outside the parameter set are clamped to
/// (max(alpha, 1e-6), max(beta, 1)) with converged = false; the raw values
/// stay in `raw`. Throws SingularityError when a denominator is below 1e-12.
EstimateReport cm_estimate_closed_form(const MomentVector& moments);

/// Solves M_k(theta) = moments[k], k = 1..p, for a p-parameter family by
/// damped Newton with quadrature moments and finite-difference Jacobian.
/// Non-convergence is reported through `converged`/`status` with the best
/// iterate kept.
EstimateReport cm_estimate_generic(const MomentVector& moments, const GeneratorFamily& family,
                                   const Vector& initial, double residual_tol = 1e-9,
                                   int max_iterations = 200);

struct FixedParameter {
  enum class Which { alpha, beta };
  Which which = Which::alpha;
  double value = 0.5;
};

/// Inverts tau(alpha, beta) = tau_hat in the free parameter by bisection
/// (tolerance 1e-10). Throws OutOfRangeError when tau_hat is not attained.
EstimateReport invert_tau(double tau_hat, FixedParameter fixed);
EstimateReport tau_inversion(const PseudoSample& pseudo, FixedParameter fixed);

/// Default warm start: tau inversion with alpha held at 0.5, beta pushed
/// to at least 1.01.
TransformedGumbelParams tau_warm_start(double tau_hat);

/// Solves tau(theta) = tau_hat, rho(theta) = rho_hat. Throws OutOfRangeError
/// when tau_hat is outside (0, 1) since no admissible point matches it. When
/// rho_hat lies outside the narrow attainable band the solver returns the
/// least-squares point with converged = false.
EstimateReport invert_tau_rho(double tau_hat, double rho_hat,
                              std::optional<TransformedGumbelParams> initial = std::nullopt);
EstimateReport tau_rho_inversion(const PseudoSample& pseudo,
                                 std::optional<TransformedGumbelParams> initial = std::nullopt);

/// Pseudo log-likelihood sum_i log c(U_i1, U_i2). Coordinates equal to 1 are
/// pulled back to 1 - 1/(2n).
double pseudo_log_likelihood(const PseudoSample& pseudo, const TransformedGumbelParams& params);

/// Maximises the pseudo log-likelihood by Nelder-Mead over
/// (log alpha, log(beta - 1)); converged when the simplex diameter < 1e-8.
EstimateReport pml_estimate(const PseudoSample& pseudo,
                            std::optional<TransformedGumbelParams> initial = std::nullopt);

/// Sandwich covariance of sqrt(n)(theta_hat - theta) for the CM estimator
/// with r = 2 moments. Throws SingularityError when the Jacobian's condition
/// number exceeds 1e12.
VarianceComponents asymptotic_covariance(const TransformedGumbelParams& theta_hat, int r = 2);

struct FitOptions {
  CountRule count_rule = CountRule::strict;
  bool with_covariance = false;  // CM only
  std::optional<TransformedGumbelParams> initial;
};

/// End-to-end fit on a pseudo sample with the chosen method.
EstimateReport fit(const PseudoSample& pseudo, Method method, const FitOptions& opts = {});

}  // namespace cmcopula
