#pragma once

#include <array>
#include <memory>
#include <span>

#include "cmcopula/generator.hpp"
#include "cmcopula/quadrature.hpp"

namespace cmcopula {

/// Parameter point of the transformed Gumbel copula
/// C(u) = ((sum_j (u_j^-alpha - 1)^beta)^(1/beta) + 1)^(-1/alpha).
/// Admissible set: alpha in (0, inf), beta in [1, inf).
struct TransformedGumbelParams {
  double alpha = 0.5;
  double beta = 1.6;

  bool is_valid() const;
  /// Throws DomainError when the point is not admissible.
  void validate() const;
  TransformedGumbelGenerator generator() const { return {alpha, beta}; }

  friend bool operator==(const TransformedGumbelParams&, const TransformedGumbelParams&) = default;
};

/// An Archimedean copula of fixed dimension built on a shared generator.
class ArchimedeanCopula {
 public:
  ArchimedeanCopula(std::size_t dimension, std::shared_ptr<const ArchimedeanGenerator> generator);

  std::size_t dimension() const { return dimension_; }
  const ArchimedeanGenerator& generator() const { return *generator_; }

  /// inverse(sum_j eval(u_j)); throws DomainError outside the unit cube.
  double cdf(std::span<const double> u) const;

 private:
  std::size_t dimension_;
  std::shared_ptr<const ArchimedeanGenerator> generator_;
};

/// Direct evaluation of the transformed Gumbel copula, computed in log space so
/// large beta does not overflow. Returns 0 when any coordinate is 0.
double transformed_gumbel_cdf(std::span<const double> u, const TransformedGumbelParams& params);

/// Same copula evaluated through the generator composition.
double archimedean_cdf(std::span<const double> u, const ArchimedeanGenerator& gen);

/// k-th copula moment E[C(U)^k] of the bivariate transformed Gumbel copula,
/// ((k+1)beta + alpha beta - k) / ((k+1)^2 beta + (k+1) alpha beta).
double moment_closed_form(int k, const TransformedGumbelParams& params);

/// Gradient of moment_closed_form with respect to (alpha, beta).
std::array<double, 2> moment_gradient(int k, const TransformedGumbelParams& params);

/// k-th copula moment as the integral of s^k against the Kendall density
/// eval * second_derivative / first_derivative^2. Integrates over
/// [kMomentLowerCut, 1]; the omitted mass is bounded by cut^k K(cut) and
/// added to the reported error.
QuadratureResult moment_by_quadrature_detailed(int k, const ArchimedeanGenerator& gen,
                                               const QuadratureOptions& opts = {});
double moment_by_quadrature(int k, const ArchimedeanGenerator& gen,
                            const QuadratureOptions& opts = {});

inline constexpr double kMomentLowerCut = 1e-10;

/// Kendall distribution K(s) = P(C(U) <= s); throws DomainError for s outside [0, 1].
double kendall_df(double s, const ArchimedeanGenerator& gen);

/// Kendall's tau of the bivariate transformed Gumbel copula, 1 - 2 / (beta (2 + alpha)).
double tau_of_params(const TransformedGumbelParams& params);

/// Spearman's rho of the bivariate transformed Gumbel copula,
/// 12 * integral of C over the unit square - 3, integrated over the lower
/// triangle (the copula is exchangeable). A fixed tensor tanh-sinh rule is
/// used when its step-halving check passes; otherwise nested adaptive
/// quadrature to opts.abs_tol.
double rho_of_params(const TransformedGumbelParams& params,
                     const QuadratureOptions& opts = {.abs_tol = 1e-10});
/// The nested adaptive Gauss-Kronrod path alone.
double rho_of_params_adaptive(const TransformedGumbelParams& params,
                              const QuadratureOptions& opts = {.abs_tol = 1e-10});

/// Multivariate concordance functionals in terms of copula integrals.
/// tau = (2^d M1 - 1) / (2^(d-1) - 1) where M1 = E[C(U)].
double kendall_tau_from_first_moment(double m1, int dimension);
double first_moment_from_kendall_tau(double tau, int dimension);
/// rho = (d+1) / (2^d - (d+1)) * (2^d * integral of C du - 1).
double spearman_rho_from_cdf_integral(double integral, int dimension);

/// Bivariate Archimedean density
/// -second_derivative(C) first_derivative(u) first_derivative(v) / first_derivative(C)^3.
double archimedean_density(double u, double v, const ArchimedeanGenerator& gen);

/// Log-density of the bivariate transformed Gumbel copula, fully in log space.
/// Requires u, v in (0, 1); returns -inf when the density underflows.
double transformed_gumbel_log_density(double u, double v, const TransformedGumbelParams& params);

}  // namespace cmcopula
