#include "cmcopula/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmcopula/error.hpp"

namespace cmcopula {

const char* to_string(Method method) {
  switch (method) {
    case Method::cm: return "CM";
    case Method::tau_inv: return "TAU_INV";
    case Method::tau_rho_inv: return "TAU_RHO_INV";
    case Method::pml: return "PML";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view text) {
  if (text == "cm" || text == "CM") return Method::cm;
  if (text == "pml" || text == "PML") return Method::pml;
  if (text == "taurho" || text == "TAU_RHO_INV") return Method::tau_rho_inv;
  if (text == "tau" || text == "TAU_INV") return Method::tau_inv;
  return std::nullopt;
}

namespace {

constexpr double kAlphaFloor = 1e-6;
constexpr double kDenominatorFloor = 1e-12;

Vector as_vector(const TransformedGumbelParams& p) {
  Vector v(2);
  v << p.alpha, p.beta;
  return v;
}

std::string describe(const TransformedGumbelParams& p) {
  std::ostringstream out;
  out.precision(10);
  out << "(alpha=" << p.alpha << ", beta=" << p.beta << ")";
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Copula-moment estimation

EstimateReport cm_estimate_closed_form(const MomentVector& moments) {
  if (moments.size() < 2) throw DomainError("closed-form CM estimation needs M1 and M2");
  const double m1 = moments.moment(1);
  const double m2 = moments.moment(2);
  if (!(m1 > 0.0 && m1 < 1.0) || !(m2 > 0.0 && m2 < 1.0))
    throw DomainError("empirical moments must lie in (0, 1)");

  const double shared = 1.0 - 4.0 * m1 + 3.0 * m2;
  const double left = 1.0 - 2.0 * m1;
  const double right = 1.0 - 3.0 * m2;
  if (std::abs(shared) < kDenominatorFloor || std::abs(left) < kDenominatorFloor ||
      std::abs(right) < kDenominatorFloor)
    throw SingularityError("moment system is singular (degenerate dependence)");

  EstimateReport rep;
  rep.method = Method::cm;
  rep.raw = {(8.0 * m1 - 9.0 * m2 - 1.0) / shared, shared / (left * right)};
  rep.moments_used = MomentVector{{m1, m2}};
  rep.converged = rep.raw.alpha > 0.0 && rep.raw.beta >= 1.0;
  rep.params = rep.raw;
  if (!rep.converged) {
    rep.params = {std::max(rep.raw.alpha, kAlphaFloor), std::max(rep.raw.beta, 1.0)};
    rep.diagnostics.push_back("raw estimate " + describe(rep.raw) +
                              " outside the parameter set; clamped to " + describe(rep.params));
  }
  rep.parameters = as_vector(rep.params);
  return rep;
}

EstimateReport cm_estimate_generic(const MomentVector& moments, const GeneratorFamily& family,
                                   const Vector& initial, double residual_tol,
                                   int max_iterations) {
  const std::size_t p = family.parameter_count();
  if (moments.size() != p)
    throw DomainError("number of moments must equal the number of family parameters");
  if (static_cast<std::size_t>(initial.size()) != p)
    throw DomainError("initial point has the wrong dimension");

  NewtonOptions opts;
  opts.residual_tol = residual_tol;
  opts.max_iterations = max_iterations;
  const auto lo = family.lower_bounds();
  const auto hi = family.upper_bounds();
  opts.lower = Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  opts.upper = Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  for (Eigen::Index i = 0; i < initial.size(); ++i)
    if (!(initial[i] >= opts.lower[i] && initial[i] <= opts.upper[i]))
      throw DomainError("initial point is outside the family's parameter set");

  const QuadratureOptions quad{.abs_tol = 1e-12};
  auto residual = [&](const Vector& theta) {
    const auto gen = family.make(std::span<const double>(theta.data(), p));
    Vector r(static_cast<Eigen::Index>(p));
    try {
      for (std::size_t k = 1; k <= p; ++k)
        r[static_cast<Eigen::Index>(k - 1)] =
            moment_by_quadrature(static_cast<int>(k), *gen, quad) - moments.moment(static_cast<int>(k));
    } catch (const QuadratureError&) {
      // Unusable trial point: a NaN residual makes the solver reject the step.
      r.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    return r;
  };

  const NewtonResult sol = solve_damped_newton(residual, initial, opts);

  EstimateReport rep;
  rep.method = Method::cm;
  rep.parameters = sol.x;
  rep.moments_used = moments;
  rep.converged = sol.converged();
  rep.iterations = sol.iterations;
  rep.status = sol.status;
  if (p == 2) {
    rep.params = {sol.x[0], sol.x[1]};
    rep.raw = rep.params;
  }
  if (!rep.converged) {
    std::ostringstream msg;
    msg << family.name() << " moment system not solved (" << to_string(sol.status)
        << ", residual " << sol.residual_norm << ")";
    rep.diagnostics.push_back(msg.str());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Concordance inversion

EstimateReport invert_tau(double tau_hat, FixedParameter fixed) {
  if (!std::isfinite(fixed.value)) throw DomainError("fixed parameter must be finite");
  const bool hold_alpha = fixed.which == FixedParameter::Which::alpha;
  if (hold_alpha && !(fixed.value > 0.0)) throw DomainError("fixed alpha must be > 0");
  if (!hold_alpha && !(fixed.value >= 1.0)) throw DomainError("fixed beta must be >= 1");

  auto tau_at = [&](double free) {
    return hold_alpha ? 1.0 - 2.0 / (free * (2.0 + fixed.value))
                      : 1.0 - 2.0 / (fixed.value * (2.0 + free));
  };
  // Profiled map is increasing in the free parameter; its image is
  // [tau_at(1), 1) for free beta and (1 - 1/beta, 1) for free alpha.
  double lo = hold_alpha ? 1.0 : 0.0;
  const double floor_tau = tau_at(lo);
  const bool in_range = hold_alpha ? (tau_hat >= floor_tau && tau_hat < 1.0)
                                   : (tau_hat > floor_tau && tau_hat < 1.0);
  if (!in_range) {
    std::ostringstream msg;
    msg << "tau " << tau_hat << " is not attainable with " << (hold_alpha ? "alpha" : "beta")
        << " fixed at " << fixed.value;
    throw OutOfRangeError(msg.str());
  }

  double hi = lo + 1.0;
  while (tau_at(hi) < tau_hat) {
    hi *= 2.0;
    if (hi > 1e15) throw OutOfRangeError("tau inversion bracket diverged");
  }
  int iterations = 0;
  while (hi - lo > 1e-10 * std::max(1.0, lo) && iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    (tau_at(mid) < tau_hat ? lo : hi) = mid;
    ++iterations;
  }
  const double free = 0.5 * (lo + hi);

  EstimateReport rep;
  rep.method = Method::tau_inv;
  rep.params = hold_alpha ? TransformedGumbelParams{fixed.value, free}
                          : TransformedGumbelParams{free, fixed.value};
  rep.raw = rep.params;
  rep.parameters = as_vector(rep.params);
  rep.converged = true;
  rep.iterations = iterations;
  return rep;
}

EstimateReport tau_inversion(const PseudoSample& pseudo, FixedParameter fixed) {
  return invert_tau(empirical_tau(pseudo), fixed);
}

TransformedGumbelParams tau_warm_start(double tau_hat) {
  constexpr double alpha = 0.5;
  double beta = 1.01;
  if (tau_hat > 0.0 && tau_hat < 1.0) beta = std::max(beta, 2.0 / ((1.0 - tau_hat) * (2.0 + alpha)));
  return {alpha, beta};
}

EstimateReport invert_tau_rho(double tau_hat, double rho_hat,
                              std::optional<TransformedGumbelParams> initial) {
  if (!(tau_hat > 0.0 && tau_hat < 1.0)) {
    std::ostringstream msg;
    msg << "tau " << tau_hat << " is outside (0, 1), the image of the model";
    throw OutOfRangeError(msg.str());
  }
  if (!(rho_hat > -1.0 && rho_hat < 1.0)) {
    std::ostringstream msg;
    msg << "rho " << rho_hat << " is outside (-1, 1)";
    throw OutOfRangeError(msg.str());
  }
  TransformedGumbelParams start = initial.value_or(tau_warm_start(tau_hat));
  if (!start.is_valid()) throw DomainError("initial point is outside the parameter set");

  const QuadratureOptions quad{.abs_tol = 1e-11};
  auto residual = [&](const Vector& theta) {
    const TransformedGumbelParams p{theta[0], theta[1]};
    Vector r(2);
    r << tau_of_params(p) - tau_hat, rho_of_params(p, quad) - rho_hat;
    return r;
  };

  NewtonOptions opts;
  opts.residual_tol = 1e-8;
  opts.max_iterations = 60;
  // Outside the thin attainable band the least-squares valley is nearly flat;
  // stop once five iterations gain less than 1%.
  opts.stall_window = 5;
  opts.stall_relative_decrease = 1e-2;
  opts.lower = Vector(2);
  opts.lower << kAlphaFloor, 1.0;
  opts.upper = Vector(2);
  opts.upper << 1e3, 1e3;

  // tau is closed form; only the rho row needs finite differences.
  MatrixFunction jacobian = [&](const Vector& theta) {
    const double a = theta[0];
    const double b = theta[1];
    Eigen::MatrixXd jac(2, 2);
    jac(0, 0) = 2.0 / (b * (2.0 + a) * (2.0 + a));
    jac(0, 1) = 2.0 / (b * b * (2.0 + a));
    auto rho_only = [&](const Vector& x) {
      Vector out(1);
      out[0] = rho_of_params({x[0], x[1]}, quad);
      return out;
    };
    jac.row(1) = finite_difference_jacobian(rho_only, theta, 1e-5, opts.lower, opts.upper);
    return jac;
  };

  const NewtonResult sol = solve_damped_newton(residual, as_vector(start), opts, jacobian);

  EstimateReport rep;
  rep.method = Method::tau_rho_inv;
  rep.params = {sol.x[0], sol.x[1]};
  rep.raw = rep.params;
  rep.parameters = sol.x;
  rep.converged = sol.converged();
  rep.iterations = sol.iterations;
  rep.status = sol.status;
  if (!rep.converged) {
    std::ostringstream msg;
    msg << "(tau, rho) = (" << tau_hat << ", " << rho_hat
        << ") not matched exactly (" << to_string(sol.status) << ", residual "
        << sol.residual_norm << "); least-squares point returned";
    rep.diagnostics.push_back(msg.str());
  }
  return rep;
}

EstimateReport tau_rho_inversion(const PseudoSample& pseudo,
                                 std::optional<TransformedGumbelParams> initial) {
  return invert_tau_rho(empirical_tau(pseudo), empirical_rho(pseudo), initial);
}

// ---------------------------------------------------------------------------
// Pseudo maximum likelihood

namespace {

std::vector<std::pair<double, double>> pulled_back_points(const PseudoSample& pseudo) {
  if (pseudo.d() != 2) throw DomainError("PML is implemented for d = 2");
  const double top = 1.0 - 1.0 / (2.0 * static_cast<double>(pseudo.n()));
  std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(pseudo.n()));
  for (Eigen::Index i = 0; i < pseudo.n(); ++i)
    pts[static_cast<std::size_t>(i)] = {std::min(pseudo.u()(i, 0), top),
                                        std::min(pseudo.u()(i, 1), top)};
  return pts;
}

double log_likelihood(const std::vector<std::pair<double, double>>& pts,
                      const TransformedGumbelParams& params, int* non_finite) {
  double sum = 0.0;
  for (const auto& [u, v] : pts) {
    const double l = transformed_gumbel_log_density(u, v, params);
    if (!std::isfinite(l)) {
      if (non_finite) ++*non_finite;
      return -std::numeric_limits<double>::infinity();
    }
    sum += l;
  }
  return sum;
}

}  // namespace

double pseudo_log_likelihood(const PseudoSample& pseudo, const TransformedGumbelParams& params) {
  params.validate();
  return log_likelihood(pulled_back_points(pseudo), params, nullptr);
}

EstimateReport pml_estimate(const PseudoSample& pseudo,
                            std::optional<TransformedGumbelParams> initial) {
  const auto pts = pulled_back_points(pseudo);
  EstimateReport rep;
  rep.method = Method::pml;

  int non_finite = 0;
  auto to_params = [](const Vector& y) {
    return TransformedGumbelParams{std::exp(y[0]), 1.0 + std::exp(y[1])};
  };
  auto objective = [&](const Vector& y) {
    const TransformedGumbelParams p = to_params(y);
    if (!p.is_valid()) return std::numeric_limits<double>::infinity();
    return -log_likelihood(pts, p, &non_finite);
  };
  auto to_search = [](const TransformedGumbelParams& p) {
    Vector y(2);
    y << std::log(p.alpha), std::log(std::max(p.beta - 1.0, 1e-2));
    return y;
  };

  TransformedGumbelParams start = initial.value_or(tau_warm_start(empirical_tau(pseudo)));
  Vector y0;
  if (start.is_valid()) {
    y0 = to_search(start);
    if (!std::isfinite(objective(y0))) {
      rep.diagnostics.push_back("log-likelihood not finite at " + describe(start) +
                                "; restarting from the tau warm start");
      y0 = to_search(tau_warm_start(empirical_tau(pseudo)));
    }
  } else {
    rep.diagnostics.push_back("initial point " + describe(start) +
                              " outside the parameter set; using the tau warm start");
    y0 = to_search(tau_warm_start(empirical_tau(pseudo)));
  }

  const NelderMeadResult nm = nelder_mead(objective, y0);
  rep.params = to_params(nm.x);
  rep.raw = rep.params;
  rep.parameters = as_vector(rep.params);
  rep.iterations = nm.evaluations;
  rep.converged = nm.converged && std::isfinite(nm.value);
  rep.status = rep.converged ? SolverStatus::converged : SolverStatus::max_iterations;
  if (non_finite > 0)
    rep.diagnostics.push_back(std::to_string(non_finite) +
                              " log-likelihood evaluations were not finite");
  if (!rep.converged) rep.diagnostics.push_back("simplex did not contract below 1e-8");
  return rep;
}

// ---------------------------------------------------------------------------
// Asymptotic covariance

VarianceComponents asymptotic_covariance(const TransformedGumbelParams& theta_hat, int r) {
  theta_hat.validate();
  if (r != 2) throw DomainError("the transformed Gumbel CM estimator uses exactly r = 2 moments");
  const TransformedGumbelGenerator gen = theta_hat.generator();

  VarianceComponents out;
  out.a_matrix.resize(r, r);
  for (int k = 1; k <= r; ++k) {
    const auto grad = moment_gradient(k, theta_hat);
    out.a_matrix(k - 1, 0) = -grad[0];
    out.a_matrix(k - 1, 1) = -grad[1];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.a_matrix);
  const auto sv = svd.singularValues();
  out.condition_number = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                                 : std::numeric_limits<double>::infinity();
  if (!(out.condition_number <= 1e12))
    throw SingularityError("moment Jacobian is singular at " + describe(theta_hat));

  const QuadratureOptions inner{.abs_tol = 1e-12};
  const QuadratureOptions outer{.abs_tol = 1e-10};
  // Influence of a uniform xi on the k-th estimating equation, up to a constant:
  // xi^k + integral_xi^1 k t^(k-1) dK(t).
  auto influence = [&](int k, double xi) {
    auto g = [&](double t) { return k * std::pow(t, k - 1) * gen.kendall_density(t); };
    return std::pow(xi, k) + integrate(g, xi, 1.0, inner).value;
  };
  std::vector<double> mean(static_cast<std::size_t>(r));
  for (int k = 1; k <= r; ++k)
    mean[static_cast<std::size_t>(k - 1)] =
        integrate([&](double xi) { return influence(k, xi); }, 0.0, 1.0, outer).value;

  out.d_matrix.resize(r, r);
  for (int k = 1; k <= r; ++k) {
    for (int l = k; l <= r; ++l) {
      const double mk = mean[static_cast<std::size_t>(k - 1)];
      const double ml = mean[static_cast<std::size_t>(l - 1)];
      const double cov = integrate(
                             [&](double xi) {
                               return (influence(k, xi) - mk) * (influence(l, xi) - ml);
                             },
                             0.0, 1.0, outer)
                             .value;
      out.d_matrix(k - 1, l - 1) = cov;
      out.d_matrix(l - 1, k - 1) = cov;
    }
  }

  const Eigen::MatrixXd a_inv = out.a_matrix.inverse();
  const Eigen::MatrixXd s = a_inv * out.d_matrix * a_inv.transpose();
  out.sandwich = 0.5 * (s + s.transpose());
  return out;
}

// ---------------------------------------------------------------------------

EstimateReport fit(const PseudoSample& pseudo, Method method, const FitOptions& opts) {
  switch (method) {
    case Method::cm: {
      EstimateReport rep = cm_estimate_closed_form(empirical_moments(pseudo, 2, opts.count_rule));
      if (opts.with_covariance) {
        const VarianceComponents vc = asymptotic_covariance(rep.params);
        rep.covariance = Eigen::Matrix2d(vc.sandwich / static_cast<double>(pseudo.n()));
      }
      return rep;
    }
    case Method::tau_inv:
      return tau_inversion(pseudo, {FixedParameter::Which::alpha,
                                    opts.initial ? opts.initial->alpha : 0.5});
    case Method::tau_rho_inv:
      return tau_rho_inversion(pseudo, opts.initial);
    case Method::pml:
      return pml_estimate(pseudo, opts.initial);
  }
  throw DomainError("unknown estimation method");
}

}  // namespace cmcopula
