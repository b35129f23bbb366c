#include "cmcopula/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "cmcopula/error.hpp"

namespace cmcopula {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^z - 1) for z > 0.
double log_expm1(double z) {
  if (z > 30.0) return z + std::log1p(-std::exp(-z));
  return std::log(std::expm1(z));
}

// log(1 + e^w)
double softplus(double w) {
  if (w > 30.0) return w + std::log1p(std::exp(-w));
  return std::log1p(std::exp(w));
}

double log_add_exp(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

void check_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream msg;
    msg << what << " coordinate " << v << " is outside [0, 1]";
    throw DomainError(msg.str());
  }
}

// Bivariate transformed Gumbel pieces in log space. x(t) = t^-alpha - 1.
struct TgLogKernel {
  double a;
  double b;

  // log x(t) for t in (0, 1); -inf at t = 1.
  double log_x(double t) const {
    if (t >= 1.0) return kNegInf;
    return log_expm1(-a * std::log(t));
  }

  // log x(C) from log x of the coordinates.
  double log_x_of_copula(double lx1, double lx2) const {
    return log_add_exp(b * lx1, b * lx2) / b;
  }

  double cdf_from_log_x(double lxc) const {
    if (lxc == kNegInf) return 1.0;
    return std::exp(-softplus(lxc) / a);
  }

  double cdf(double u, double v) const {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    return cdf_from_log_x(log_x_of_copula(log_x(u), log_x(v)));
  }
};

}  // namespace

bool TransformedGumbelParams::is_valid() const {
  return std::isfinite(alpha) && std::isfinite(beta) && alpha > 0.0 && beta >= 1.0;
}

void TransformedGumbelParams::validate() const {
  if (!is_valid()) {
    std::ostringstream msg;
    msg << "transformed Gumbel parameters need alpha > 0 and beta >= 1, got (" << alpha << ", "
        << beta << ")";
    throw DomainError(msg.str());
  }
}

ArchimedeanCopula::ArchimedeanCopula(std::size_t dimension,
                                     std::shared_ptr<const ArchimedeanGenerator> generator)
    : dimension_(dimension), generator_(std::move(generator)) {
  if (dimension_ < 2) throw DomainError("copula dimension must be at least 2");
  if (!generator_) throw DomainError("copula needs a generator");
}

double ArchimedeanCopula::cdf(std::span<const double> u) const {
  if (u.size() != dimension_) throw DomainError("point dimension does not match the copula");
  return archimedean_cdf(u, *generator_);
}

double archimedean_cdf(std::span<const double> u, const ArchimedeanGenerator& gen) {
  double sum = 0.0;
  bool any_zero = false;
  for (double uj : u) {
    check_unit_interval(uj, "copula");
    if (uj == 0.0) any_zero = true;
    else if (uj < 1.0) sum += gen.eval(uj);
  }
  if (any_zero) return 0.0;
  return gen.inverse(sum);
}

double transformed_gumbel_cdf(std::span<const double> u, const TransformedGumbelParams& params) {
  params.validate();
  if (u.empty()) throw DomainError("copula point must have at least one coordinate");
  const TgLogKernel kernel{params.alpha, params.beta};
  bool any_zero = false;
  double acc = kNegInf;  // log sum_j x_j^beta
  for (double uj : u) {
    check_unit_interval(uj, "copula");
    if (uj == 0.0) any_zero = true;
    else acc = log_add_exp(acc, params.beta * kernel.log_x(uj));
  }
  if (any_zero) return 0.0;
  return kernel.cdf_from_log_x(acc == kNegInf ? kNegInf : acc / params.beta);
}

double moment_closed_form(int k, const TransformedGumbelParams& params) {
  if (k < 1) throw DomainError("moment order must be >= 1");
  params.validate();
  const double a = params.alpha;
  const double b = params.beta;
  const double k1 = k + 1.0;
  return (k1 * b + a * b - k) / (k1 * k1 * b + k1 * a * b);
}

std::array<double, 2> moment_gradient(int k, const TransformedGumbelParams& params) {
  if (k < 1) throw DomainError("moment order must be >= 1");
  params.validate();
  // M_k = 1/(k+1) - k / ((k+1)(k+1+alpha) beta)
  const double a = params.alpha;
  const double b = params.beta;
  const double k1 = k + 1.0;
  const double s = k1 + a;
  return {k / (k1 * s * s * b), k / (k1 * s * b * b)};
}

QuadratureResult moment_by_quadrature_detailed(int k, const ArchimedeanGenerator& gen,
                                               const QuadratureOptions& opts) {
  if (k < 1) throw DomainError("moment order must be >= 1");
  auto integrand = [&](double s) { return std::pow(s, k) * kendall_density_generic(gen, s); };
  QuadratureOptions inner = opts;
  const double tail = std::pow(kMomentLowerCut, k) * kendall_df_generic(gen, kMomentLowerCut);
  inner.abs_tol = std::max(opts.abs_tol - tail, 0.5 * opts.abs_tol);
  QuadratureResult res = integrate(integrand, kMomentLowerCut, 1.0, inner);
  res.abs_error += tail;
  if (res.abs_error > std::max(opts.abs_tol, opts.rel_tol * std::abs(res.value))) {
    std::ostringstream msg;
    msg << "moment quadrature error bound " << res.abs_error << " exceeds tolerance";
    throw QuadratureError(msg.str());
  }
  return res;
}

double moment_by_quadrature(int k, const ArchimedeanGenerator& gen, const QuadratureOptions& opts) {
  return moment_by_quadrature_detailed(k, gen, opts).value;
}

double kendall_df(double s, const ArchimedeanGenerator& gen) {
  check_unit_interval(s, "Kendall distribution");
  return gen.kendall_df(s);
}

double tau_of_params(const TransformedGumbelParams& params) {
  params.validate();
  return 1.0 - 2.0 / (params.beta * (2.0 + params.alpha));
}

double rho_of_params_adaptive(const TransformedGumbelParams& params, const QuadratureOptions& opts) {
  params.validate();
  const TgLogKernel kernel{params.alpha, params.beta};
  QuadratureOptions inner_opts = opts;
  inner_opts.abs_tol = opts.abs_tol * 0.01;

  auto outer = [&](double u) {
    const double lxu = kernel.log_x(u);
    auto inner = [&](double v) {
      return kernel.cdf_from_log_x(kernel.log_x_of_copula(lxu, kernel.log_x(v)));
    };
    return integrate(inner, 0.0, u, inner_opts).value;
  };
  const double triangle = integrate(outer, 0.0, 1.0, opts).value;
  return 24.0 * triangle - 3.0;
}

namespace {

struct TanhSinhRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Tanh-sinh nodes on (0, 1) with step h, truncated at |k h| <= 3.
TanhSinhRule tanh_sinh_rule(double h) {
  TanhSinhRule rule;
  const double half_pi = 0.5 * std::numbers::pi;
  const int m = static_cast<int>(std::lround(3.0 / h));
  for (int i = -m; i <= m; ++i) {
    const double k = i * h;
    const double q = half_pi * std::sinh(k);
    const double x = 0.5 * (1.0 + std::tanh(q));
    const double ch = std::cosh(q);
    if (!(x > 0.0 && x < 1.0)) continue;
    rule.x.push_back(x);
    rule.w.push_back(0.5 * h * half_pi * std::cosh(k) / (ch * ch));
  }
  return rule;
}

// Integral of C over the lower triangle, substituting v = u w so both
// corner singularities sit on the edges of the unit square.
double triangle_integral(const TgLogKernel& kernel, const TanhSinhRule& rule) {
  const std::size_t m = rule.x.size();
  std::vector<double> log_x(m);
  for (std::size_t i = 0; i < m; ++i) log_x[i] = kernel.log_x(rule.x[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rule.x[i];
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double lxv = kernel.log_x(u * rule.x[j]);
      row += rule.w[j] * kernel.cdf_from_log_x(kernel.log_x_of_copula(log_x[i], lxv));
    }
    total += rule.w[i] * u * row;
  }
  return total;
}

}  // namespace

double rho_of_params(const TransformedGumbelParams& params, const QuadratureOptions& opts) {
  params.validate();
  static const TanhSinhRule fine = tanh_sinh_rule(0.1);
  static const TanhSinhRule coarse = tanh_sinh_rule(0.2);
  const TgLogKernel kernel{params.alpha, params.beta};
  const double i_fine = triangle_integral(kernel, fine);
  const double i_coarse = triangle_integral(kernel, coarse);
  // Double-exponential rules square their error when h halves, so a small
  // coarse/fine gap certifies the fine value. Otherwise (near-comonotone
  // parameters) fall back to adaptive quadrature.
  if (std::isfinite(i_fine) && std::abs(i_fine - i_coarse) <= 0.1 * std::sqrt(opts.abs_tol))
    return 24.0 * i_fine - 3.0;
  return rho_of_params_adaptive(params, opts);
}

double kendall_tau_from_first_moment(double m1, int dimension) {
  if (dimension < 2) throw DomainError("dimension must be at least 2");
  const double two_d = std::ldexp(1.0, dimension);
  return (two_d * m1 - 1.0) / (two_d / 2.0 - 1.0);
}

double first_moment_from_kendall_tau(double tau, int dimension) {
  if (dimension < 2) throw DomainError("dimension must be at least 2");
  const double two_d = std::ldexp(1.0, dimension);
  return ((two_d / 2.0 - 1.0) * tau + 1.0) / two_d;
}

double spearman_rho_from_cdf_integral(double integral, int dimension) {
  if (dimension < 2) throw DomainError("dimension must be at least 2");
  const double two_d = std::ldexp(1.0, dimension);
  const double d1 = dimension + 1.0;
  return d1 / (two_d - d1) * (two_d * integral - 1.0);
}

double archimedean_density(double u, double v, const ArchimedeanGenerator& gen) {
  const double c = gen.inverse(gen.eval(u) + gen.eval(v));
  const double dc = gen.first_derivative(c);
  return -gen.second_derivative(c) * gen.first_derivative(u) * gen.first_derivative(v) /
         (dc * dc * dc);
}

double transformed_gumbel_log_density(double u, double v, const TransformedGumbelParams& params) {
  const double a = params.alpha;
  const double b = params.beta;
  const TgLogKernel kernel{a, b};
  const double log_ab = std::log(a * b);

  auto log_neg_d1 = [&](double log_t, double lx) {
    return log_ab - (a + 1.0) * log_t + (b - 1.0) * lx;
  };
  auto log_d2 = [&](double log_t, double lx) {
    double bracket = std::log(a * b + 1.0) + lx;
    if (b > 1.0) bracket = log_add_exp(bracket, std::log(a * (b - 1.0)));
    return log_ab - (a + 2.0) * log_t + (b - 2.0) * lx + bracket;
  };

  const double lxu = kernel.log_x(u);
  const double lxv = kernel.log_x(v);
  const double lxc = kernel.log_x_of_copula(lxu, lxv);
  const double log_c = -softplus(lxc) / a;

  return log_d2(log_c, lxc) + log_neg_d1(std::log(u), lxu) + log_neg_d1(std::log(v), lxv) -
         3.0 * log_neg_d1(log_c, lxc);
}

}  // namespace cmcopula
