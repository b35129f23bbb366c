#include "cmcopula/generator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cmcopula/error.hpp"

namespace cmcopula {

double kendall_df_generic(const ArchimedeanGenerator& gen, double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s - gen.eval(s) / gen.first_derivative(s);
}

double kendall_density_generic(const ArchimedeanGenerator& gen, double s) {
  const double d1 = gen.first_derivative(s);
  return gen.second_derivative(s) * gen.eval(s) / (d1 * d1);
}

double ArchimedeanGenerator::kendall_df(double s) const { return kendall_df_generic(*this, s); }

double ArchimedeanGenerator::kendall_density(double s) const {
  return kendall_density_generic(*this, s);
}

// ---------------------------------------------------------------------------

TransformedGumbelGenerator::TransformedGumbelGenerator(double alpha, double beta)
    : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0.0) || !(beta >= 1.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    std::ostringstream msg;
    msg << "transformed Gumbel generator needs alpha > 0 and beta >= 1, got (" << alpha << ", "
        << beta << ")";
    throw DomainError(msg.str());
  }
}

double TransformedGumbelGenerator::eval(double t) const {
  const double x = std::expm1(-alpha_ * std::log(t));
  return std::pow(x, beta_);
}

double TransformedGumbelGenerator::first_derivative(double t) const {
  const double x = std::expm1(-alpha_ * std::log(t));
  return -alpha_ * beta_ * std::pow(t, -alpha_ - 1.0) * std::pow(x, beta_ - 1.0);
}

double TransformedGumbelGenerator::second_derivative(double t) const {
  const double x = std::expm1(-alpha_ * std::log(t));
  const double ab = alpha_ * beta_;
  double bracket = (ab + 1.0) * std::pow(x, beta_ - 1.0);
  if (beta_ != 1.0) bracket += alpha_ * (beta_ - 1.0) * std::pow(x, beta_ - 2.0);
  return ab * std::pow(t, -alpha_ - 2.0) * bracket;
}

double TransformedGumbelGenerator::inverse(double y) const {
  if (y <= 0.0) return 1.0;
  if (std::isinf(y)) return 0.0;
  return std::exp(-std::log1p(std::pow(y, 1.0 / beta_)) / alpha_);
}

double TransformedGumbelGenerator::kendall_df(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  // s - s^(alpha+1) written as -s * expm1(alpha ln s) to avoid cancellation near 1.
  const double gap = -s * std::expm1(alpha_ * std::log(s));
  return s + gap / (alpha_ * beta_);
}

double TransformedGumbelGenerator::kendall_density(double s) const {
  return 1.0 + (1.0 - (alpha_ + 1.0) * std::pow(s, alpha_)) / (alpha_ * beta_);
}

// ---------------------------------------------------------------------------

GumbelGenerator::GumbelGenerator(double beta) : beta_(beta) {
  if (!(beta >= 1.0) || !std::isfinite(beta))
    throw DomainError("Gumbel generator needs beta >= 1");
}

double GumbelGenerator::eval(double t) const { return std::pow(-std::log(t), beta_); }

double GumbelGenerator::first_derivative(double t) const {
  return -beta_ * std::pow(-std::log(t), beta_ - 1.0) / t;
}

double GumbelGenerator::second_derivative(double t) const {
  const double l = -std::log(t);
  double out = beta_ * std::pow(l, beta_ - 1.0);
  if (beta_ != 1.0) out += beta_ * (beta_ - 1.0) * std::pow(l, beta_ - 2.0);
  return out / (t * t);
}

double GumbelGenerator::inverse(double y) const {
  if (y <= 0.0) return 1.0;
  return std::exp(-std::pow(y, 1.0 / beta_));
}

// ---------------------------------------------------------------------------

ClaytonGenerator::ClaytonGenerator(double theta) : theta_(theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DomainError("Clayton generator needs theta > 0");
}

double ClaytonGenerator::eval(double t) const {
  return std::expm1(-theta_ * std::log(t)) / theta_;
}

double ClaytonGenerator::first_derivative(double t) const {
  return -std::pow(t, -theta_ - 1.0);
}

double ClaytonGenerator::second_derivative(double t) const {
  return (theta_ + 1.0) * std::pow(t, -theta_ - 2.0);
}

double ClaytonGenerator::inverse(double y) const {
  if (y <= 0.0) return 1.0;
  if (std::isinf(y)) return 0.0;
  return std::exp(-std::log1p(theta_ * y) / theta_);
}

// ---------------------------------------------------------------------------

namespace {

void require_size(std::span<const double> params, std::size_t n, const char* family) {
  if (params.size() != n) {
    std::ostringstream msg;
    msg << family << " family takes " << n << " parameter(s), got " << params.size();
    throw DomainError(msg.str());
  }
}

}  // namespace

std::unique_ptr<ArchimedeanGenerator> TransformedGumbelFamily::make(
    std::span<const double> params) const {
  require_size(params, 2, "transformed Gumbel");
  return std::make_unique<TransformedGumbelGenerator>(params[0], params[1]);
}

std::unique_ptr<ArchimedeanGenerator> GumbelFamily::make(std::span<const double> params) const {
  require_size(params, 1, "Gumbel");
  return std::make_unique<GumbelGenerator>(params[0]);
}

std::unique_ptr<ArchimedeanGenerator> ClaytonFamily::make(std::span<const double> params) const {
  require_size(params, 1, "Clayton");
  return std::make_unique<ClaytonGenerator>(params[0]);
}

}  // namespace cmcopula
