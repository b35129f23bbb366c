#include "cmcopula/sampling.hpp"

#include <cmath>
#include <sstream>

#include "cmcopula/error.hpp"

namespace cmcopula {

double kendall_quantile(double t, const ArchimedeanGenerator& gen) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("Kendall quantile level must lie in [0, 1]");
  double lo = 1e-12;
  double hi = 1.0;
  const double k_lo = gen.kendall_df(lo);
  const double k_hi = gen.kendall_df(hi);
  if (!std::isfinite(k_lo) || !std::isfinite(k_hi) || k_lo > k_hi) {
    std::ostringstream msg;
    msg << "Kendall distribution of " << gen.name() << " is not invertible";
    throw ConvergenceError(msg.str());
  }
  if (t <= k_lo) return lo;
  if (t >= k_hi) return hi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double k = gen.kendall_df(mid);
    if (!std::isfinite(k)) throw ConvergenceError("Kendall distribution is not finite during bisection");
    (k < t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Matrix sample_archimedean_bivariate(const ArchimedeanGenerator& gen, Eigen::Index n, SeededRng& rng) {
  if (n < 1) throw DomainError("sample size must be >= 1");
  Matrix out(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = rng.uniform();
    const double t = rng.uniform();
    const double w = kendall_quantile(t, gen);
    const double phi_w = gen.eval(w);
    out(i, 0) = gen.inverse(s * phi_w);
    out(i, 1) = gen.inverse((1.0 - s) * phi_w);
  }
  return out;
}

}  // namespace cmcopula
