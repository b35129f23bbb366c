#include "cmcopula/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "cmcopula/error.hpp"

namespace cmcopula {

namespace {

// Kronrod abscissae; odd indices are the embedded 7-point Gauss nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace

QuadratureResult gauss_kronrod15(const std::function<double(double)>& f, double a,
                                 double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  const double f_center = f(center);
  double res_gauss = f_center * kWg[3];
  double res_kronrod = f_center * kWgk[7];
  double res_abs = std::abs(res_kronrod);
  double f1[7];
  double f2[7];

  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double lo = f(center - dx);
    const double hi = f(center + dx);
    f1[j] = lo;
    f2[j] = hi;
    res_kronrod += kWgk[j] * (lo + hi);
    res_abs += kWgk[j] * (std::abs(lo) + std::abs(hi));
    if (j % 2 == 1) res_gauss += kWg[j / 2] * (lo + hi);
  }

  const double mean = res_kronrod * 0.5;
  double res_asc = kWgk[7] * std::abs(f_center - mean);
  for (int j = 0; j < 7; ++j)
    res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  QuadratureResult out;
  out.value = res_kronrod * half;
  res_abs *= abs_half;
  res_asc *= abs_half;
  double err = std::abs((res_kronrod - res_gauss) * half);
  if (res_asc != 0.0 && err != 0.0)
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * res_abs, err);
  out.abs_error = err;
  out.evaluations = 15;
  return out;
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
  QuadratureResult first = gauss_kronrod15(f, a, b);
  if (!std::isfinite(first.value))
    throw QuadratureError("integrand is not finite on the integration interval");

  std::priority_queue<Panel> panels;
  panels.push({a, b, first.value, first.abs_error});
  double total = first.value;
  double total_err = first.abs_error;
  int evaluations = first.evaluations;

  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };

  int subdivisions = 0;
  while (total_err > target()) {
    if (subdivisions >= opts.max_subdivisions) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not reach tolerance " << target() << " after "
          << subdivisions << " subdivisions (estimate " << total_err << ")";
      throw QuadratureError(msg.str());
    }
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval exhausted at machine precision; accept what we have.
      panels.push(worst);
      break;
    }
    const QuadratureResult left = gauss_kronrod15(f, worst.a, mid);
    const QuadratureResult right = gauss_kronrod15(f, mid, worst.b);
    evaluations += left.evaluations + right.evaluations;
    if (!std::isfinite(left.value) || !std::isfinite(right.value))
      throw QuadratureError("integrand is not finite on the integration interval");
    total += left.value + right.value - worst.value;
    total_err += left.abs_error + right.abs_error - worst.error;
    panels.push({worst.a, mid, left.value, left.abs_error});
    panels.push({mid, worst.b, right.value, right.abs_error});
    ++subdivisions;
  }

  // Re-sum to remove drift from the incremental updates.
  double sum = 0.0;
  double err = 0.0;
  std::vector<Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const Panel& p : all) {
    sum += p.value;
    err += p.error;
  }
  return {sum, err, evaluations};
}

}  // namespace cmcopula
