#include "cmcopula/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace cmcopula {

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iterations: return "max_iterations";
    case SolverStatus::stalled: return "stalled";
    case SolverStatus::singular_jacobian: return "singular_jacobian";
  }
  return "unknown";
}

namespace {

Vector project(const Vector& x, const Vector& lower, const Vector& upper) {
  Vector out = x;
  if (lower.size() == x.size()) out = out.cwiseMax(lower);
  if (upper.size() == x.size()) out = out.cwiseMin(upper);
  return out;
}

double squared(const Vector& r) {
  return r.allFinite() ? r.squaredNorm() : std::numeric_limits<double>::infinity();
}

}  // namespace

Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f, const Vector& x,
                                           double rel_step, const Vector& lower,
                                           const Vector& upper) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    double lo = x[i] - h;
    double hi = x[i] + h;
    if (lower.size() == n) lo = std::max(lo, lower[i]);
    if (upper.size() == n) hi = std::min(hi, upper[i]);
    Vector xl = x;
    Vector xh = x;
    xl[i] = lo;
    xh[i] = hi;
    const Vector fl = f(xl);
    const Vector fh = f(xh);
    if (jac.size() == 0) jac.resize(fl.size(), n);
    jac.col(i) = (fh - fl) / (hi - lo);
  }
  return jac;
}

NewtonResult solve_damped_newton(const VectorFunction& f, const Vector& x0,
                                 const NewtonOptions& opts,
                                 const std::optional<MatrixFunction>& jacobian) {
  NewtonResult res;
  res.x = project(x0, opts.lower, opts.upper);
  res.residual = f(res.x);
  double fx = squared(res.residual);
  double lambda = 0.0;
  std::vector<double> history{fx};

  for (;;) {
    res.residual_norm = res.residual.allFinite() ? res.residual.lpNorm<Eigen::Infinity>()
                                                 : std::numeric_limits<double>::infinity();
    if (res.residual_norm < opts.residual_tol) {
      res.status = SolverStatus::converged;
      return res;
    }
    if (res.iterations >= opts.max_iterations) {
      res.status = SolverStatus::max_iterations;
      return res;
    }
    ++res.iterations;

    const Eigen::MatrixXd jac =
        jacobian ? (*jacobian)(res.x)
                 : finite_difference_jacobian(f, res.x, opts.fd_step, opts.lower, opts.upper);
    if (!jac.allFinite() || jac.isZero(0.0)) {
      res.status = SolverStatus::singular_jacobian;
      return res;
    }

    bool accepted = false;
    Vector next_x;
    Vector next_r;
    double next_f = fx;

    // Plain Newton direction with backtracking.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (jac.rows() == jac.cols() && lu.isInvertible()) {
      const Vector step = lu.solve(-res.residual);
      if (step.allFinite()) {
        double t = 1.0;
        for (int halving = 0; halving < 12 && !accepted; ++halving, t *= 0.5) {
          next_x = project(res.x + t * step, opts.lower, opts.upper);
          next_r = f(next_x);
          next_f = squared(next_r);
          accepted = next_f < (1.0 - 1e-4 * t) * fx;
        }
      }
    }

    // Levenberg-Marquardt fallback.
    if (!accepted) {
      const Eigen::MatrixXd jtj = jac.transpose() * jac;
      const Vector grad = jac.transpose() * res.residual;
      const Vector scale = jtj.diagonal().cwiseMax(1e-300);
      if (lambda == 0.0) lambda = 1e-3;
      for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
        Eigen::MatrixXd damped = jtj;
        damped.diagonal() += lambda * scale;
        const Vector step = damped.ldlt().solve(-grad);
        if (step.allFinite()) {
          next_x = project(res.x + step, opts.lower, opts.upper);
          next_r = f(next_x);
          next_f = squared(next_r);
          accepted = next_f < fx;
        }
        if (!accepted) lambda *= 4.0;
      }
      if (accepted) lambda = std::max(lambda / 3.0, 1e-12);
    }

    if (!accepted) {
      res.status = SolverStatus::stalled;
      return res;
    }

    const double step_size = (next_x - res.x).lpNorm<Eigen::Infinity>();
    const bool negligible = step_size <= 1e-14 * (1.0 + res.x.lpNorm<Eigen::Infinity>()) &&
                            fx - next_f <= 1e-15 * fx;
    res.x = next_x;
    res.residual = next_r;
    fx = next_f;
    history.push_back(fx);
    const auto window = static_cast<std::size_t>(std::max(opts.stall_window, 0));
    const bool slow = window > 0 && history.size() > window &&
                      fx > (1.0 - opts.stall_relative_decrease) * history[history.size() - 1 - window];
    if (negligible || slow) {
      res.residual_norm = res.residual.lpNorm<Eigen::Infinity>();
      res.status = res.residual_norm < opts.residual_tol ? SolverStatus::converged
                                                         : SolverStatus::stalled;
      return res;
    }
  }
}

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective,
                             const Vector& x0, const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  NelderMeadResult res;
  auto eval = [&](const Vector& x) {
    ++res.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  Vector start = x0;
  for (int round = 0; round <= opts.restarts; ++round) {
    std::vector<Vector> simplex(static_cast<std::size_t>(n + 1), start);
    std::vector<double> values(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)][i] += opts.initial_step;
    for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(simplex.size());
    bool converged = false;
    while (res.evaluations < opts.max_evaluations) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second_worst = order[order.size() - 2];

      double diameter = 0.0;
      for (std::size_t i = 0; i < simplex.size(); ++i)
        diameter = std::max(diameter, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
      if (diameter < opts.diameter_tol && std::isfinite(values[best])) {
        converged = true;
        break;
      }

      Vector centroid = Vector::Zero(n);
      for (std::size_t i = 0; i < simplex.size(); ++i)
        if (i != worst) centroid += simplex[i];
      centroid /= static_cast<double>(n);

      const Vector reflected = centroid + (centroid - simplex[worst]);
      const double f_reflected = eval(reflected);
      if (f_reflected < values[best]) {
        const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
        const double f_expanded = eval(expanded);
        if (f_expanded < f_reflected) {
          simplex[worst] = expanded;
          values[worst] = f_expanded;
        } else {
          simplex[worst] = reflected;
          values[worst] = f_reflected;
        }
        continue;
      }
      if (f_reflected < values[second_worst]) {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
        continue;
      }
      const bool outside = f_reflected < values[worst];
      const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                        : Vector(centroid + 0.5 * (simplex[worst] - centroid));
      const double f_contracted = eval(contracted);
      if (f_contracted < (outside ? f_reflected : values[worst])) {
        simplex[worst] = contracted;
        values[worst] = f_contracted;
        continue;
      }
      for (std::size_t i = 0; i < simplex.size(); ++i) {
        if (i == best) continue;
        simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
        values[i] = eval(simplex[i]);
      }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best_idx = static_cast<std::size_t>(best_it - values.begin());
    res.x = simplex[best_idx];
    res.value = values[best_idx];
    res.converged = converged;
    if (!converged) break;
    start = res.x;
  }
  return res;
}

}  // namespace cmcopula
