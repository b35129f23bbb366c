#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

namespace cmcopula {

using Vector = Eigen::VectorXd;

enum class SolverStatus {
  converged,
  max_iterations,
  stalled,           // no damped step reduces the residual any further
  singular_jacobian,
};

const char* to_string(SolverStatus status);

struct NewtonOptions {
  double residual_tol = 1e-9;  // on the infinity norm of the residual
  int max_iterations = 200;
  double fd_step = 1e-6;       // relative central-difference step
  /// Report `stalled` when |f|^2 shrank by less than this fraction over the
  /// last `stall_window` iterations. A window of 0 disables the test.
  int stall_window = 0;
  double stall_relative_decrease = 1e-3;
  /// Box constraints; every iterate is projected onto them. Empty = unbounded.
  Vector lower;
  Vector upper;
};

struct NewtonResult {
  Vector x;
  Vector residual;
  double residual_norm = 0.0;
  int iterations = 0;
  SolverStatus status = SolverStatus::max_iterations;
  bool converged() const { return status == SolverStatus::converged; }
};

using VectorFunction = std::function<Vector(const Vector&)>;
using MatrixFunction = std::function<Eigen::MatrixXd(const Vector&)>;

/// Central finite-difference Jacobian; one-sided next to a bound.
Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f, const Vector& x,
                                           double rel_step, const Vector& lower = {},
                                           const Vector& upper = {});

/// Damped Newton iteration for the square system f(x) = 0.
///
/// Each step tries the full Newton direction with backtracking first; if the
/// Jacobian is singular or no backtracked step lowers |f|^2, it falls back to
/// Levenberg-Marquardt damping. When no exact root exists in the box the
/// iteration settles on a least-squares point and reports `stalled`.
NewtonResult solve_damped_newton(const VectorFunction& f, const Vector& x0,
                                 const NewtonOptions& opts = {},
                                 const std::optional<MatrixFunction>& jacobian = std::nullopt);

struct NelderMeadOptions {
  double diameter_tol = 1e-8;
  int max_evaluations = 20000;
  double initial_step = 0.25;
  int restarts = 1;  // re-seed the simplex around the optimum this many times
};

struct NelderMeadResult {
  Vector x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free minimisation. Non-finite objective values count as +inf.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective,
                             const Vector& x0, const NelderMeadOptions& opts = {});

}  // namespace cmcopula
