#pragma once

#include "cmcopula/empirical.hpp"
#include "cmcopula/generator.hpp"
#include "cmcopula/rng.hpp"

namespace cmcopula {

/// Solves K(w) = t for w by bisection on [1e-12, 1] to 1e-12.
/// Throws ConvergenceError when K does not bracket t (invalid generator).
double kendall_quantile(double t, const ArchimedeanGenerator& gen);

/// n pairs from the bivariate Archimedean copula of `gen` (Genest-Rivest):
/// s, t ~ U(0,1); w = K^-1(t); u1 = phi^-1(s phi(w)), u2 = phi^-1((1-s) phi(w)).
/// Consumes two uniforms per row, s first.
Matrix sample_archimedean_bivariate(const ArchimedeanGenerator& gen, Eigen::Index n, SeededRng& rng);

}  // namespace cmcopula
