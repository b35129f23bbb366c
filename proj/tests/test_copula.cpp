#include <doctest.h>

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "cmcopula/copula.hpp"
#include "cmcopula/error.hpp"
#include "cmcopula/generator.hpp"
#include "cmcopula/rng.hpp"
#include "cmcopula/sampling.hpp"

using namespace cmcopula;

namespace {

const std::array<double, 3> kAlphas{0.1, 0.5, 0.9};
const std::array<double, 3> kBetas{1.059, 1.6, 3.45};

double cdf2(double u, double v, const TransformedGumbelParams& p) {
  const std::array<double, 2> pt{u, v};
  return transformed_gumbel_cdf(pt, p);
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK(TransformedGumbelParams{0.5, 1.6}.is_valid());
  CHECK(TransformedGumbelParams{0.5, 1.0}.is_valid());
  CHECK_FALSE(TransformedGumbelParams{0.0, 1.6}.is_valid());
  CHECK_FALSE(TransformedGumbelParams{0.5, 0.99}.is_valid());
  CHECK_FALSE(TransformedGumbelParams{std::nan(""), 1.6}.is_valid());
  CHECK_THROWS_AS(TransformedGumbelParams({-1.0, 2.0}).validate(), DomainError);
  CHECK_THROWS_AS(TransformedGumbelGenerator(0.5, 0.5), DomainError);
  CHECK_THROWS_AS(ClaytonGenerator(0.0), DomainError);
}

TEST_CASE("generator invariants") {
  for (double a : kAlphas) {
    for (double b : kBetas) {
      const TransformedGumbelGenerator g(a, b);
      CHECK(g.eval(1.0) == 0.0);
      for (int i = 1; i < 100; ++i) {
        const double t = i / 100.0;
        CHECK(g.first_derivative(t) < 0.0);
        CHECK(g.second_derivative(t) >= 0.0);
        CHECK(std::abs(g.inverse(g.eval(t)) - t) < 1e-12);
      }
    }
  }
}

TEST_CASE("generator derivatives match finite differences") {
  const TransformedGumbelGenerator g(0.5, 1.6);
  for (double t : {0.05, 0.3, 0.5, 0.8, 0.97}) {
    const double h = 1e-5;
    const double d1 = (g.eval(t + h) - g.eval(t - h)) / (2 * h);
    const double d2 = (g.first_derivative(t + h) - g.first_derivative(t - h)) / (2 * h);
    CHECK(g.first_derivative(t) == doctest::Approx(d1).epsilon(1e-7));
    CHECK(g.second_derivative(t) == doctest::Approx(d2).epsilon(1e-6));
  }
}

TEST_CASE("cdf boundary values") {
  const TransformedGumbelParams p{0.5, 1.6};
  CHECK(cdf2(1.0, 1.0, p) == 1.0);
  CHECK(cdf2(0.3, 1.0, p) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(cdf2(0.0, 0.7, p) == 0.0);
  CHECK_THROWS_AS(cdf2(1.2, 0.5, p), DomainError);
  CHECK_THROWS_AS(cdf2(-0.1, 0.5, p), DomainError);
}

TEST_CASE("cdf direct formula agrees with the generator composition") {
  const TransformedGumbelParams p{0.5, 1.6};
  const TransformedGumbelGenerator g = p.generator();
  CHECK(std::abs(cdf2(0.5, 0.5, p) - g.inverse(2.0 * g.eval(0.5))) < 1e-14);
  for (double a : kAlphas) {
    for (double b : kBetas) {
      const TransformedGumbelParams q{a, b};
      const TransformedGumbelGenerator gq = q.generator();
      for (double u : {0.05, 0.3, 0.77}) {
        for (double v : {0.1, 0.5, 0.95}) {
          const std::array<double, 2> pt{u, v};
          CHECK(std::abs(transformed_gumbel_cdf(pt, q) - archimedean_cdf(pt, gq)) < 1e-13);
        }
      }
    }
  }
  const ArchimedeanCopula cop(3, std::make_shared<TransformedGumbelGenerator>(0.5, 1.6));
  const std::array<double, 3> pt3{0.4, 0.6, 0.8};
  CHECK(std::abs(cop.cdf(pt3) - transformed_gumbel_cdf(pt3, p)) < 1e-14);
}

TEST_CASE("cdf properties: range, margins, monotonicity, concordance ordering") {
  for (double a : kAlphas) {
    for (double b : kBetas) {
      const TransformedGumbelParams p{a, b};
      for (int i = 0; i <= 100; ++i) {
        const double u = i / 100.0;
        CHECK(std::abs(cdf2(u, 1.0, p) - u) < 1e-14);
        CHECK(std::abs(cdf2(1.0, u, p) - u) < 1e-14);
      }
      for (int i = 1; i <= 10; ++i) {
        double prev = 0.0;
        for (int j = 1; j <= 10; ++j) {
          const double c = cdf2(i / 10.0, j / 10.0, p);
          CHECK(c >= 0.0);
          CHECK(c <= 1.0);
          CHECK(c >= prev);
          // Frechet bounds
          CHECK(c <= std::min(i / 10.0, j / 10.0) + 1e-15);
          CHECK(c >= std::max(i / 10.0 + j / 10.0 - 1.0, 0.0) - 1e-15);
          prev = c;
        }
      }
    }
  }
  for (int i = 1; i <= 5; ++i) {
    for (int j = 1; j <= 5; ++j) {
      const double u = i / 6.0, v = j / 6.0;
      const double c1 = cdf2(u, v, {0.5, 1.2});
      const double c2 = cdf2(u, v, {0.5, 1.6});
      const double c3 = cdf2(u, v, {0.5, 2.5});
      CHECK(c1 < c2);
      CHECK(c2 < c3);
    }
  }
}

TEST_CASE("closed-form moments: examples and identities") {
  CHECK(moment_closed_form(1, {0.5, 1.6}) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(moment_closed_form(2, {0.5, 1.6}) == doctest::Approx(3.6 / 16.8).epsilon(1e-15));
  CHECK(moment_closed_form(1, {1e-12, 1.0}) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK_THROWS_AS(moment_closed_form(0, {0.5, 1.6}), DomainError);
  for (double a : kAlphas) {
    for (double b : kBetas) {
      const TransformedGumbelParams p{a, b};
      CHECK(std::abs(4.0 * moment_closed_form(1, p) - 1.0 - tau_of_params(p)) < 1e-14);
      for (int k = 1; k < 5; ++k) CHECK(moment_closed_form(k, p) >= moment_closed_form(k + 1, p));
    }
  }
}

TEST_CASE("closed-form moments agree with quadrature") {
  CHECK(std::abs(moment_by_quadrature(1, TransformedGumbelGenerator(0.5, 1.6)) - 0.375) < 1e-8);
  const double expected = (3 * 3.45 + 0.9 * 3.45 - 2) / (9 * 3.45 + 3 * 0.9 * 3.45);
  CHECK(std::abs(moment_by_quadrature(2, TransformedGumbelGenerator(0.9, 3.45)) - expected) < 1e-8);
  CHECK(std::abs(moment_by_quadrature(1, GumbelGenerator(1.0)) - 0.25) < 1e-8);
  for (double a : kAlphas)
    for (double b : kBetas)
      for (int k = 1; k <= 5; ++k)
        CHECK(std::abs(moment_closed_form(k, {a, b}) -
                       moment_by_quadrature(k, TransformedGumbelGenerator(a, b))) < 1e-8);
}

TEST_CASE("Clayton first moment matches its Kendall tau") {
  // tau_Clayton = theta / (theta + 2) and M1 = (tau + 1) / 4.
  for (double theta : {0.5, 2.0, 6.0}) {
    const double tau = theta / (theta + 2.0);
    CHECK(std::abs(moment_by_quadrature(1, ClaytonGenerator(theta)) - (tau + 1.0) / 4.0) < 1e-8);
  }
  // Gumbel: tau = 1 - 1/beta
  CHECK(std::abs(moment_by_quadrature(1, GumbelGenerator(2.0)) - (0.5 + 1.0) / 4.0) < 1e-8);
}

TEST_CASE("moment gradient matches finite differences") {
  for (double a : kAlphas) {
    for (double b : kBetas) {
      for (int k = 1; k <= 3; ++k) {
        const auto g = moment_gradient(k, {a, b});
        const double h = 1e-6;
        const double da = (moment_closed_form(k, {a + h, b}) - moment_closed_form(k, {a - h, b})) / (2 * h);
        const double db = (moment_closed_form(k, {a, b + h}) - moment_closed_form(k, {a, b - h})) / (2 * h);
        CHECK(g[0] == doctest::Approx(da).epsilon(1e-6));
        CHECK(g[1] == doctest::Approx(db).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("Kendall distribution") {
  const TransformedGumbelGenerator g(0.5, 1.6);
  CHECK(kendall_df(1.0, g) == 1.0);
  CHECK(kendall_df(0.0, g) == 0.0);
  CHECK(kendall_df(1.0, ClaytonGenerator(2.0)) == 1.0);
  CHECK(kendall_df(0.5, g) == doctest::Approx(0.5 + (0.5 - std::pow(0.5, 1.5)) / 0.8).epsilon(1e-14));
  CHECK(std::abs(kendall_df(0.5, g) - 0.6830583) < 1e-7);
  CHECK(std::abs(kendall_df(0.25, g) - kendall_df_generic(g, 0.25)) < 1e-12);
  CHECK_THROWS_AS(kendall_df(1.5, g), DomainError);
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double k = kendall_df(i / 1000.0, g);
    CHECK(k >= prev);
    prev = k;
  }
  for (double s : {0.01, 0.2, 0.6, 0.99}) {
    CHECK(std::abs(g.kendall_density(s) - kendall_density_generic(g, s)) < 1e-10);
    const double h = 1e-6;
    CHECK(g.kendall_density(s) == doctest::Approx((g.kendall_df(s + h) - g.kendall_df(s - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("Kendall tau closed form") {
  CHECK(tau_of_params({0.5, 1.6}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(tau_of_params({0.9, 3.45}) - 0.8) < 1e-3);
  CHECK(std::abs(tau_of_params({0.1, 1.059}) - 0.1007) < 1e-4);
}

TEST_CASE("multivariate concordance helpers") {
  CHECK(kendall_tau_from_first_moment(0.375, 2) == doctest::Approx(0.5));
  CHECK(first_moment_from_kendall_tau(0.5, 2) == doctest::Approx(0.375));
  for (int d = 2; d <= 5; ++d)
    CHECK(kendall_tau_from_first_moment(first_moment_from_kendall_tau(0.3, d), d) == doctest::Approx(0.3));
  // Independence: integral of u v over the square is 1/4 -> rho = 0.
  CHECK(spearman_rho_from_cdf_integral(0.25, 2) == doctest::Approx(0.0));
  CHECK(spearman_rho_from_cdf_integral(1.0 / 8.0, 3) == doctest::Approx(0.0));
}

TEST_CASE("Spearman rho by quadrature") {
  CHECK(std::abs(rho_of_params({1e-8, 1.0})) < 1e-4);
  CHECK(rho_of_params({0.5, 200.0}) >= 0.99);
  const double rho = rho_of_params({0.5, 1.6});
  CHECK(rho > 0.6);
  CHECK(rho < 0.75);
  // Fast rule against the adaptive path.
  for (double a : kAlphas)
    for (double b : kBetas)
      CHECK(std::abs(rho_of_params({a, b}) - rho_of_params_adaptive({a, b})) < 1e-9);
}

TEST_CASE("Spearman rho against a Monte Carlo oracle") {
  // For true uniforms, rho = 12 E[U V] - 3.
  SeededRng rng(2024);
  const TransformedGumbelParams p{0.5, 1.6};
  const Matrix s = sample_archimedean_bivariate(p.generator(), 1'000'000, rng);
  const Eigen::ArrayXd uv = 12.0 * s.col(0).array() * s.col(1).array();
  const double mc = uv.mean() - 3.0;
  const double se = std::sqrt((uv - uv.mean()).square().mean() / static_cast<double>(uv.size()));
  CHECK(std::abs(rho_of_params(p) - mc) < 4.0 * se);
}

TEST_CASE("density: log form, generic form and mixed partial of the cdf agree") {
  for (double a : kAlphas) {
    for (double b : kBetas) {
      const TransformedGumbelParams p{a, b};
      const TransformedGumbelGenerator g = p.generator();
      for (double u : {0.1, 0.45, 0.9}) {
        for (double v : {0.2, 0.6, 0.85}) {
          const double direct = std::exp(transformed_gumbel_log_density(u, v, p));
          CHECK(direct == doctest::Approx(archimedean_density(u, v, g)).epsilon(1e-9));
          const double h = 1e-4;
          const double mixed = (cdf2(u + h, v + h, p) - cdf2(u + h, v - h, p) -
                                cdf2(u - h, v + h, p) + cdf2(u - h, v - h, p)) /
                               (4 * h * h);
          CHECK(direct == doctest::Approx(mixed).epsilon(1e-4));
        }
      }
    }
  }
  // Large beta stays finite in log space.
  CHECK(std::isfinite(transformed_gumbel_log_density(0.3, 0.31, {0.5, 50.0})));
}

TEST_CASE("density integrates to one") {
  const TransformedGumbelParams p{0.5, 1.6};
  const double total = integrate(
      [&](double u) {
        return integrate([&](double v) { return std::exp(transformed_gumbel_log_density(u, v, p)); },
                         1e-9, 1.0 - 1e-9, {.abs_tol = 1e-8, .rel_tol = 1e-8, .max_subdivisions = 4000})
            .value;
      },
      1e-9, 1.0 - 1e-9, {.abs_tol = 1e-6, .rel_tol = 1e-7, .max_subdivisions = 4000}).value;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
}
