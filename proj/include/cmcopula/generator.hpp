#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cmcopula {

/// Generator of a bivariate/multivariate Archimedean copula,
/// C(u) = inverse(sum_j eval(u_j)).
///
/// Implementations must satisfy eval(1) = 0, first_derivative < 0 and
/// second_derivative >= 0 on (0, 1). The Kendall distribution helpers have
/// generic defaults in terms of the three derivatives; families with a
/// simpler closed form override them.
class ArchimedeanGenerator {
 public:
  virtual ~ArchimedeanGenerator() = default;

  virtual double eval(double t) const = 0;
  virtual double first_derivative(double t) const = 0;
  virtual double second_derivative(double t) const = 0;
  virtual double inverse(double y) const = 0;

  /// K(s) = s - eval(s) / first_derivative(s), with K(0) = 0 and K(1) = 1.
  virtual double kendall_df(double s) const;
  /// K'(s) = second_derivative(s) * eval(s) / first_derivative(s)^2.
  virtual double kendall_density(double s) const;

  virtual std::string name() const = 0;
};

/// Generic-path Kendall distribution, never using a family override. Kept
/// separate so closed forms can be cross-checked against it.
double kendall_df_generic(const ArchimedeanGenerator& gen, double s);
double kendall_density_generic(const ArchimedeanGenerator& gen, double s);

/// Gumbel generator distorted by t -> exp(1 - t^-alpha):
/// (t^-alpha - 1)^beta, alpha > 0, beta >= 1.
class TransformedGumbelGenerator final : public ArchimedeanGenerator {
 public:
  TransformedGumbelGenerator(double alpha, double beta);

  double eval(double t) const override;
  double first_derivative(double t) const override;
  double second_derivative(double t) const override;
  double inverse(double y) const override;
  double kendall_df(double s) const override;
  double kendall_density(double s) const override;
  std::string name() const override { return "transformed-gumbel"; }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  double alpha_;
  double beta_;
};

/// (-ln t)^beta, beta >= 1.
class GumbelGenerator final : public ArchimedeanGenerator {
 public:
  explicit GumbelGenerator(double beta);

  double eval(double t) const override;
  double first_derivative(double t) const override;
  double second_derivative(double t) const override;
  double inverse(double y) const override;
  std::string name() const override { return "gumbel"; }

 private:
  double beta_;
};

/// (t^-theta - 1) / theta, theta > 0.
class ClaytonGenerator final : public ArchimedeanGenerator {
 public:
  explicit ClaytonGenerator(double theta);

  double eval(double t) const override;
  double first_derivative(double t) const override;
  double second_derivative(double t) const override;
  double inverse(double y) const override;
  std::string name() const override { return "clayton"; }

 private:
  double theta_;
};

/// A parametric family of generators, used by the generic moment solver.
/// Bounds describe a closed box inside which every parameter vector is valid.
class GeneratorFamily {
 public:
  virtual ~GeneratorFamily() = default;
  virtual std::size_t parameter_count() const = 0;
  virtual std::vector<double> lower_bounds() const = 0;
  virtual std::vector<double> upper_bounds() const = 0;
  virtual std::unique_ptr<ArchimedeanGenerator> make(std::span<const double> params) const = 0;
  virtual std::string name() const = 0;
};

class TransformedGumbelFamily final : public GeneratorFamily {
 public:
  std::size_t parameter_count() const override { return 2; }
  std::vector<double> lower_bounds() const override { return {1e-6, 1.0}; }
  std::vector<double> upper_bounds() const override { return {1e3, 1e3}; }
  std::unique_ptr<ArchimedeanGenerator> make(std::span<const double> params) const override;
  std::string name() const override { return "transformed-gumbel"; }
};

class GumbelFamily final : public GeneratorFamily {
 public:
  std::size_t parameter_count() const override { return 1; }
  std::vector<double> lower_bounds() const override { return {1.0}; }
  std::vector<double> upper_bounds() const override { return {1e3}; }
  std::unique_ptr<ArchimedeanGenerator> make(std::span<const double> params) const override;
  std::string name() const override { return "gumbel"; }
};

class ClaytonFamily final : public GeneratorFamily {
 public:
  std::size_t parameter_count() const override { return 1; }
  std::vector<double> lower_bounds() const override { return {1e-6}; }
  std::vector<double> upper_bounds() const override { return {1e3}; }
  std::unique_ptr<ArchimedeanGenerator> make(std::span<const double> params) const override;
  std::string name() const override { return "clayton"; }
};

}  // namespace cmcopula
