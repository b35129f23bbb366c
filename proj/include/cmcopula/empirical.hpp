#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cmcopula {

using Matrix = Eigen::MatrixXd;
using RankMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;

/// n x d table of observations, one row per observation. Requires n >= 2,
/// d >= 2 and finite entries.
class RawSample {
 public:
  explicit RawSample(Matrix data);

  const Matrix& data() const { return data_; }
  Eigen::Index n() const { return data_.rows(); }
  Eigen::Index d() const { return data_.cols(); }

 private:
  Matrix data_;
};

struct PseudoOptions {
  /// Scale ranks by 1/(n+1) instead of 1/n. Off by default.
  bool rescale = false;
};

/// Pseudo-observations: entry (i, j) is the marginal empirical df of column j
/// evaluated at X_ji, i.e. its max-rank divided by n.
class PseudoSample {
 public:
  /// Build directly from max-ranks in 1..n (rows are observations).
  PseudoSample(RankMatrix ranks, bool rescaled = false);

  const Matrix& u() const { return u_; }
  const RankMatrix& ranks() const { return ranks_; }
  Eigen::Index n() const { return u_.rows(); }
  Eigen::Index d() const { return u_.cols(); }
  bool ties_present() const { return ties_present_; }
  bool rescaled() const { return rescaled_; }

 private:
  RankMatrix ranks_;
  Matrix u_;
  bool ties_present_ = false;
  bool rescaled_ = false;
};

/// Values of the copula moments M_1..M_r (stored 0-based).
struct MomentVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  /// 1-based accessor matching the moment order.
  double moment(int k) const { return values.at(static_cast<std::size_t>(k - 1)); }
};

/// How C_n is evaluated at the sample's own pseudo-observations.
enum class CountRule {
  /// #{j : U_j <= U_i coordinatewise} / n, the literal empirical copula.
  inclusive,
  /// #{j : U_j < U_i coordinatewise} / n. Drops the observation's own
  /// contribution, which removes the O(1/n) upward bias of the moments.
  strict,
};

PseudoSample pseudo_observations(const RawSample& sample, const PseudoOptions& opts = {});

/// n^-1 #{i : U_i <= point coordinatewise}. Throws DomainError when the point
/// is outside the unit cube or has the wrong dimension.
double empirical_copula_at(std::span<const double> point, const PseudoSample& pseudo);

/// C_n evaluated at every pseudo-observation; integer counts then one division.
std::vector<double> copula_at_observations(const PseudoSample& pseudo,
                                           CountRule rule = CountRule::inclusive);

/// M_k estimates n^-1 sum_i C_n(U_i)^k for k = 1..r.
MomentVector empirical_moments(const PseudoSample& pseudo, int r,
                               CountRule rule = CountRule::inclusive);

/// Kendall's tau-a, (concordant - discordant) / (n(n-1)/2), in O(n log n).
/// Tied pairs contribute zero. Requires d == 2.
double empirical_tau(const PseudoSample& pseudo);

/// Spearman's rho as the Pearson correlation of the pseudo-observation columns.
double empirical_rho(const PseudoSample& pseudo);

/// sup_x |F_n(x) - cdf(x)| of the sample against a continuous df.
double ks_distance(std::vector<double> values, const std::function<double(double)>& cdf);

}  // namespace cmcopula
