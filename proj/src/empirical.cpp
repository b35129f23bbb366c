#include "cmcopula/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cmcopula/error.hpp"

namespace cmcopula {

RawSample::RawSample(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 2) throw DomainError("sample needs at least 2 observations");
  if (data_.cols() < 2) throw DomainError("sample needs at least 2 columns");
  if (!data_.allFinite()) throw DomainError("sample contains missing or non-finite values");
}

PseudoSample::PseudoSample(RankMatrix ranks, bool rescaled)
    : ranks_(std::move(ranks)), rescaled_(rescaled) {
  const auto n = ranks_.rows();
  if (n < 1 || ranks_.cols() < 1) throw DomainError("pseudo sample must not be empty");
  if ((ranks_.array() < 1).any() || (ranks_.array() > n).any())
    throw DomainError("ranks must lie in 1..n");
  const double scale = rescaled_ ? 1.0 / static_cast<double>(n + 1) : 1.0 / static_cast<double>(n);
  u_ = ranks_.cast<double>() * scale;

  std::vector<std::int32_t> col(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < ranks_.cols() && !ties_present_; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = ranks_(i, j);
    std::sort(col.begin(), col.end());
    ties_present_ = std::adjacent_find(col.begin(), col.end()) != col.end();
  }
}

PseudoSample pseudo_observations(const RawSample& sample, const PseudoOptions& opts) {
  const Matrix& x = sample.data();
  const auto n = x.rows();
  RankMatrix ranks(n, x.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return x(a, j) < x(b, j); });
    // Max rank: every member of a tie group gets the position of its last member.
    Eigen::Index start = 0;
    while (start < n) {
      Eigen::Index stop = start + 1;
      while (stop < n && x(order[static_cast<std::size_t>(stop)], j) ==
                             x(order[static_cast<std::size_t>(start)], j))
        ++stop;
      for (Eigen::Index m = start; m < stop; ++m)
        ranks(order[static_cast<std::size_t>(m)], j) = static_cast<std::int32_t>(stop);
      start = stop;
    }
  }
  return PseudoSample(std::move(ranks), opts.rescale);
}

double empirical_copula_at(std::span<const double> point, const PseudoSample& pseudo) {
  if (static_cast<Eigen::Index>(point.size()) != pseudo.d())
    throw DomainError("point dimension does not match the pseudo sample");
  for (double p : point) {
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "empirical copula point coordinate " << p << " is outside [0, 1]";
      throw DomainError(msg.str());
    }
  }
  const Matrix& u = pseudo.u();
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    bool inside = true;
    for (Eigen::Index j = 0; j < u.cols() && inside; ++j) inside = u(i, j) <= point[static_cast<std::size_t>(j)];
    count += inside ? 1 : 0;
  }
  return static_cast<double>(count) / static_cast<double>(u.rows());
}

std::vector<double> copula_at_observations(const PseudoSample& pseudo, CountRule rule) {
  const auto n = pseudo.n();
  const auto d = pseudo.d();
  // Row-major copy so the inner comparison walks contiguous memory.
  std::vector<std::int32_t> rows(static_cast<std::size_t>(n * d));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) rows[static_cast<std::size_t>(i * d + j)] = pseudo.ranks()(i, j);

  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int32_t* target = &rows[static_cast<std::size_t>(i * d)];
    std::int64_t count = 0;
    for (Eigen::Index m = 0; m < n; ++m) {
      const std::int32_t* other = &rows[static_cast<std::size_t>(m * d)];
      bool below = true;
      if (rule == CountRule::inclusive) {
        for (Eigen::Index j = 0; j < d && below; ++j) below = other[j] <= target[j];
      } else {
        for (Eigen::Index j = 0; j < d && below; ++j) below = other[j] < target[j];
      }
      count += below ? 1 : 0;
    }
    out[static_cast<std::size_t>(i)] = static_cast<double>(count) / static_cast<double>(n);
  }
  return out;
}

MomentVector empirical_moments(const PseudoSample& pseudo, int r, CountRule rule) {
  if (r < 1) throw DomainError("number of moments must be >= 1");
  const std::vector<double> c = copula_at_observations(pseudo, rule);
  MomentVector m;
  m.values.assign(static_cast<std::size_t>(r), 0.0);
  for (double ci : c) {
    double power = 1.0;
    for (int k = 0; k < r; ++k) {
      power *= ci;
      m.values[static_cast<std::size_t>(k)] += power;
    }
  }
  for (double& v : m.values) v /= static_cast<double>(c.size());
  return m;
}

namespace {

// Strict inversions (i < j, y_i > y_j) counted by merge sort.
std::int64_t count_inversions(std::vector<std::int32_t>& y) {
  std::vector<std::int32_t> buffer(y.size());
  std::int64_t inversions = 0;
  const std::size_t n = y.size();
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (y[b] < y[a]) {
          inversions += static_cast<std::int64_t>(mid - a);
          buffer[out++] = y[b++];
        } else {
          buffer[out++] = y[a++];
        }
      }
      while (a < mid) buffer[out++] = y[a++];
      while (b < hi) buffer[out++] = y[b++];
    }
    std::swap(y, buffer);
  }
  return inversions;
}

std::int64_t tied_pairs(std::vector<std::int32_t> v) {
  std::sort(v.begin(), v.end());
  std::int64_t ties = 0;
  std::size_t start = 0;
  while (start < v.size()) {
    std::size_t stop = start + 1;
    while (stop < v.size() && v[stop] == v[start]) ++stop;
    const auto run = static_cast<std::int64_t>(stop - start);
    ties += run * (run - 1) / 2;
    start = stop;
  }
  return ties;
}

void require_bivariate(const PseudoSample& pseudo) {
  if (pseudo.d() != 2) throw DomainError("rank correlation is defined for d = 2 only");
  if (pseudo.n() < 2) throw DomainError("rank correlation needs at least 2 observations");
}

}  // namespace

double empirical_tau(const PseudoSample& pseudo) {
  require_bivariate(pseudo);
  const auto n = static_cast<std::size_t>(pseudo.n());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const RankMatrix& r = pseudo.ranks();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    return r(ia, 0) != r(ib, 0) ? r(ia, 0) < r(ib, 0) : r(ia, 1) < r(ib, 1);
  });
  std::vector<std::int32_t> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = r(static_cast<Eigen::Index>(order[i]), 0);
    y[i] = r(static_cast<Eigen::Index>(order[i]), 1);
  }

  std::int64_t joint_ties = 0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    while (stop < n && x[stop] == x[start] && y[stop] == y[start]) ++stop;
    const auto run = static_cast<std::int64_t>(stop - start);
    joint_ties += run * (run - 1) / 2;
    start = stop;
  }
  const std::int64_t x_ties = tied_pairs(x);
  const std::int64_t y_ties = tied_pairs(y);
  const std::int64_t total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  if (total - x_ties - y_ties + joint_ties == 0)
    throw DegenerateSampleError("every pair is tied; Kendall's tau is undefined");

  std::vector<std::int32_t> y_sorted = y;
  const std::int64_t discordant = count_inversions(y_sorted);
  const std::int64_t con_minus_dis = total - x_ties - y_ties + joint_ties - 2 * discordant;
  return static_cast<double>(con_minus_dis) / static_cast<double>(total);
}

double empirical_rho(const PseudoSample& pseudo) {
  require_bivariate(pseudo);
  const Eigen::VectorXd a = pseudo.u().col(0).array() - pseudo.u().col(0).mean();
  const Eigen::VectorXd b = pseudo.u().col(1).array() - pseudo.u().col(1).mean();
  const double saa = a.squaredNorm();
  const double sbb = b.squaredNorm();
  if (saa == 0.0 || sbb == 0.0)
    throw DegenerateSampleError("constant column; Spearman's rho is undefined");
  return a.dot(b) / std::sqrt(saa * sbb);
}

double ks_distance(std::vector<double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw DomainError("KS distance needs a non-empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - f),
                      std::abs(f - static_cast<double>(i) / n)});
  }
  return worst;
}

}  // namespace cmcopula
