#include "ipslab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <numeric>
#include <stdexcept>

namespace ipslab {

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

Estimate estimate_mean(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return s.estimate();
}

Estimate ratio_estimate(std::span<const double> weights, std::span<const double> values) {
  if (weights.size() != values.size()) throw std::invalid_argument("ratio_estimate: size mismatch");
  const std::size_t n = weights.size();
  double sw = 0.0, swg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += weights[i];
    swg += weights[i] * values[i];
  }
  if (sw <= 0.0) throw std::domain_error("ratio_estimate: all weights vanish");
  const double r = swg / sw;
  const double wbar = sw / static_cast<double>(n);
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = weights[i] * (values[i] - r);
    v += e * e;
  }
  const double se =
      n > 1 ? std::sqrt(v / static_cast<double>(n - 1) / static_cast<double>(n)) / wbar : 0.0;
  return {r, se, n, false};
}

Estimate ratio_of_means(std::span<const double> num, std::span<const double> den) {
  if (num.size() != den.size()) throw std::invalid_argument("ratio_of_means: size mismatch");
  const std::size_t n = num.size();
  const double sx = std::accumulate(num.begin(), num.end(), 0.0);
  const double sy = std::accumulate(den.begin(), den.end(), 0.0);
  if (sy <= 0.0) throw std::domain_error("ratio_of_means: denominator vanishes");
  const double r = sx / sy;
  const double ybar = sy / static_cast<double>(n);
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = num[i] - r * den[i];
    v += e * e;
  }
  const double se =
      n > 1 ? std::sqrt(v / static_cast<double>(n - 1) / static_cast<double>(n)) / ybar : 0.0;
  return {r, se, n, false};
}

double z_score(const Estimate& a, const Estimate& b) {
  const double s = std::sqrt(a.se * a.se + b.se * b.se);
  const double d = a.mean - b.mean;
  if (s == 0.0) return d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
  return d / s;
}

double z_score(const Estimate& a, double exact) { return z_score(a, Estimate::exact_value(exact)); }

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("ols_slope: need >= 2 paired points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    s += std::abs(a - b);
  }
  return 0.5 * s;
}

double chi_square_uniform(std::span<const std::size_t> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double e = total / static_cast<double>(counts.size());
  double x2 = 0.0;
  for (auto c : counts) x2 += (static_cast<double>(c) - e) * (static_cast<double>(c) - e) / e;
  return x2;
}

double chi_square_critical(std::size_t dof, double alpha) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

}  // namespace ipslab
