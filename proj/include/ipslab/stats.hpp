#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ipslab {

/// A Monte-Carlo estimate. `se == 0` with `exact == true` marks closed-form values.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  bool exact = false;

  static Estimate exact_value(double v) { return {v, 0.0, 0, true}; }
};

// Welford accumulator.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const RunningStats& o);

  [[nodiscard]] std::size_t count() const { return n_; }
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  [[nodiscard]] double se() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }
  [[nodiscard]] Estimate estimate() const { return {mean(), se(), n_, false}; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

Estimate estimate_mean(std::span<const double> xs);

/// Self-normalised ratio sum(w*g)/sum(w) over i.i.d. pairs, delta-method SE.
Estimate ratio_estimate(std::span<const double> weights, std::span<const double> values);

/// mean(num)/mean(den) over i.i.d. pairs, delta-method SE.
Estimate ratio_of_means(std::span<const double> num, std::span<const double> den);

/// (a - b) / sqrt(se_a^2 + se_b^2); the two estimates must be independent.
double z_score(const Estimate& a, const Estimate& b);
double z_score(const Estimate& a, double exact);

/// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Total-variation distance between two probability vectors (padded with zeros).
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Pearson chi-square statistic of observed counts against equal expected counts.
double chi_square_uniform(std::span<const std::size_t> counts);
/// Upper quantile of the chi-square law (e.g. alpha = 0.01).
double chi_square_critical(std::size_t dof, double alpha);

}  // namespace ipslab
