#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace ipslab {

/// Samples of a function on the uniform grid x_i = i/m of [0,1].
struct GridFn1D {
  std::vector<double> v;

  GridFn1D() = default;
  explicit GridFn1D(std::size_t m, double fill = 0.0) : v(m + 1, fill) {}
  static GridFn1D sample(const std::function<double(double)>& f, std::size_t m = 40) {
    GridFn1D g(m);
    for (std::size_t i = 0; i <= m; ++i) g.v[i] = f(g.x(i));
    return g;
  }

  [[nodiscard]] std::size_t m() const { return v.size() - 1; }
  [[nodiscard]] double x(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(m()); }
  // Linear interpolation, clamped to [0,1].
  [[nodiscard]] double operator()(double x) const {
    const double s = std::clamp(x, 0.0, 1.0) * static_cast<double>(m());
    const std::size_t i = std::min(static_cast<std::size_t>(s), m() - 1);
    const double f = s - static_cast<double>(i);
    return v[i] + f * (v[i + 1] - v[i]);
  }
};

/// Samples on the (m+1) x (m+1) grid of [0,1]^2, row index for x1.
struct GridFn2D {
  std::size_t m = 0;
  std::vector<double> v;

  GridFn2D() = default;
  explicit GridFn2D(std::size_t m_, double fill = 0.0) : m(m_), v((m_ + 1) * (m_ + 1), fill) {}
  static GridFn2D sample(const std::function<double(double, double)>& f, std::size_t m) {
    GridFn2D g(m);
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = 0; j <= m; ++j) g.at(i, j) = f(g.x(i), g.x(j));
    return g;
  }

  [[nodiscard]] double x(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(m); }
  double& at(std::size_t i, std::size_t j) { return v[i * (m + 1) + j]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return v[i * (m + 1) + j]; }
};

inline double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

}  // namespace ipslab
