#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ipslab/grid.hpp"
#include "ipslab/wf_renorm.hpp"

namespace ipslab {

// ---------------------------------------------------------------------------
// matrix flow  d/dt w = 1/2 sum_ij w_ij d_i d_j w + w  on [0,1]^2

struct DiffMatrixField {
  GridFn2D w11, w12, w22;

  DiffMatrixField() = default;
  explicit DiffMatrixField(std::size_t m) : w11(m), w12(m), w22(m) {}
  using Entry = std::function<double(double, double)>;
  static DiffMatrixField sample(const Entry& f11, const Entry& f12, const Entry& f22, std::size_t m = 40);

  [[nodiscard]] std::size_t m() const { return w11.m; }
  [[nodiscard]] double max_abs() const;
};

/// Sup over all nodes and entries of |a - b|.
double sup_distance(const DiffMatrixField& a, const DiffMatrixField& b);

/// Clips negative eigenvalues of every node matrix at 0; returns the largest
/// clipped magnitude.
double project_psd(DiffMatrixField& w);

struct FlowOptions {
  std::vector<double> snapshots;  // output times, sorted; t_end is always added
  double cfl = 0.25;              // dt <= cfl h^2 / max spectral radius
  double blowup = 1e3;
};

struct FlowResult {
  std::vector<double> times;
  std::vector<DiffMatrixField> w;
  bool blew_up = false;
  double max_clip = 0.0;  // largest eigenvalue clipping in any step
  std::size_t steps = 0;
};

/// Explicit Euler with central differences; boundary nodes see quadratic
/// extrapolation ghost values. On blow-up the trajectory so far is returned.
FlowResult flow_solve(const DiffMatrixField& w0, double t_end, const FlowOptions& opt = {});

/// Max over interior nodes and entries of |1/2 sum w_ij d_i d_j w + w|.
double flow_residual(const DiffMatrixField& w);

// ---------------------------------------------------------------------------
// p* boundary value problem  1/2 x(1-x) p'' + alpha p(1-p) = 0

struct PStarResult {
  CatalyzingFn p;                // on the output grid
  std::vector<double> xs, fine;  // RK4 solution on the fine grid
  double slope = 0.0;            // p'(0) (class (0,x)) or -p'(1) (class (1,0))
  double residual = 0.0;         // max interior ODE residual on the fine grid
  // |p''(0) + 2 alpha p'(0)| and |p''(1) - 2 alpha p'(1)| where p vanishes at
  // that end; the sign in front of 2 alpha flips at an end where p = 1.
  double boundary_left = 0.0;
  double boundary_right = 0.0;
};

struct ShootOptions {
  double eps = 1e-4;
  double dx = 1e-4;
  double lo = 1e-3, hi = 50.0;  // slope bracket
  std::size_t m = 40;
};

/// Classes (l, r) as in CatalyzingFn. (0,0) is identically 0 for alpha <= 1.
PStarResult pstar_shoot(double alpha, int l, int r, const ShootOptions& opt = {});

/// Discrete residual 1/2 x(1-x) p'' + alpha p(1-p) at interior grid nodes.
double pstar_residual(const std::vector<double>& p, double h, double alpha, double x0 = 0.0);

// ---------------------------------------------------------------------------
// Cauchy problem  d/dt u = 1/2 x(1-x) u'' + alpha u(1-u)

struct CauchyOptions {
  std::vector<double> snapshots;
  double dt = 0.0;  // 0: largest step keeping the scheme monotone
};

struct CauchyResult {
  std::vector<double> times;
  std::vector<GridFn1D> u;
  std::size_t steps = 0;
};

CauchyResult cauchy_solve(const GridFn1D& f, double alpha, double t_end, const CauchyOptions& opt = {});
/// alpha / (alpha (1 - e^{-alpha t})), the solution started from +infinity.
double cauchy_upper_bound(double alpha, double t);

struct GammaZeroReport {
  CatalyzingFn iterated;
  GridFn1D cauchy;
  double sup = 0.0;
};

/// n-fold U_gamma against the Cauchy solution with alpha = 1 at t = n gamma.
GammaZeroReport gamma_zero_limit_check(const CatalyzingFn& p0, double gamma, int n, const UOptions& opt = {});

}  // namespace ipslab
