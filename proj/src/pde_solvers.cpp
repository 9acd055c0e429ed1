#include "ipslab/pde_solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "ipslab/error.hpp"

namespace ipslab {

// ---------------------------------------------------------------------------
// matrix flow

DiffMatrixField DiffMatrixField::sample(const Entry& f11, const Entry& f12, const Entry& f22, std::size_t m) {
  DiffMatrixField w;
  w.w11 = GridFn2D::sample(f11, m);
  w.w12 = GridFn2D::sample(f12, m);
  w.w22 = GridFn2D::sample(f22, m);
  return w;
}

double DiffMatrixField::max_abs() const {
  double s = 0.0;
  for (const auto* g : {&w11, &w12, &w22})
    for (double v : g->v) s = std::max(s, std::abs(v));
  return s;
}

double sup_distance(const DiffMatrixField& a, const DiffMatrixField& b) {
  return std::max({sup_distance(a.w11.v, b.w11.v), sup_distance(a.w12.v, b.w12.v), sup_distance(a.w22.v, b.w22.v)});
}

double project_psd(DiffMatrixField& w) {
  double clip = 0.0;
  for (std::size_t k = 0; k < w.w11.v.size(); ++k) {
    double& a = w.w11.v[k];
    double& b = w.w12.v[k];
    double& c = w.w22.v[k];
    const double mean = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), b);
    const double lo = mean - r, hi = mean + r;
    if (lo >= 0.0) continue;
    if (hi <= 0.0) {
      clip = std::max(clip, -lo);
      a = b = c = 0.0;
      continue;
    }
    clip = std::max(clip, -lo);
    // hi times the spectral projector onto its eigenvector.
    const double s = hi / (2.0 * r);
    a = s * (a - lo);
    b = s * b;
    c = s * (c - lo);
  }
  return clip;
}

namespace {

// Copy with one ghost layer filled by quadratic extrapolation.
class Padded {
 public:
  explicit Padded(const GridFn2D& g) : m_(g.m), n_(g.m + 3), v_(n_ * n_) {
    const long m = static_cast<long>(m_);
    for (long i = 0; i <= m; ++i)
      for (long j = 0; j <= m; ++j) set(i, j, g.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    for (long j = 0; j <= m; ++j) {
      set(-1, j, 3 * at(0, j) - 3 * at(1, j) + at(2, j));
      set(m + 1, j, 3 * at(m, j) - 3 * at(m - 1, j) + at(m - 2, j));
    }
    for (long i = -1; i <= m + 1; ++i) {
      set(i, -1, 3 * at(i, 0) - 3 * at(i, 1) + at(i, 2));
      set(i, m + 1, 3 * at(i, m) - 3 * at(i, m - 1) + at(i, m - 2));
    }
  }
  [[nodiscard]] double at(long i, long j) const { return v_[idx(i, j)]; }

 private:
  [[nodiscard]] std::size_t idx(long i, long j) const {
    return static_cast<std::size_t>(i + 1) * n_ + static_cast<std::size_t>(j + 1);
  }
  void set(long i, long j, double x) { v_[idx(i, j)] = x; }
  std::size_t m_, n_;
  std::vector<double> v_;
};

struct Derivs {
  double d11, d12, d22;
};

inline Derivs derivs(const Padded& P, long i, long j, double inv_h2) {
  return {(P.at(i + 1, j) - 2 * P.at(i, j) + P.at(i - 1, j)) * inv_h2,
          (P.at(i + 1, j + 1) - P.at(i + 1, j - 1) - P.at(i - 1, j + 1) + P.at(i - 1, j - 1)) * 0.25 * inv_h2,
          (P.at(i, j + 1) - 2 * P.at(i, j) + P.at(i, j - 1)) * inv_h2};
}

// Right-hand side of the flow for every entry at every node.
std::array<std::vector<double>, 3> flow_rhs(const DiffMatrixField& w) {
  const std::size_t m = w.m();
  const double h = 1.0 / static_cast<double>(m);
  const double inv_h2 = 1.0 / (h * h);
  const std::array<Padded, 3> P{Padded(w.w11), Padded(w.w12), Padded(w.w22)};
  const std::array<const GridFn2D*, 3> G{&w.w11, &w.w12, &w.w22};
  std::array<std::vector<double>, 3> out;
  for (auto& o : out) o.resize(w.w11.v.size());
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t j = 0; j <= m; ++j) {
      const std::size_t k = i * (m + 1) + j;
      const double a = w.w11.v[k], b = w.w12.v[k], c = w.w22.v[k];
      for (int e = 0; e < 3; ++e) {
        const Derivs d = derivs(P[e], static_cast<long>(i), static_cast<long>(j), inv_h2);
        out[e][k] = 0.5 * (a * d.d11 + 2 * b * d.d12 + c * d.d22) + G[e]->v[k];
      }
    }
  return out;
}

double max_spectral_radius(const DiffMatrixField& w) {
  double rho = 0.0;
  for (std::size_t k = 0; k < w.w11.v.size(); ++k) {
    const double a = w.w11.v[k], b = w.w12.v[k], c = w.w22.v[k];
    rho = std::max(rho, std::abs(0.5 * (a + c)) + std::hypot(0.5 * (a - c), b));
  }
  return rho;
}

std::vector<double> output_times(std::vector<double> snaps, double t_end) {
  std::erase_if(snaps, [&](double t) { return t < 0.0 || t > t_end; });
  snaps.push_back(t_end);
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  return snaps;
}

}  // namespace

FlowResult flow_solve(const DiffMatrixField& w0, double t_end, const FlowOptions& opt) {
  require(w0.m() >= 3, "flow_solve: need at least 4 nodes per side");
  require(t_end >= 0.0 && opt.cfl > 0.0, "flow_solve: need t_end >= 0, cfl > 0");
  const double h = 1.0 / static_cast<double>(w0.m());
  FlowResult res;
  DiffMatrixField w = w0;
  res.max_clip = project_psd(w);
  double t = 0.0;
  for (double target : output_times(opt.snapshots, t_end)) {
    while (t < target - 1e-12) {
      const double rho = max_spectral_radius(w);
      double dt = rho > 0.0 ? opt.cfl * h * h / rho : 1e-2;
      dt = std::min({dt, 1e-2, target - t});
      const auto rhs = flow_rhs(w);
      for (std::size_t k = 0; k < w.w11.v.size(); ++k) {
        w.w11.v[k] += dt * rhs[0][k];
        w.w12.v[k] += dt * rhs[1][k];
        w.w22.v[k] += dt * rhs[2][k];
      }
      res.max_clip = std::max(res.max_clip, project_psd(w));
      t += dt;
      ++res.steps;
      if (!(w.max_abs() <= opt.blowup)) {
        res.blew_up = true;
        res.times.push_back(t);
        res.w.push_back(w);
        return res;
      }
    }
    res.times.push_back(target);
    res.w.push_back(w);
  }
  return res;
}

double flow_residual(const DiffMatrixField& w) {
  const std::size_t m = w.m();
  const auto rhs = flow_rhs(w);
  double r = 0.0;
  for (std::size_t i = 1; i < m; ++i)
    for (std::size_t j = 1; j < m; ++j)
      for (const auto& e : rhs) r = std::max(r, std::abs(e[i * (m + 1) + j]));
  return r;
}

// ---------------------------------------------------------------------------
// p* shooting

namespace {

enum class Shot { low, high };

struct Trajectory {
  std::vector<double> xs, p, dp;
  Shot outcome = Shot::low;
};

// RK4 for p'' = -2 alpha p(1-p) / (x(1-x)) from the series start at eps up to
// 1 - eps. Within 20 dx of the singular end the step shrinks in proportion to
// the distance to 1. `zero_right` selects the right-end target p(1) = 0
// (true) or p(1) = 1.
Trajectory shoot(double alpha, double s, bool zero_right, const ShootOptions& o, bool keep) {
  auto rhs = [alpha](double x, double p) { return -2.0 * alpha * p * (1.0 - p) / (x * (1.0 - x)); };
  const double x_end = 1.0 - o.eps;
  double x = o.eps;
  double p = s * o.eps - alpha * s * o.eps * o.eps;
  double q = s - 2.0 * alpha * s * o.eps;
  Trajectory tr;
  auto record = [&] {
    if (!keep) return;
    tr.xs.push_back(x);
    tr.p.push_back(p);
    tr.dp.push_back(q);
  };
  record();
  std::size_t k = 0;
  while (x < x_end - 1e-15) {
    const bool uniform = 1.0 - x >= 21.0 * o.dx;
    const double h = uniform ? o.dx : std::min(0.05 * (1.0 - x), x_end - x);
    const double k1p = q, k1q = rhs(x, p);
    const double k2p = q + 0.5 * h * k1q, k2q = rhs(x + 0.5 * h, p + 0.5 * h * k1p);
    const double k3p = q + 0.5 * h * k2q, k3q = rhs(x + 0.5 * h, p + 0.5 * h * k2p);
    const double k4p = q + h * k3q, k4q = rhs(x + h, p + h * k3p);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    x = uniform ? o.eps + static_cast<double>(++k) * o.dx : x + h;
    if (1.0 - x < o.eps + 1e-15) x = x_end;
    record();
    if (p >= 1.0) {
      tr.outcome = Shot::high;
      return tr;
    }
    if (zero_right && p <= 0.0) {
      tr.outcome = Shot::low;
      return tr;
    }
  }
  // Linear extrapolation of p to x = 1 decides the side of the separatrix.
  const double p1 = p + (1.0 - x) * q;
  tr.outcome = zero_right ? (p1 > 0.0 ? Shot::high : Shot::low) : (p1 >= 1.0 ? Shot::high : Shot::low);
  return tr;
}

// Three-point second difference on a possibly nonuniform grid.
double second_diff(const std::vector<double>& xs, const std::vector<double>& p, std::size_t k) {
  const double hm = xs[k] - xs[k - 1], hp = xs[k + 1] - xs[k];
  return 2.0 * ((p[k + 1] - p[k]) / hp - (p[k] - p[k - 1]) / hm) / (hp + hm);
}

// First and second derivative of the fine solution at an end point, from
// central differences at three nodes stepping inward, extrapolated
// quadratically to the end.
struct EndDerivs {
  double d1, d2;
};
EndDerivs end_derivs(const std::vector<double>& xs, const std::vector<double>& p, double x_end, double dir,
                     double delta) {
  auto node = [&](double x) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    const auto k = static_cast<std::size_t>(it - xs.begin());
    return std::clamp<std::size_t>(k, 1, xs.size() - 2);
  };
  auto d1 = [&](std::size_t k) { return (p[k + 1] - p[k - 1]) / (xs[k + 1] - xs[k - 1]); };
  auto d2 = [&](std::size_t k) { return second_diff(xs, p, k); };
  std::array<std::size_t, 3> k{};
  for (int i = 0; i < 3; ++i) k[i] = node(x_end + dir * (i + 1) * delta);
  // Lagrange weights at x_end.
  std::array<double, 3> w{};
  for (int i = 0; i < 3; ++i) {
    w[i] = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) w[i] *= (x_end - xs[k[j]]) / (xs[k[i]] - xs[k[j]]);
  }
  EndDerivs e{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    e.d1 += w[i] * d1(k[i]);
    e.d2 += w[i] * d2(k[i]);
  }
  return e;
}

}  // namespace

double pstar_residual(const std::vector<double>& p, double h, double alpha, double x0) {
  double r = 0.0;
  for (std::size_t k = 1; k + 1 < p.size(); ++k) {
    const double x = x0 + static_cast<double>(k) * h;
    const double d2 = (p[k + 1] - 2 * p[k] + p[k - 1]) / (h * h);
    r = std::max(r, std::abs(0.5 * x * (1 - x) * d2 + alpha * p[k] * (1 - p[k])));
  }
  return r;
}

PStarResult pstar_shoot(double alpha, int l, int r, const ShootOptions& o) {
  require(alpha > 0.0, "pstar_shoot: alpha must be positive");
  require((l == 0 || l == 1) && (r == 0 || r == 1), "pstar_shoot: class entries must be 0 or 1");
  require(o.eps > 0.0 && o.dx > 0.0 && o.lo > 0.0 && o.hi > o.lo && o.m >= 2, "pstar_shoot: bad options");
  PStarResult res;
  const bool constant = (l == 1 && r == 1) || (l == 0 && r == 0 && alpha <= 1.0);
  if (constant) {
    const double c = l == 1 ? 1.0 : 0.0;
    res.p = CatalyzingFn(GridFn1D(o.m, c));
    res.xs = {0.0, 1.0};
    res.fine = {c, c};
    return res;
  }
  const bool zero_right = (l == 0 && r == 0);
  const bool mirror = (l == 1 && r == 0);

  // The outcome must switch from low to high exactly once inside the bracket.
  std::ostringstream trace;
  std::vector<Shot> probe;
  for (int k = 0; k <= 9; ++k) {
    const double s = o.lo * std::pow(o.hi / o.lo, k / 9.0);
    probe.push_back(shoot(alpha, s, zero_right, o, false).outcome);
    trace << " s=" << s << (probe.back() == Shot::high ? ":high" : ":low");
  }
  require(probe.front() == Shot::low && probe.back() == Shot::high,
          "pstar_shoot: bracket does not separate the outcomes;" + trace.str());
  for (std::size_t k = 1; k < probe.size(); ++k)
    require(!(probe[k - 1] == Shot::high && probe[k] == Shot::low),
            "pstar_shoot: outcome not monotone in the slope;" + trace.str());

  double lo = o.lo, hi = o.hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (shoot(alpha, mid, zero_right, o, false).outcome == Shot::high ? hi : lo) = mid;
  }
  // The side of the bracket that stays inside [0,1] up to the last node.
  Trajectory tr = shoot(alpha, zero_right ? hi : lo, zero_right, o, true);
  res.slope = zero_right ? hi : lo;

  // Fine solution with the exact end values attached.
  std::vector<double> xs{0.0}, fine{0.0};
  for (std::size_t k = 0; k < tr.xs.size(); ++k) {
    xs.push_back(tr.xs[k]);
    fine.push_back(std::clamp(tr.p[k], 0.0, 1.0));
  }
  if (xs.back() < 1.0) {
    xs.push_back(1.0);
    fine.push_back(zero_right ? 0.0 : 1.0);
  }
  for (std::size_t k = 1; k + 1 < tr.xs.size(); ++k) {
    const double x = tr.xs[k];
    const double r = 0.5 * x * (1 - x) * second_diff(tr.xs, tr.p, k) + alpha * tr.p[k] * (1 - tr.p[k]);
    res.residual = std::max(res.residual, std::abs(r));
  }

  const EndDerivs left = end_derivs(xs, fine, 0.0, 1.0, 10 * o.dx);
  const EndDerivs right = end_derivs(xs, fine, 1.0, -1.0, 10 * o.dx);
  res.boundary_left = std::abs(left.d2 + 2 * alpha * res.slope);
  // At x = 1: p'' = 2 alpha p' if p(1) = 0, p'' = -2 alpha p' if p(1) = 1.
  res.boundary_right = std::abs(right.d2 + (zero_right ? -2.0 : 2.0) * alpha * right.d1);

  if (mirror) {
    std::reverse(fine.begin(), fine.end());
    std::reverse(xs.begin(), xs.end());
    for (double& x : xs) x = 1.0 - x;
    std::swap(res.boundary_left, res.boundary_right);
  }
  res.xs = std::move(xs);
  res.fine = std::move(fine);

  GridFn1D g(o.m);
  for (std::size_t i = 0; i <= o.m; ++i) {
    const double x = g.x(i);
    const auto it = std::lower_bound(res.xs.begin(), res.xs.end(), x);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - res.xs.begin()), 1,
                                                  res.xs.size() - 1);
    const double f = (x - res.xs[k - 1]) / (res.xs[k] - res.xs[k - 1]);
    g.v[i] = res.fine[k - 1] + f * (res.fine[k] - res.fine[k - 1]);
  }
  g.v.front() = static_cast<double>(l);
  g.v.back() = static_cast<double>(r);
  res.p = CatalyzingFn(std::move(g));
  return res;
}

// ---------------------------------------------------------------------------
// Cauchy problem

double cauchy_upper_bound(double alpha, double t) {
  require(alpha > 0.0 && t > 0.0, "cauchy_upper_bound: need alpha, t > 0");
  return alpha / (alpha * -std::expm1(-alpha * t));
}

CauchyResult cauchy_solve(const GridFn1D& f, double alpha, double t_end, const CauchyOptions& opt) {
  require(f.v.size() >= 3, "cauchy_solve: need at least 3 grid points");
  require(alpha > 0.0 && t_end >= 0.0, "cauchy_solve: need alpha > 0, t_end >= 0");
  double fmax = 0.0;
  for (double v : f.v) {
    require(v >= 0.0 && std::isfinite(v), "cauchy_solve: f must be finite and nonnegative");
    fmax = std::max(fmax, v);
  }
  const std::size_t m = f.m();
  const double h = 1.0 / static_cast<double>(m);
  const double guard = 10.0 * std::max(1.0, fmax);
  std::vector<double> a(m + 1);
  double amax = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    const double x = f.x(i);
    a[i] = 0.5 * x * (1.0 - x) / (h * h);
    amax = std::max(amax, a[i]);
  }
  CauchyResult res;
  std::vector<double> u = f.v, next(m + 1);
  double t = 0.0;
  for (double target : output_times(opt.snapshots, t_end)) {
    while (t < target - 1e-12) {
      double umax = 0.0;
      for (double v : u) umax = std::max(umax, v);
      // Keeps every coefficient of the explicit update nonnegative, so the
      // scheme is monotone in the data.
      double dt = 0.9 / (2.0 * amax + alpha * std::max(0.0, 2.0 * umax - 1.0) + 1e-300);
      if (opt.dt > 0.0) dt = std::min(dt, opt.dt);
      dt = std::min(dt, target - t);
      next[0] = u[0] + dt * alpha * u[0] * (1.0 - u[0]);
      next[m] = u[m] + dt * alpha * u[m] * (1.0 - u[m]);
      for (std::size_t i = 1; i < m; ++i)
        next[i] = u[i] + dt * (a[i] * (u[i + 1] - 2.0 * u[i] + u[i - 1]) + alpha * u[i] * (1.0 - u[i]));
      u.swap(next);
      t += dt;
      ++res.steps;
      for (double v : u) require(v <= guard && v >= -1e-12, "cauchy_solve: solution left the bounded region");
    }
    GridFn1D g(m);
    g.v = u;
    res.times.push_back(target);
    res.u.push_back(std::move(g));
  }
  return res;
}

GammaZeroReport gamma_zero_limit_check(const CatalyzingFn& p0, double gamma, int n, const UOptions& opt) {
  require(gamma > 0.0 && n >= 1, "gamma_zero_limit_check: need gamma > 0, n >= 1");
  GammaZeroReport rep;
  rep.iterated = iterate_renorm(p0, GammaSchedule::constant_gamma(gamma), n, opt).back();
  rep.cauchy = cauchy_solve(p0.f, 1.0, gamma * n).u.back();
  rep.sup = sup_distance(rep.iterated.f.v, rep.cauchy.v);
  return rep;
}

}  // namespace ipslab
