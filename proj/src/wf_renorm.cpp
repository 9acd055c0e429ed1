#include "ipslab/wf_renorm.hpp"

#include <algorithm>
#include <cmath>

#include "ipslab/error.hpp"

namespace ipslab {

double h00(double x) { return x * (1.0 - x); }
double h01(double x) { return 1.0 - std::pow(1.0 - x, 7); }
double h11(double) { return 1.0; }
double h1(double x) { return x; }

// ---------------------------------------------------------------------------
// schedule

GammaSchedule GammaSchedule::constant_gamma(double gamma) {
  require(gamma > 0.0, "GammaSchedule: gamma must be positive");
  GammaSchedule s;
  s.fixed_ = gamma;
  return s;
}

GammaSchedule GammaSchedule::geometric(double g, double beta) {
  require(g >= 0.0 && beta > 0.0, "GammaSchedule: need g >= 0, beta > 0");
  GammaSchedule s;
  s.c = [g](int k) { return std::pow(1.0 + g, -k); };
  s.beta = beta;
  return s;
}

double GammaSchedule::s(int n) const {
  require(static_cast<bool>(c), "GammaSchedule: no migration constants");
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += 1.0 / c(k);
  return acc;
}

double GammaSchedule::gamma(int n) const {
  if (fixed_ > 0.0) return fixed_;
  const double cn = c(n);
  require(cn > 0.0, "GammaSchedule: migration constants must be positive");
  return 1.0 / ((beta + s(n)) * cn);
}

// ---------------------------------------------------------------------------
// stationary law and paths

double beta_stationary_sample(double x, double gamma, Engine& eng) {
  require(x >= 0.0 && x <= 1.0 && gamma > 0.0, "beta_stationary_sample: need x in [0,1], gamma > 0");
  if (x == 0.0 || x == 1.0) return x;
  for (;;) {
    const double y = sample_beta(eng, x / gamma, (1.0 - x) / gamma);
    if (std::isfinite(y)) return y;
  }
}

double beta_moment(double x, double gamma, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= (x + k * gamma) / (1.0 + k * gamma);
  return r;
}

double wf_default_dt(double gamma) { return std::min(gamma / 50.0, 0.02); }

namespace {

// Transition of dy = theta (x - y) dt + sqrt(2 y(1-y)) dB over a step h,
// drawn from the Beta law with the exact conditional mean and variance.
// Both moments close in y, so the chain keeps [0,1] and has no clamping bias.
struct WFStep {
  double theta, h, e1, ek, k;
  WFStep(double theta_, double h_)
      : theta(theta_), h(h_), e1(std::exp(-theta_ * h_)), ek(std::exp(-2.0 * (theta_ + 1.0) * h_)),
        k(2.0 * (theta_ + 1.0)) {}

  double operator()(double y, double x, Engine& eng) const {
    const double m = x + (y - x) * e1;
    const double c = 2.0 * (theta * x + 1.0);
    const double A = c * (y - x) / (k - theta);
    const double m2 = c * x / k + A * e1 + (y * y - c * x / k - A) * ek;
    const double v = m2 - m * m;
    const double mc = std::clamp(m, 0.0, 1.0);
    if (!(v > 0.0) || mc == 0.0 || mc == 1.0) return mc;
    const double s = mc * (1.0 - mc) / v - 1.0;
    if (!(s > 0.0)) return mc;
    const double z = sample_beta(eng, mc * s, (1.0 - mc) * s);
    return std::isfinite(z) ? z : mc;
  }
};

double pick_dt(const UOptions& opt, double gamma) { return opt.dt > 0.0 ? opt.dt : wf_default_dt(gamma); }

// One replica for all attraction points at once: the clock and the
// observation times are shared, the paths are not.
template <class F>
std::vector<double> u_sample(const F& p, const std::vector<double>& xs, double gamma, double dt, Engine& eng) {
  std::exponential_distribution<double> clock(1.0 / gamma);
  const double S = 0.5 * clock(eng);
  const double ig = 1.0 / gamma;
  const WFStep full(ig, dt);
  const std::size_t n = xs.size();
  std::vector<double> y(n), I(n, 0.0), py(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = beta_stationary_sample(xs[i], gamma, eng);
    py[i] = p(y[i]);
  }
  double s = 0.0;
  while (s < S) {
    const double h = std::min(dt, S - s);
    const WFStep step = h == dt ? full : WFStep(ig, h);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = step(y[i], xs[i], eng);
      const double p1 = p(y[i]);
      I[i] += 0.5 * (py[i] + p1) * h;  // trapezoid
      py[i] = p1;
    }
    s += h;
  }
  for (std::size_t i = 0; i < n; ++i) I[i] = (ig + 1.0) * -std::expm1(-2.0 * I[i]);
  return I;
}

template <class F>
std::vector<double> product_sample(const F& f, const std::vector<double>& xs, double gamma, double dt,
                                   Engine& eng) {
  std::exponential_distribution<double> clock(2.0 / gamma);
  std::exponential_distribution<double> gap(2.0);
  const double tau = clock(eng);
  const double ig = 1.0 / gamma;
  const WFStep full(ig, dt);
  const std::size_t n = xs.size();
  std::vector<double> y(n), prod(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = beta_stationary_sample(xs[i], gamma, eng);
    prod[i] = 1.0 - f(y[i]);  // sigma_0 = 0
  }
  auto alive = [&] {
    for (double q : prod)
      if (q > 0.0) return true;
    return false;
  };
  double s = 0.0;
  double next = gap(eng);
  while (next < tau && alive()) {
    while (s < next) {
      const double h = std::min(dt, next - s);
      const WFStep step = h == dt ? full : WFStep(ig, h);
      for (std::size_t i = 0; i < n; ++i) y[i] = step(y[i], xs[i], eng);
      s += h;
    }
    s = next;
    for (std::size_t i = 0; i < n; ++i) prod[i] *= 1.0 - f(y[i]);
    next += gap(eng);
  }
  for (double& q : prod) q = 1.0 - q;
  return prod;
}

template <class Sampler>
CatalyzingFn apply_on_grid(std::size_t m, const UOptions& opt, Sampler&& many) {
  CatalyzingFn out{GridFn1D(m)};
  std::vector<double> xs(m + 1);
  for (std::size_t i = 0; i <= m; ++i) xs[i] = out.f.x(i);
  const Stream root(opt.seed);
  const auto runs = map_replicas(opt.paths, [&](std::size_t r) {
    Engine eng = root.child(r).engine();
    return many(xs, eng);
  });
  std::vector<double> v(opt.paths);
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t r = 0; r < opt.paths; ++r) v[r] = runs[r][i];
    const Estimate e = estimate_mean(v);
    out.f.v[i] = e.mean;
    out.se[i] = e.se;
  }
  return out;
}

template <class Sampler>
Estimate at_point(double x, const UOptions& opt, Sampler&& many) {
  const Stream root(opt.seed);
  const std::vector<double> xs{x};
  const auto v = map_replicas(opt.paths, [&](std::size_t r) {
    Engine eng = root.child(r).engine();
    return many(xs, eng)[0];
  });
  return estimate_mean(v);
}

}  // namespace

std::vector<double> wf_stationary_path(const WFPathParams& p, double duration, Engine& eng) {
  require(p.gamma > 0.0 && p.dt > 0.0 && duration > 0.0, "wf_stationary_path: need gamma, dt, duration > 0");
  const WFStep step(1.0 / p.gamma, p.dt);
  const auto steps = static_cast<std::size_t>(std::ceil(duration / p.dt - 1e-9));
  std::vector<double> path;
  path.reserve(steps + 1);
  double y = beta_stationary_sample(p.x, p.gamma, eng);
  path.push_back(y);
  for (std::size_t k = 0; k < steps; ++k) {
    y = step(y, p.x, eng);
    path.push_back(y);
  }
  return path;
}

double pooled_z(const CatalyzingFn& a, const CatalyzingFn& b) {
  require(a.m() == b.m(), "pooled_z: grids differ");
  const double n = static_cast<double>(a.f.v.size());
  double d = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.f.v.size(); ++i) {
    d += a.f.v[i] - b.f.v[i];
    sa += a.se[i];
    sb += b.se[i];
  }
  return z_score(Estimate{d / n, std::hypot(sa / n, sb / n)}, 0.0);
}

double u_gamma_constant(double r, double gamma) { return r <= 0.0 ? 0.0 : (1.0 + gamma) / (1.0 / r + gamma); }

CatalyzingFn u_gamma_apply(const CatalyzingFn& p, double gamma, const UOptions& opt) {
  require(gamma > 0.0, "u_gamma_apply: gamma must be positive");
  for (double v : p.f.v) require(v >= 0.0, "u_gamma_apply: p must be nonnegative");
  const double dt = pick_dt(opt, gamma);
  const GridFn1D& g = p.f;
  return apply_on_grid(p.m(), opt, [&](const auto& xs, Engine& eng) { return u_sample(g, xs, gamma, dt, eng); });
}

CatalyzingFn u_gamma_apply_product(const CatalyzingFn& f, double gamma, const UOptions& opt) {
  require(gamma > 0.0, "u_gamma_apply_product: gamma must be positive");
  for (double v : f.f.v) require(v >= 0.0 && v <= 1.0, "u_gamma_apply_product: f must take values in [0,1]");
  const double dt = pick_dt(opt, gamma);
  const GridFn1D& g = f.f;
  return apply_on_grid(f.m(), opt,
                       [&](const auto& xs, Engine& eng) { return product_sample(g, xs, gamma, dt, eng); });
}

Estimate u_gamma_point(const std::function<double(double)>& p, double x, double gamma, const UOptions& opt) {
  require(gamma > 0.0, "u_gamma_point: gamma must be positive");
  const double dt = pick_dt(opt, gamma);
  return at_point(x, opt, [&](const auto& xs, Engine& eng) { return u_sample(p, xs, gamma, dt, eng); });
}

Estimate u_gamma_product_point(const std::function<double(double)>& f, double x, double gamma,
                               const UOptions& opt) {
  require(gamma > 0.0, "u_gamma_product_point: gamma must be positive");
  const double dt = pick_dt(opt, gamma);
  return at_point(x, opt, [&](const auto& xs, Engine& eng) { return product_sample(f, xs, gamma, dt, eng); });
}

std::vector<CatalyzingFn> iterate_renorm(const CatalyzingFn& p0, const GammaSchedule& sched, int n,
                                         const UOptions& opt) {
  require(n >= 1, "iterate_renorm: n must be >= 1");
  std::vector<CatalyzingFn> out{p0};
  const Stream root(opt.seed);
  for (int k = 0; k < n; ++k) {
    UOptions o = opt;
    o.seed = root.child(static_cast<std::uint64_t>(k)).key();
    out.push_back(u_gamma_apply(out.back(), sched.gamma(k), o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ancestral chain

long ancestral_chain(long n, double gamma, Engine& eng) {
  require(n >= 0 && gamma > 0.0, "ancestral_chain: need n >= 0, gamma > 0");
  std::uniform_real_distribution<double> U(0.0, 1.0);
  long phi = n, psi = 0;
  // Only the jump chain matters for psi_infinity.
  while (phi > 0) {
    const double coal = static_cast<double>(phi) * static_cast<double>(phi - 1);
    const double res = static_cast<double>(phi) / gamma;
    if (U(eng) * (coal + res) >= coal) ++psi;
    --phi;
  }
  return psi;
}

double psi_mean(long m, double gamma) {
  double s = 0.0;
  for (long i = 0; i < m; ++i) s += 1.0 / (1.0 + static_cast<double>(i) * gamma);
  return s;
}

// ---------------------------------------------------------------------------
// catalytic equilibrium

CatalyticMoments catalytic_equilibrium(const CatalyticParams& p, std::size_t reps, std::uint64_t seed) {
  require(p.c > 0.0 && p.alpha > 0.0, "catalytic_equilibrium: need c, alpha > 0");
  require(p.dt > 0.0 && p.duration > 0.0 && p.burn >= 0.0, "catalytic_equilibrium: bad time parameters");
  require(static_cast<bool>(p.p), "catalytic_equilibrium: no catalyzing function");
  const Stream root(seed);
  struct Avg {
    double m1 = 0, m2 = 0, v1 = 0, v2 = 0, c12 = 0, w11 = 0, w22 = 0, h1 = 0;
  };
  const auto chains = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(r).engine();
    std::normal_distribution<double> N(0.0, 1.0);
    double y1 = p.x1, y2 = p.x2;
    const double sh = std::sqrt(p.dt);
    auto step = [&] {
      const double s1 = std::sqrt(std::max(0.0, 2.0 * p.alpha * y1 * (1.0 - y1)));
      const double s2 = std::sqrt(std::max(0.0, 2.0 * p.p(y1) * y2 * (1.0 - y2)));
      const double n1 = y1 + p.c * (p.x1 - y1) * p.dt + s1 * sh * N(eng);
      const double n2 = y2 + p.c * (p.x2 - y2) * p.dt + s2 * sh * N(eng);
      y1 = std::clamp(n1, 0.0, 1.0);
      y2 = std::clamp(n2, 0.0, 1.0);
    };
    const auto nburn = static_cast<std::size_t>(p.burn / p.dt);
    const auto nrun = static_cast<std::size_t>(p.duration / p.dt);
    for (std::size_t k = 0; k < nburn; ++k) step();
    Avg a;
    for (std::size_t k = 0; k < nrun; ++k) {
      step();
      const double d1 = y1 - p.x1, d2 = y2 - p.x2;
      a.m1 += y1;
      a.m2 += y2;
      a.v1 += d1 * d1;
      a.v2 += d2 * d2;
      a.c12 += d1 * d2;
      a.h1 += y1 * (1.0 - y1);
      a.w22 += p.p(y1) * y2 * (1.0 - y2);
    }
    const double inv = 1.0 / static_cast<double>(nrun);
    for (double* f : {&a.m1, &a.m2, &a.v1, &a.v2, &a.c12, &a.h1, &a.w22}) *f *= inv;
    a.w11 = p.alpha * a.h1;
    return a;
  });
  auto col = [&](double Avg::*field) {
    std::vector<double> v(reps);
    for (std::size_t r = 0; r < reps; ++r) v[r] = chains[r].*field;
    return estimate_mean(v);
  };
  CatalyticMoments out;
  out.mean1 = col(&Avg::m1);
  out.mean2 = col(&Avg::m2);
  out.var1 = col(&Avg::v1);
  out.var2 = col(&Avg::v2);
  out.cov12 = col(&Avg::c12);
  out.w11 = col(&Avg::w11);
  out.w22 = col(&Avg::w22);
  out.h1 = col(&Avg::h1);
  return out;
}

// ---------------------------------------------------------------------------
// binary splitting Wright-Fisher particles

BinsplitResult binsplit_simulate(double alpha, double x0, double T, std::size_t reps, std::uint64_t seed,
                                 double dt, std::size_t guard) {
  require(alpha > 0.0 && T >= 0.0 && dt > 0.0, "binsplit_simulate: need alpha > 0, T >= 0, dt > 0");
  require(x0 >= 0.0 && x0 <= 1.0, "binsplit_simulate: x0 must lie in [0,1]");
  constexpr double kTrap = 1e-12;
  const Stream root(seed);
  struct Run {
    double interior_or_one, at_one;
    std::size_t peak;
  };
  const auto runs = map_replicas(reps, [&](std::size_t r) -> Run {
    if (x0 >= 1.0 - kTrap) return {1.0, 1.0, 1};
    if (x0 <= kTrap) return {0.0, 0.0, 1};
    Engine eng = root.child(r).engine();
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    // Particles trapped at 0 never leave and their offspring stay there, so
    // they are dropped; one particle at 1 settles both events.
    std::vector<double> ys{x0}, next;
    std::size_t peak = 1;
    double t = 0.0;
    const double split = -std::expm1(-alpha * dt);
    while (t < T - 1e-12 && !ys.empty()) {
      const double h = std::min(dt, T - t);
      const double ph = h == dt ? split : -std::expm1(-alpha * h);
      const double sh = std::sqrt(h);
      next.clear();
      for (double y : ys) {
        y = std::clamp(y + std::sqrt(std::max(0.0, y * (1.0 - y))) * sh * N(eng), 0.0, 1.0);
        if (y >= 1.0 - kTrap) return {1.0, 1.0, peak};
        if (y <= kTrap) continue;
        next.push_back(y);
        if (U(eng) < ph) next.push_back(y);
      }
      ys.swap(next);
      peak = std::max(peak, ys.size());
      require(ys.size() <= guard, "binsplit_simulate: population exceeds guard");
      t += h;
    }
    return {ys.empty() ? 0.0 : 1.0, 0.0, peak};
  });
  std::vector<double> a(reps), b(reps);
  BinsplitResult out;
  for (std::size_t r = 0; r < reps; ++r) {
    a[r] = runs[r].interior_or_one;
    b[r] = runs[r].at_one;
    out.max_population = std::max(out.max_population, runs[r].peak);
  }
  out.interior_or_one = estimate_mean(a);
  out.at_one = estimate_mean(b);
  return out;
}

// ---------------------------------------------------------------------------
// size-biased kernel, absorption

double size_biased_sample(double x, double gamma, Engine& eng) {
  require(x >= 0.0 && x <= 1.0 && gamma > 0.0, "size_biased_sample: need x in [0,1], gamma > 0");
  if (x == 0.0 || x == 1.0) return sample_beta(eng, x / gamma + 1.0, (1.0 - x) / gamma + 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    const double y = beta_stationary_sample(x, gamma, eng);
    if (U(eng) < 4.0 * y * (1.0 - y)) return y;
  }
}

double kyy_moment(double x, double gamma) {
  return (x * (1.0 - x) + gamma * (1.0 + gamma)) / ((1.0 + 2.0 * gamma) * (1.0 + 3.0 * gamma));
}

Estimate wf_survival(double x, double t, std::size_t reps, std::uint64_t seed, double dt) {
  require(x >= 0.0 && x <= 1.0 && t >= 0.0 && dt > 0.0, "wf_survival: bad arguments");
  constexpr double kTrap = 1e-12;
  const Stream root(seed);
  const auto v = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(r).engine();
    std::normal_distribution<double> N(0.0, 1.0);
    double y = x, s = 0.0;
    while (s < t - 1e-12 && y > kTrap && y < 1.0 - kTrap) {
      const double h = std::min(dt, t - s);
      y = std::clamp(y + std::sqrt(std::max(0.0, y * (1.0 - y))) * std::sqrt(h) * N(eng), 0.0, 1.0);
      s += h;
    }
    return y > kTrap ? 1.0 : 0.0;
  });
  return estimate_mean(v);
}

double absorption_bound(double x, double t) {
  require(t > 0.0, "absorption_bound: t must be positive");
  return (4.0 / t + 2.0) * x;
}

}  // namespace ipslab
