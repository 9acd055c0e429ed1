#include "ipslab/braco_resem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ipslab/error.hpp"
#include "ipslab/oracle.hpp"

namespace ipslab {

BcdParams BcdParams::reversed() const {
  BcdParams r = *this;
  r.kernel = reverse_kernel(kernel);
  return r;
}

double BcdParams::ratio() const {
  require(c > 0.0, "this operation needs c > 0");
  return b / c;
}

void BcdParams::validate() const {
  require(b >= 0.0 && c >= 0.0 && d >= 0.0, "rates b, c, d must be nonnegative");
  require(dt > 0.0, "dt must be positive");
}

long total(const CountConfig& x) { return std::accumulate(x.begin(), x.end(), 0L); }
double total(const DensityConfig& phi) { return std::accumulate(phi.begin(), phi.end(), 0.0); }

double rising_factorial(double z, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= z + i;
  return r;
}

namespace {

// Binary sum tree over per-site rates; internal nodes are recomputed from
// their children so there is no accumulated drift.
class SumTree {
 public:
  explicit SumTree(std::size_t n) : n_(n) {
    P_ = 1;
    while (P_ < n) P_ <<= 1;
    t_.assign(2 * P_, 0.0);
  }
  void set(std::size_t i, double v) {
    std::size_t k = P_ + i;
    t_[k] = v;
    for (k >>= 1; k >= 1; k >>= 1) t_[k] = t_[2 * k] + t_[2 * k + 1];
  }
  [[nodiscard]] double sum() const { return t_[1]; }
  // Leaf i with prefix(i) <= u < prefix(i+1).
  std::size_t find(double u) const {
    std::size_t k = 1;
    while (k < P_) {
      if (u < t_[2 * k] || t_[2 * k + 1] <= 0.0) {
        k = 2 * k;
      } else {
        u -= t_[2 * k];
        k = 2 * k + 1;
      }
    }
    return std::min(k - P_, n_ - 1);
  }

 private:
  std::size_t n_, P_;
  std::vector<double> t_;
};

std::size_t pick_target(const Kernel& k, std::size_t i, double u) {
  const auto& row = k.rows[i];
  for (const auto& [j, r] : row) {
    if (u < r) return j;
    u -= r;
  }
  return row.back().first;
}

void check_grid(const std::vector<double>& g) {
  require(!g.empty(), "time grid is empty");
  require(g.front() >= 0.0, "time grid must be nonnegative");
  require(std::is_sorted(g.begin(), g.end()), "time grid must be sorted");
}

[[noreturn]] void runaway(double t, long n, double guard) {
  std::ostringstream os;
  os << "braco: population " << n << " exceeds guard " << guard << " at t=" << t;
  throw Error(os.str());
}

Estimate mean_of(const std::vector<double>& xs) { return estimate_mean(xs); }

bool all_zero(const DensityConfig& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

// ---------------------------------------------------------------------------
// braco

namespace {

// Gillespie chain; only the rates of touched sites are recomputed after an event.
class BracoChain {
 public:
  BracoChain(const BcdParams& p, const CountConfig& x0) : p_(p), k_(p.kernel), x_(x0), tree_(k_.n) {
    p.validate();
    const std::size_t n = k_.n;
    require(x0.size() == n, "braco: initial state has wrong size");
    require(std::all_of(x0.begin(), x0.end(), [](long v) { return v >= 0; }), "braco: negative count");
    move_.resize(n);
    for (std::size_t i = 0; i < n; ++i) move_[i] = k_.row_sum(i);
    pop_ = total(x_);
    for (std::size_t i = 0; i < n; ++i) tree_.set(i, site_rate(i));
  }

  [[nodiscard]] const CountConfig& state() const { return x_; }
  [[nodiscard]] long population() const { return pop_; }

  // Time of the next event, +inf if the chain is absorbed.
  double next_time(Engine& eng) const {
    const double R = tree_.sum();
    if (R <= 0.0) return std::numeric_limits<double>::infinity();
    return t_ + std::exponential_distribution<double>(R)(eng);
  }

  void fire(double tn, Engine& eng) {
    t_ = tn;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const std::size_t i = tree_.find(U(eng) * tree_.sum());
    const double xi = static_cast<double>(x_[i]);
    double u = U(eng) * site_rate(i);
    if (u < xi * move_[i]) {
      const std::size_t j = pick_target(k_, i, u / xi);
      --x_[i];
      ++x_[j];
      tree_.set(j, site_rate(j));
    } else if ((u -= xi * move_[i]) < xi * p_.b) {
      ++x_[i];
      if (static_cast<double>(++pop_) > p_.guard) runaway(t_, pop_, p_.guard);
    } else {
      // leak, death or coalescence
      --x_[i];
      --pop_;
    }
    tree_.set(i, site_rate(i));
  }

 private:
  double site_rate(std::size_t i) const {
    const double xi = static_cast<double>(x_[i]);
    return xi * (move_[i] + k_.leak[i] + p_.b + p_.d) + p_.c * xi * (xi - 1.0);
  }

  const BcdParams& p_;
  const Kernel& k_;
  CountConfig x_;
  SumTree tree_;
  std::vector<double> move_;
  long pop_ = 0;
  double t_ = 0.0;
};

}  // namespace

std::vector<CountConfig> braco_path(const BcdParams& p, const CountConfig& x0, const std::vector<double>& t_grid,
                                    Engine& eng) {
  check_grid(t_grid);
  BracoChain ch(p, x0);
  std::vector<CountConfig> out;
  out.reserve(t_grid.size());
  std::size_t g = 0;
  while (g < t_grid.size()) {
    const double tn = ch.next_time(eng);
    while (g < t_grid.size() && t_grid[g] < tn) {
      out.push_back(ch.state());
      ++g;
    }
    if (g == t_grid.size()) break;
    ch.fire(tn, eng);
  }
  return out;
}

double braco_hitting_time(const BcdParams& p, const CountConfig& x0, long target, double t_max, Engine& eng) {
  BracoChain ch(p, x0);
  double t = 0.0;
  while (ch.population() != target) {
    t = ch.next_time(eng);
    if (t > t_max) return std::numeric_limits<double>::infinity();
    ch.fire(t, eng);
  }
  return t;
}

CountConfig braco_simulate(const BcdParams& p, const CountConfig& x0, double t, Engine& eng) {
  return braco_path(p, x0, {t}, eng).back();
}

CountConfig braco_simulate(const BcdParams& p, const CountConfig& x0, double t, std::uint64_t seed) {
  Engine eng = Stream(seed).engine();
  return braco_simulate(p, x0, t, eng);
}

// ---------------------------------------------------------------------------
// resem

namespace {

// Drift uses the transposed kernel: sum_j a(j,i)(X_j - X_i), and mass flowing
// in from outside a killed window is zero.
class ResemStepper {
 public:
  explicit ResemStepper(const BcdParams& p) : p_(p), rev_(reverse_kernel(p.kernel)) {}

  void step(DensityConfig& x, const std::vector<double>& noise, double h) const {
    const std::size_t n = x.size();
    drift_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      double dr = -rev_.leak[i] * xi;
      for (const auto& [j, r] : rev_.rows[i]) dr += r * (x[j] - xi);
      dr += p_.b * xi * (1.0 - xi) - p_.d * xi;
      drift_[i] = dr;
    }
    const double sh = std::sqrt(h);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      const double sig = std::sqrt(std::max(0.0, 2.0 * p_.c * xi * (1.0 - xi)));
      x[i] = std::clamp(xi + drift_[i] * h + sig * sh * noise[i], 0.0, 1.0);
    }
  }

  [[nodiscard]] bool absorbed(const DensityConfig& x) const {
    // 0 is absorbing always; 1 is absorbing on closed windows when d = 0.
    if (all_zero(x)) return true;
    if (p_.d != 0.0) return false;
    for (double v : rev_.leak)
      if (v != 0.0) return false;
    return std::all_of(x.begin(), x.end(), [](double v) { return v == 1.0; });
  }

 private:
  const BcdParams& p_;
  Kernel rev_;
  mutable std::vector<double> drift_;
};

void fill_normal(std::vector<double>& z, Engine& eng) {
  std::normal_distribution<double> N(0.0, 1.0);
  for (auto& v : z) v = N(eng);
}

}  // namespace

std::vector<DensityConfig> resem_path(const BcdParams& p, const DensityConfig& phi0,
                                      const std::vector<double>& t_grid, Engine& eng) {
  p.validate();
  check_grid(t_grid);
  const std::size_t n = p.kernel.n;
  require(phi0.size() == n, "resem: initial state has wrong size");
  require(std::all_of(phi0.begin(), phi0.end(), [](double v) { return v >= 0.0 && v <= 1.0; }),
          "resem: initial state must lie in [0,1]");
  ResemStepper st(p);
  DensityConfig x = phi0;
  std::vector<double> z(n);
  std::vector<DensityConfig> out;
  out.reserve(t_grid.size());
  double t = 0.0;
  for (double target : t_grid) {
    while (t < target - 1e-12 * std::max(1.0, target)) {
      if (st.absorbed(x)) {
        t = target;
        break;
      }
      const double h = std::min(p.dt, target - t);
      fill_normal(z, eng);
      st.step(x, z, h);
      t += h;
    }
    out.push_back(x);
  }
  return out;
}

DensityConfig resem_simulate(const BcdParams& p, const DensityConfig& phi0, double t, Engine& eng) {
  return resem_path(p, phi0, {t}, eng).back();
}

DensityConfig resem_simulate(const BcdParams& p, const DensityConfig& phi0, double t, std::uint64_t seed) {
  Engine eng = Stream(seed).engine();
  return resem_simulate(p, phi0, t, eng);
}

// ---------------------------------------------------------------------------
// thinning and Poisson fields

CountConfig thin(const CountConfig& x, const DensityConfig& phi, Engine& eng) {
  require(x.size() == phi.size(), "thin: size mismatch");
  CountConfig y(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(phi[i] >= 0.0 && phi[i] <= 1.0, "thin: phi must lie in [0,1]");
    if (x[i] > 0) y[i] = std::binomial_distribution<long>(x[i], phi[i])(eng);
  }
  return y;
}

CountConfig pois(const std::vector<double>& phi, Engine& eng) {
  CountConfig y(phi.size(), 0);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    require(phi[i] >= 0.0, "pois: intensity must be nonnegative");
    if (phi[i] > 0.0) y[i] = std::poisson_distribution<long>(phi[i])(eng);
  }
  return y;
}

double thin_pgf(const CountConfig& x, const DensityConfig& phi, const DensityConfig& chi) {
  double r = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) r *= std::pow(1.0 - phi[i] * chi[i], static_cast<double>(x[i]));
  return r;
}

double pois_pgf(const std::vector<double>& phi, const DensityConfig& chi) {
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += phi[i] * chi[i];
  return std::exp(-s);
}

// ---------------------------------------------------------------------------
// couplings

ColorPath braco_color_coupling(const BcdParams& lo, const BcdParams& hi, const CountConfig& x,
                               const CountConfig& x_hi, const std::vector<double>& t_grid, Engine& eng) {
  lo.validate();
  hi.validate();
  check_grid(t_grid);
  require(same_kernel(lo.kernel, hi.kernel, 1e-12), "color coupling: kernels differ");
  require(lo.b <= hi.b && lo.c >= hi.c && lo.d >= hi.d, "color coupling: need b <= b~, c >= c~, d >= d~");
  const Kernel& k = lo.kernel;
  const std::size_t n = k.n;
  require(x.size() == n && x_hi.size() == n, "color coupling: wrong state size");
  CountConfig B = x, W(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(0 <= x[i] && x[i] <= x_hi[i], "color coupling: need x <= x~");
    W[i] = x_hi[i] - x[i];
  }
  std::vector<double> move(n);
  for (std::size_t i = 0; i < n; ++i) move[i] = k.row_sum(i) + k.leak[i];
  const double db = hi.b - lo.b, dc = lo.c - hi.c, dd = lo.d - hi.d;
  // Per black particle: move, branch b, spawn white b~-b, die d~, turn white d-d~.
  // Per white particle: move, branch b~, die d~. Pairs: any pair merges at 2c~,
  // black pairs additionally become black+white at 2(c-c~).
  auto site_rate = [&](std::size_t i) {
    const double b = static_cast<double>(B[i]), w = static_cast<double>(W[i]), m = b + w;
    return b * (move[i] + lo.b + db + hi.d + dd) + w * (move[i] + hi.b + hi.d) + hi.c * m * (m - 1.0) +
           dc * b * (b - 1.0);
  };
  SumTree tree(n);
  for (std::size_t i = 0; i < n; ++i) tree.set(i, site_rate(i));

  ColorPath out;
  auto record = [&] {
    out.lower.push_back(B);
    CountConfig u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = B[i] + W[i];
    out.upper.push_back(std::move(u));
  };
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double t = 0.0;
  std::size_t g = 0;
  long pop = total(x_hi);
  while (g < t_grid.size()) {
    const double R = tree.sum();
    if (R <= 0.0) break;
    const double tn = t + std::exponential_distribution<double>(R)(eng);
    while (g < t_grid.size() && t_grid[g] < tn) {
      record();
      ++g;
    }
    if (g == t_grid.size()) break;
    t = tn;
    const std::size_t i = tree.find(U(eng) * R);
    const double b = static_cast<double>(B[i]), w = static_cast<double>(W[i]), m = b + w;
    double u = U(eng) * site_rate(i);
    auto take = [&u](double r) {
      if (u < r) return true;
      u -= r;
      return false;
    };
    std::size_t touched = i;
    if (take(b * move[i])) {
      // black particle moves or leaves
      --B[i];
      if (u < b * k.row_sum(i)) {
        const std::size_t j = pick_target(k, i, u / b);
        ++B[j];
        touched = j;
      } else {
        --pop;
      }
    } else if (take(w * move[i])) {
      --W[i];
      if (u < w * k.row_sum(i)) {
        const std::size_t j = pick_target(k, i, u / w);
        ++W[j];
        touched = j;
      } else {
        --pop;
      }
    } else if (take(b * lo.b)) {
      ++B[i];
      ++pop;
    } else if (take(b * db + w * hi.b)) {
      ++W[i];
      ++pop;
    } else if (take(m * hi.d)) {
      if (u < b * hi.d) --B[i]; else --W[i];
      --pop;
    } else if (take(b * dd)) {
      --B[i];
      ++W[i];
    } else if (take(hi.c * m * (m - 1.0))) {
      // uniform ordered pair; the survivor is black if either parent is black
      if (u < hi.c * b * (b - 1.0)) --B[i]; else --W[i];
      --pop;
    } else {
      --B[i];
      ++W[i];
    }
    if (static_cast<double>(pop) > hi.guard) runaway(t, pop, hi.guard);
    tree.set(i, site_rate(i));
    if (touched != i) tree.set(touched, site_rate(touched));
  }
  while (out.lower.size() < t_grid.size()) record();
  return out;
}

ResemComparison resem_coupled(const BcdParams& lo, const BcdParams& hi, const DensityConfig& phi,
                              const DensityConfig& phi_hi, double t, Engine& eng) {
  lo.validate();
  hi.validate();
  require(lo.c == hi.c && lo.dt == hi.dt, "resem comparison: c and dt must agree");
  require(same_kernel(lo.kernel, hi.kernel, 1e-12), "resem comparison: kernels differ");
  const std::size_t n = lo.kernel.n;
  require(phi.size() == n && phi_hi.size() == n, "resem comparison: wrong state size");
  ResemStepper sl(lo), sh(hi);
  ResemComparison r{phi, phi_hi, 0, 0};
  std::vector<double> z(n);
  double s = 0.0;
  while (s < t - 1e-12 * std::max(1.0, t)) {
    const double h = std::min(lo.dt, t - s);
    fill_normal(z, eng);
    sl.step(r.lower, z, h);
    sh.step(r.upper, z, h);
    s += h;
    ++r.steps;
    for (std::size_t i = 0; i < n; ++i)
      if (r.lower[i] > r.upper[i]) ++r.violations;
  }
  return r;
}

// ---------------------------------------------------------------------------
// duality experiments

namespace {

double pow_prod(const DensityConfig& base, const CountConfig& e) {
  double r = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] > 0) r *= std::pow(base[i], static_cast<double>(e[i]));
  return r;
}

DensityConfig one_minus(const DensityConfig& v) {
  DensityConfig r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = 1.0 - v[i];
  return r;
}

double dot(const DensityConfig& a, const DensityConfig& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

DualityResult finish(const Estimate& lhs, const Estimate& rhs) {
  return {lhs, rhs, z_score(lhs, rhs)};
}

}  // namespace

DualityResult duality_test(const BcdParams& p, const CountConfig& x, const DensityConfig& phi, double t,
                           std::size_t reps, std::uint64_t seed, int oracle_cap) {
  p.validate();
  require(x.size() == p.kernel.n && phi.size() == p.kernel.n, "duality_test: wrong state size");
  require(t >= 0.0, "duality_test: t must be nonnegative");
  if (t == 0.0) {
    const double v = pow_prod(one_minus(phi), x);
    return finish(Estimate::exact_value(v), Estimate::exact_value(v));
  }
  const Stream root(seed);
  const auto lv = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kReplica).child(r).engine();
    return pow_prod(one_minus(resem_simulate(p, phi, t, eng)), x);
  });
  const BcdParams q = p.reversed();
  Estimate rhs;
  if (oracle_cap > 0) {
    const Generator Q = braco_generator(q.kernel, q.b, q.c, q.d, oracle_cap);
    const BracoSpace S(q.kernel.n, oracle_cap);
    std::vector<int> xi(x.begin(), x.end());
    const Distribution pt = transient_distribution(Q, point_mass(S.size(), S.encode(xi)), t);
    const DensityConfig om = one_minus(phi);
    rhs = Estimate::exact_value(expect(pt, [&](std::size_t s) {
      const auto y = S.decode(s);
      return pow_prod(om, CountConfig(y.begin(), y.end()));
    }));
  } else {
    const auto rv = map_replicas(reps, [&](std::size_t r) {
      Engine eng = root.child(channel::kDual).child(r).engine();
      return pow_prod(one_minus(phi), braco_simulate(q, x, t, eng));
    });
    rhs = mean_of(rv);
  }
  return finish(mean_of(lv), rhs);
}

DualityResult selfduality_test(const BcdParams& p, const DensityConfig& phi, const DensityConfig& psi, double t,
                               std::size_t reps, std::uint64_t seed) {
  p.validate();
  const double bc = p.ratio();
  require(phi.size() == p.kernel.n && psi.size() == p.kernel.n, "selfduality_test: wrong state size");
  if (t == 0.0) {
    const double v = std::exp(-bc * dot(phi, psi));
    return finish(Estimate::exact_value(v), Estimate::exact_value(v));
  }
  const Stream root(seed);
  const auto lv = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kReplica).child(r).engine();
    return std::exp(-bc * dot(resem_simulate(p, phi, t, eng), psi));
  });
  const BcdParams q = p.reversed();
  const auto rv = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kDual).child(r).engine();
    return std::exp(-bc * dot(phi, resem_simulate(q, psi, t, eng)));
  });
  return finish(mean_of(lv), mean_of(rv));
}

std::vector<DualityResult> poissonization_test(const BcdParams& p, const DensityConfig& phi, double t,
                                               const std::vector<DensityConfig>& psis, std::size_t reps,
                                               std::uint64_t seed) {
  p.validate();
  const double bc = p.ratio();
  const std::size_t n = p.kernel.n;
  require(phi.size() == n, "poissonization_test: wrong state size");
  for (const auto& psi : psis) require(psi.size() == n, "poissonization_test: wrong psi size");
  std::vector<double> inten(n);
  for (std::size_t i = 0; i < n; ++i) inten[i] = bc * phi[i];

  std::vector<DualityResult> out;
  if (t == 0.0) {
    for (const auto& psi : psis) {
      const double v = pois_pgf(inten, psi);
      out.push_back(finish(Estimate::exact_value(v), Estimate::exact_value(v)));
    }
    return out;
  }
  const Stream root(seed);
  // One braco run and one resem run per replica serve every psi.
  const auto X = map_replicas(reps, [&](std::size_t r) {
    Engine e0 = root.child(channel::kInitial).child(r).engine();
    Engine eng = root.child(channel::kReplica).child(r).engine();
    return braco_simulate(p, pois(inten, e0), t, eng);
  });
  const auto Y = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kDual).child(r).engine();
    return resem_simulate(p, phi, t, eng);
  });
  for (const auto& psi : psis) {
    std::vector<double> lv(reps), rv(reps);
    const DensityConfig om = one_minus(psi);
    for (std::size_t r = 0; r < reps; ++r) {
      lv[r] = pow_prod(om, X[r]);
      rv[r] = std::exp(-bc * dot(Y[r], psi));
    }
    out.push_back(finish(mean_of(lv), mean_of(rv)));
  }
  return out;
}

SubmartingaleReport submartingale_check(const BcdParams& p, const DensityConfig& phi0,
                                        const std::vector<double>& t_grid, std::size_t reps, std::uint64_t seed) {
  p.validate();
  const double bc = p.ratio();
  const Stream root(seed);
  const auto paths = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kReplica).child(r).engine();
    const auto path = resem_path(p, phi0, t_grid, eng);
    std::vector<double> v(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) v[k] = std::exp(-bc * total(path[k]));
    return v;
  });
  SubmartingaleReport rep;
  rep.t_grid = t_grid;
  const std::size_t m = t_grid.size();
  auto column = [&](std::size_t k) {
    std::vector<double> c(reps);
    for (std::size_t r = 0; r < reps; ++r) c[r] = paths[r][k];
    return c;
  };
  // Paired differences along the same paths.
  auto diff = [&](std::size_t k, std::size_t l) {
    std::vector<double> c(reps);
    for (std::size_t r = 0; r < reps; ++r) c[r] = paths[r][l] - paths[r][k];
    return estimate_mean(c);
  };
  for (std::size_t k = 0; k < m; ++k) rep.value.push_back(estimate_mean(column(k)));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = k + 1; l < m; ++l) {
      const Estimate dl = diff(k, l);
      if (std::abs(dl.mean) > 4.0 * dl.se) rep.flat = false;
      if (l == k + 1 && dl.mean < -4.0 * dl.se) rep.nondecreasing = false;
    }
  if (m >= 2) {
    const Estimate dl = diff(0, m - 1);
    rep.increase_z = dl.se > 0.0 ? dl.mean / dl.se : (dl.mean == 0.0 ? 0.0 : std::copysign(INFINITY, dl.mean));
  }
  return rep;
}

double maximal_bound(double b, double c, double d, double t) {
  require(c > 0.0 && t > 0.0, "maximal_bound: need c > 0 and t > 0");
  const double r = b - d + c;
  if (r == 0.0) return 1.0 / (c * t);
  return r / (c * -std::expm1(-r * t));
}

MaximalReport maximal_bound_check(const BcdParams& p, const std::vector<double>& t_grid, std::size_t reps,
                                  std::uint64_t seed, std::vector<long> caps) {
  p.validate();
  require(p.c > 0.0, "maximal_bound_check: needs c > 0");
  require(!caps.empty(), "maximal_bound_check: no caps");
  std::sort(caps.begin(), caps.end());
  const std::size_t n = p.kernel.n;
  const Stream root(seed);
  MaximalReport rep;
  rep.caps = caps;
  for (double t : t_grid) rep.rows.push_back({t, maximal_bound(p.b, p.c, p.d, t), {}, true});
  for (std::size_t ci = 0; ci < caps.size(); ++ci) {
    const CountConfig x0(n, caps[ci]);
    const auto paths = map_replicas(reps, [&](std::size_t r) {
      Engine eng = root.child(ci).child(r).engine();
      const auto path = braco_path(p, x0, t_grid, eng);
      std::vector<double> v(path.size());
      for (std::size_t k = 0; k < path.size(); ++k) v[k] = static_cast<double>(total(path[k])) / n;
      return v;
    });
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      std::vector<double> c(reps);
      for (std::size_t r = 0; r < reps; ++r) c[r] = paths[r][k];
      rep.rows[k].mean.push_back(estimate_mean(c));
    }
  }
  for (auto& row : rep.rows) {
    const Estimate& top = row.mean.back();
    row.within = top.mean <= row.bound + 4.0 * top.se;
    rep.bound_ok = rep.bound_ok && row.within;
    for (std::size_t ci = 0; ci + 1 < row.mean.size(); ++ci)
      if (z_score(row.mean[ci], row.mean[ci + 1]) > 4.0) rep.cap_monotone = false;
  }
  return rep;
}

namespace {

std::vector<double> histogram5(const std::vector<CountConfig>& xs) {
  std::vector<double> h(6, 0.0);
  double m = 0.0;
  for (const auto& x : xs)
    for (long v : x) {
      h[static_cast<std::size_t>(std::min(v, 5L))] += 1.0;
      m += 1.0;
    }
  for (auto& v : h) v /= m;
  return h;
}

}  // namespace

HomconvReport homconv_check(const BcdParams& p, double t_end, std::size_t reps, std::uint64_t seed, long cap) {
  p.validate();
  require(p.c > 0.0, "homconv_check: needs c > 0");
  for (double v : p.kernel.leak) require(v == 0.0, "homconv_check: needs a periodic window");
  const std::size_t n = p.kernel.n;
  const Stream root(seed);
  const std::vector<double> ones(n, 1.0);
  const auto A = map_replicas(reps, [&](std::size_t r) {
    Engine e0 = root.child(channel::kInitial).child(r).engine();
    Engine eng = root.child(channel::kReplica).child(r).engine();
    return braco_simulate(p, pois(ones, e0), t_end, eng);
  });
  const auto B = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kDual).child(r).engine();
    return braco_simulate(p, CountConfig(n, cap), t_end, eng);
  });
  HomconvReport rep{histogram5(A), histogram5(B), 0.0};
  rep.tv = tv_distance(rep.hist_pois, rep.hist_maximal);
  return rep;
}

MomentCheck factorial_moment_check(const BcdParams& p, const CountConfig& x0, double t, int k, std::size_t reps,
                                   std::uint64_t seed) {
  require(k >= 1, "factorial_moment_check: k must be >= 1");
  const Stream root(seed);
  const auto v = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kReplica).child(r).engine();
    return rising_factorial(static_cast<double>(total(braco_simulate(p, x0, t, eng))), k);
  });
  MomentCheck m;
  m.moment = estimate_mean(v);
  m.bound = rising_factorial(static_cast<double>(total(x0)), k) * std::exp(k * p.b * t);
  m.ok = m.moment.mean <= m.bound + 4.0 * m.moment.se;
  return m;
}

std::vector<Estimate> intermediate_mass(const BcdParams& p, const DensityConfig& phi0,
                                        const std::vector<double>& T_grid, double eps, std::size_t reps,
                                        std::uint64_t seed) {
  const double cut = eps * static_cast<double>(p.kernel.n);
  const Stream root(seed);
  const auto paths = map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kReplica).child(r).engine();
    const auto path = resem_path(p, phi0, T_grid, eng);
    std::vector<double> v(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
      const double m = total(path[k]);
      v[k] = (m > 0.0 && m < cut) ? 1.0 : 0.0;
    }
    return v;
  });
  std::vector<Estimate> out;
  for (std::size_t k = 0; k < T_grid.size(); ++k) {
    std::vector<double> c(reps);
    for (std::size_t r = 0; r < reps; ++r) c[r] = paths[r][k];
    out.push_back(estimate_mean(c));
  }
  return out;
}

}  // namespace ipslab
