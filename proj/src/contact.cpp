#include "ipslab/contact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ipslab/error.hpp"

namespace ipslab {

// ---------------------------------------------------------------- SiteSet

SiteSet SiteSet::full(std::size_t n) {
  SiteSet s(n);
  for (std::size_t i = 0; i < n; ++i) s.insert(i);
  return s;
}

SiteSet SiteSet::of(std::size_t n, std::initializer_list<std::size_t> sites) {
  SiteSet s(n);
  for (auto i : sites) {
    require(i < n, "SiteSet: site outside the window");
    s.insert(i);
  }
  return s;
}

std::size_t SiteSet::count() const {
  std::size_t c = 0;
  for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool SiteSet::empty() const {
  return std::all_of(w_.begin(), w_.end(), [](std::uint64_t w) { return w == 0; });
}

bool SiteSet::intersects(const SiteSet& o) const {
  for (std::size_t k = 0; k < w_.size(); ++k)
    if (w_[k] & o.w_[k]) return true;
  return false;
}

std::vector<std::size_t> SiteSet::members() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < w_.size(); ++k) {
    std::uint64_t w = w_[k];
    while (w) {
      out.push_back(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

SiteSet& SiteSet::operator|=(const SiteSet& o) {
  require(n_ == o.n_, "SiteSet: universes differ");
  for (std::size_t k = 0; k < w_.size(); ++k) w_[k] |= o.w_[k];
  return *this;
}

// ---------------------------------------------------------------- marks

namespace {

/// Superposition of all Poisson channels of the graphical representation.
struct Channels {
  std::size_t n = 0;
  double delta = 0.0;
  double recovery_mass = 0.0;
  double total = 0.0;
  std::vector<double> cum;  // cumulative arrow rates
  std::vector<std::pair<std::uint32_t, std::uint32_t>> arrows;

  Channels(const Kernel& k, double d) : n(k.n), delta(d) {
    require(d >= 0.0, "contact: need delta >= 0");
    recovery_mass = d * static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < k.n; ++i)
      for (const auto& [j, r] : k.rows[i]) {
        acc += r;
        cum.push_back(acc);
        arrows.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      }
    total = recovery_mass + acc;
  }

  /// Calls f(Event) for every mark in (0, T] in time order until f returns false.
  template <class F>
  void stream(double T, Engine& eng, F&& f) const {
    if (total <= 0.0) return;
    std::exponential_distribution<double> gap(total);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double t = 0.0;
    for (;;) {
      t += gap(eng);
      if (t > T) return;
      const double u = U(eng) * total;
      Event e{t, 0, 0};
      if (u < recovery_mass) {
        const auto i = std::min<std::size_t>(n - 1, static_cast<std::size_t>(u / delta));
        e.from = e.to = static_cast<std::uint32_t>(i);
      } else {
        const double v = u - recovery_mass;
        auto idx = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), v) - cum.begin());
        idx = std::min(idx, arrows.size() - 1);
        e.from = arrows[idx].first;
        e.to = arrows[idx].second;
      }
      if (!f(e)) return;
    }
  }
};

inline void apply_forward(SiteSet& s, const Event& e) {
  if (e.recovery()) {
    s.erase(e.from);
  } else if (s.contains(e.from)) {
    s.insert(e.to);
  }
}

inline void apply_backward(SiteSet& s, const Event& e) {
  if (e.recovery()) {
    s.erase(e.from);
  } else if (s.contains(e.to)) {
    s.insert(e.from);
  }
}

/// Runs several initial sets through the same marks up to time T.
std::vector<SiteSet> run_coupled(const Channels& ch, std::vector<SiteSet> sets, double T, Engine& eng) {
  ch.stream(T, eng, [&](const Event& e) {
    for (auto& s : sets) apply_forward(s, e);
    if (!e.recovery()) return true;
    return std::any_of(sets.begin(), sets.end(), [](const SiteSet& s) { return !s.empty(); });
  });
  return sets;
}

std::vector<std::size_t> to_sites(const GroupLattice& lat, const std::vector<Coord>& coords) {
  std::vector<std::size_t> out;
  for (const auto& c : coords) {
    auto s = lat.find(c);
    require(s.has_value(), "contact: coordinate outside the window");
    out.push_back(*s);
  }
  return out;
}

void check_model(const ContactModel& m) {
  require(m.kernel.n == m.lattice.size(), "contact: kernel and lattice sizes differ");
  require(m.delta >= 0.0, "contact: need delta >= 0");
}

}  // namespace

std::size_t GraphicalRep::recoveries_at(std::size_t i) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [i](const Event& e) { return e.recovery() && e.from == i; }));
}

std::size_t GraphicalRep::arrows(std::size_t i, std::size_t j) const {
  return static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [i, j](const Event& e) { return !e.recovery() && e.from == i && e.to == j; }));
}

std::string GraphicalRep::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "channel,time\n";
  for (const auto& e : events) {
    if (e.recovery()) {
      os << "r" << e.from << ',' << e.t << '\n';
    } else {
      os << e.from << "->" << e.to << ',' << e.t << '\n';
    }
  }
  return os.str();
}

GraphicalRep sample_graphical(const Kernel& k, double delta, double T, const Stream& stream) {
  require(T > 0.0, "sample_graphical: need T > 0");
  const Channels ch(k, delta);
  GraphicalRep rep;
  rep.n = k.n;
  rep.T = T;
  rep.delta = delta;
  rep.seed = stream.key();
  Engine eng = stream.engine();
  ch.stream(T, eng, [&](const Event& e) {
    rep.events.push_back(e);
    return true;
  });
  return rep;
}

GraphicalRep sample_graphical(const Kernel& k, double delta, double T, std::uint64_t seed) {
  return sample_graphical(k, delta, T, Stream(seed));
}

SiteSet forward(const GraphicalRep& rep, const SiteSet& A, double t0, double t) {
  require(t0 >= 0.0 && t >= 0.0 && t0 + t <= rep.T * (1 + 1e-12), "forward: time window outside the horizon");
  require(A.universe() == rep.n, "forward: set has the wrong universe");
  SiteSet s = A;
  auto it = std::upper_bound(rep.events.begin(), rep.events.end(), t0,
                             [](double v, const Event& e) { return v < e.t; });
  const double t1 = t0 + t;
  for (; it != rep.events.end() && it->t <= t1; ++it) apply_forward(s, *it);
  return s;
}

SiteSet dual_backward(const GraphicalRep& rep, const SiteSet& B, double t1, double s) {
  require(s >= 0.0 && t1 - s >= 0.0 && t1 <= rep.T * (1 + 1e-12), "dual_backward: time window outside the horizon");
  require(B.universe() == rep.n, "dual_backward: set has the wrong universe");
  SiteSet cur = B;
  auto end = std::upper_bound(rep.events.begin(), rep.events.end(), t1,
                              [](double v, const Event& e) { return v < e.t; });
  const double t0 = t1 - s;
  for (auto it = std::make_reverse_iterator(end); it != rep.events.rend() && it->t > t0; ++it)
    apply_backward(cur, *it);
  return cur;
}

// ---------------------------------------------------------------- growth

namespace {

std::vector<std::vector<double>> size_paths(const ContactModel& m, const SiteSet& A,
                                            const std::vector<double>& t_grid, std::size_t reps,
                                            std::uint64_t seed) {
  check_model(m);
  require(!t_grid.empty(), "expected_size: empty time grid");
  for (std::size_t g = 1; g < t_grid.size(); ++g)
    require(t_grid[g] > t_grid[g - 1], "expected_size: time grid must increase");
  require(t_grid.front() >= 0.0, "expected_size: negative time");
  const Channels ch(m.kernel, m.delta);
  const Stream root(seed);
  return map_replicas(reps, [&](std::size_t r) {
    Engine eng = root.child(channel::kReplica).child(r).engine();
    std::vector<double> sizes(t_grid.size(), 0.0);
    SiteSet s = A;
    std::size_t g = 0;
    while (g < t_grid.size() && t_grid[g] <= 0.0) sizes[g++] = static_cast<double>(s.count());
    ch.stream(t_grid.back(), eng, [&](const Event& e) {
      while (g < t_grid.size() && t_grid[g] < e.t) sizes[g++] = static_cast<double>(s.count());
      apply_forward(s, e);
      return !s.empty();
    });
    const double last = static_cast<double>(s.count());
    while (g < t_grid.size()) sizes[g++] = last;
    return sizes;
  });
}

double log_slope(const std::vector<double>& t, const std::vector<double>& mean, std::size_t from) {
  std::vector<double> x, y;
  for (std::size_t g = from; g < t.size(); ++g) {
    if (mean[g] <= 0.0) continue;
    x.push_back(t[g]);
    y.push_back(std::log(mean[g]));
  }
  if (x.size() < 2) return std::nan("");
  return ols_slope(x, y);
}

}  // namespace

std::vector<Estimate> expected_size(const ContactModel& m, const SiteSet& A, const std::vector<double>& t_grid,
                                    std::size_t reps, std::uint64_t seed) {
  const auto paths = size_paths(m, A, t_grid, reps, seed);
  std::vector<Estimate> out;
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    RunningStats s;
    for (const auto& p : paths) s.add(p[g]);
    out.push_back(s.estimate());
  }
  return out;
}

GrowthFit estimate_growth_rate(const ContactModel& m, const SiteSet& A, const std::vector<double>& t_grid,
                               std::size_t reps, std::uint64_t seed, std::size_t bootstrap) {
  require(t_grid.size() >= 3, "estimate_growth_rate: need at least 3 grid points");
  const auto paths = size_paths(m, A, t_grid, reps, seed);
  const std::size_t G = t_grid.size();
  const bool any_alive = std::any_of(paths.begin(), paths.end(), [](const auto& p) { return p[1] > 0.0; });
  if (!any_alive) throw Error("estimate_growth_rate: all replicas extinct before the second grid point");

  GrowthFit fit;
  std::vector<double> mean(G, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    RunningStats s;
    for (const auto& p : paths) s.add(p[g]);
    fit.mean_size.push_back(s.estimate());
    mean[g] = s.mean();
  }
  const std::size_t from = G / 2;
  fit.r_hat = log_slope(t_grid, mean, from);
  if (std::isnan(fit.r_hat)) throw Error("estimate_growth_rate: degenerate fit (too few nonzero means)");

  Engine eng = Stream(seed).child(channel::kAux).engine();
  std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  std::vector<double> slopes;
  std::vector<double> bm(G);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    std::fill(bm.begin(), bm.end(), 0.0);
    for (std::size_t r = 0; r < paths.size(); ++r) {
      const auto& p = paths[pick(eng)];
      for (std::size_t g = 0; g < G; ++g) bm[g] += p[g];
    }
    const double s = log_slope(t_grid, bm, from);
    if (!std::isnan(s)) slopes.push_back(s);
  }
  if (slopes.empty()) {
    fit.ci_lo = fit.ci_hi = fit.r_hat;
  } else {
    std::sort(slopes.begin(), slopes.end());
    fit.ci_lo = slopes[static_cast<std::size_t>(0.025 * static_cast<double>(slopes.size() - 1))];
    fit.ci_hi = slopes[static_cast<std::size_t>(0.975 * static_cast<double>(slopes.size() - 1))];
  }
  fit.bracket_ok = fit.ci_hi >= -m.delta && fit.ci_lo <= m.kernel.total - m.delta;
  return fit;
}

// ---------------------------------------------------------------- Campbell law

PiEstimate pi_lambda_hat(const ContactModel& m, const SiteSet& A, double lambda, std::size_t reps,
                         std::uint64_t seed, double horizon) {
  check_model(m);
  require(lambda > 0.0, "pi_lambda_hat: need lambda > 0 (the growth rate on a finite window is <= 0)");
  const Channels ch(m.kernel, m.delta);
  const Stream root(seed);
  const auto draws = map_replicas(reps, [&](std::size_t r) {
    const Stream s = root.child(channel::kReplica).child(r);
    Engine clock = s.child(channel::kClock).engine();
    const double tau = std::exponential_distribution<double>(lambda)(clock);
    Engine eng = s.engine();
    const auto out = run_coupled(ch, {A}, tau, eng);
    return std::pair{static_cast<double>(out[0].count()), tau > horizon};
  });
  PiEstimate est;
  RunningStats st;
  for (const auto& [size, ext] : draws) {
    st.add(size / lambda);
    est.extensions += ext ? 1 : 0;
  }
  est.pi = st.estimate();
  return est;
}

CampbellDraws campbell_sample(const ContactModel& m, const SiteSet& A, double lambda, std::size_t batch,
                              std::size_t count, std::uint64_t seed) {
  check_model(m);
  require(lambda > 0.0, "campbell_sample: need lambda > 0");
  require(batch >= 1, "campbell_sample: need batch >= 1");
  const Channels ch(m.kernel, m.delta);
  const Stream root(seed);
  struct One {
    CampbellSample s;
    std::size_t retries;
  };
  const auto drawn = map_replicas(count, [&](std::size_t d) -> One {
    const Stream sd = root.child(channel::kReplica).child(d);
    for (std::size_t attempt = 0;; ++attempt) {
      require(attempt < 1000, "campbell_sample: every batch came back empty");
      const Stream sa = sd.child(attempt);
      std::vector<SiteSet> configs;
      std::vector<double> taus, sizes;
      double total = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const Stream sb = sa.child(b);
        Engine clock = sb.child(channel::kClock).engine();
        const double tau = std::exponential_distribution<double>(lambda)(clock);
        Engine eng = sb.engine();
        auto out = run_coupled(ch, {A}, tau, eng);
        sizes.push_back(static_cast<double>(out[0].count()));
        total += sizes.back();
        taus.push_back(tau);
        configs.push_back(std::move(out[0]));
      }
      if (total == 0.0) continue;
      Engine pickeng = sa.child(channel::kAux).engine();
      std::discrete_distribution<std::size_t> pick(sizes.begin(), sizes.end());
      const std::size_t idx = pick(pickeng);
      const auto mem = configs[idx].members();
      const std::size_t iota = mem[std::uniform_int_distribution<std::size_t>(0, mem.size() - 1)(pickeng)];
      return {{iota, taus[idx], configs[idx], total / static_cast<double>(batch)}, attempt};
    }
  });
  CampbellDraws out;
  for (const auto& o : drawn) {
    out.samples.push_back(o.s);
    out.retries += o.retries;
  }
  return out;
}

CharCheck char_check(const ContactModel& m, const std::vector<Coord>& A, double lambda, std::size_t reps,
                     std::uint64_t seed) {
  check_model(m);
  require(m.lattice.group_closed(), "char_check: needs a group-closed window");
  require(lambda > 0.0, "char_check: need lambda > 0");
  const auto& lat = m.lattice;
  const std::size_t n = lat.size();
  const auto a_sites = to_sites(lat, A);
  const std::size_t o = lat.origin();
  const Stream root(seed);

  // Left side: forward process from the origin, size-biased typical site.
  const Channels fwd(m.kernel, m.delta);
  const Stream sl = root.child(1);
  const auto left = map_replicas(reps, [&](std::size_t r) {
    const Stream s = sl.child(r);
    Engine clock = s.child(channel::kClock).engine();
    const double tau = std::exponential_distribution<double>(lambda)(clock);
    Engine eng = s.engine();
    const auto eta = run_coupled(fwd, {SiteSet::of(n, {o})}, tau, eng)[0];
    double hits = 0.0;
    for (std::size_t i : eta.members()) {
      bool miss = true;
      for (std::size_t a : a_sites)
        if (eta.contains(*lat.op(i, a))) {
          miss = false;
          break;
        }
      hits += miss ? 1.0 : 0.0;
    }
    return std::pair{hits, static_cast<double>(eta.count())};
  });

  // Right side: reversed process from A u {0}, A and {0} on shared marks.
  const Channels bwd(reverse_kernel(m.kernel), m.delta);
  SiteSet a_set(n);
  for (auto a : a_sites) a_set.insert(a);
  SiteSet a0 = a_set;
  a0.insert(o);
  const Stream sr = root.child(2);
  const auto right = map_replicas(reps, [&](std::size_t r) {
    const Stream s = sr.child(r);
    Engine clock = s.child(channel::kClock).engine();
    const double tau = std::exponential_distribution<double>(lambda)(clock);
    Engine eng = s.engine();
    const auto out = run_coupled(bwd, {a0, a_set, SiteSet::of(n, {o})}, tau, eng);
    return std::pair{static_cast<double>(out[0].count()) - static_cast<double>(out[1].count()),
                     static_cast<double>(out[2].count())};
  });

  auto ratio = [](const auto& pairs) {
    std::vector<double> num, den;
    for (const auto& [x, y] : pairs) {
      num.push_back(x);
      den.push_back(y);
    }
    Estimate e = ratio_of_means(num, den);
    // Ratios that are identically 0 or 1 on every replica are exact.
    const bool exact = std::all_of(pairs.begin(), pairs.end(), [&](const auto& p) {
      return p.first == 0.0 || p.first == p.second;
    }) && (e.mean == 0.0 || e.mean == 1.0);
    if (exact) e.exact = true;
    return e;
  };
  CharCheck c;
  c.lhs = ratio(left);
  c.rhs = ratio(right);
  c.z = z_score(c.lhs, c.rhs);
  return c;
}

TypicalSiteLaw typical_site_law(const ContactModel& m, const SiteSet& A, double lambda,
                                const std::vector<Coord>& Delta, std::size_t reps, std::uint64_t seed,
                                double T_back) {
  check_model(m);
  require(m.lattice.group_closed(), "typical_site_law: needs a group-closed window");
  require(lambda > 0.0, "typical_site_law: need lambda > 0");
  require(Delta.size() <= 63, "typical_site_law: Delta too large");
  require(T_back >= 0.0, "typical_site_law: need T_back >= 0");
  const auto& lat = m.lattice;
  const std::size_t n = lat.size();
  const auto d_sites = to_sites(lat, Delta);
  const Channels ch(m.kernel, m.delta);
  const Stream root(seed);

  struct Rep {
    std::map<std::uint64_t, double> counts;
    double size = 0, agree_u = 0, agree_f = 0, tau = 0;
  };
  const auto per_rep = map_replicas(reps, [&](std::size_t r) {
    const Stream s = root.child(channel::kReplica).child(r);
    Engine clock = s.child(channel::kClock).engine();
    const double tau = std::exponential_distribution<double>(lambda)(clock);
    Engine eng = s.engine();
    SiteSet upper = SiteSet::full(n);
    SiteSet full = SiteSet::full(n);
    SiteSet eta = A;
    ch.stream(T_back + tau, eng, [&](const Event& e) {
      apply_forward(upper, e);
      if (e.t > T_back) {
        apply_forward(full, e);
        apply_forward(eta, e);
      }
      return true;
    });
    auto pattern = [&](const SiteSet& x, std::size_t i) {
      std::uint64_t p = 0;
      for (std::size_t k = 0; k < d_sites.size(); ++k)
        if (x.contains(*lat.op(i, d_sites[k]))) p |= std::uint64_t{1} << k;
      return p;
    };
    Rep out;
    out.tau = tau;
    for (std::size_t i : eta.members()) {
      const auto p = pattern(eta, i);
      out.counts[p] += 1.0;
      out.size += 1.0;
      out.agree_u += p == pattern(upper, i) ? 1.0 : 0.0;
      out.agree_f += p == pattern(full, i) ? 1.0 : 0.0;
    }
    return out;
  });

  TypicalSiteLaw law;
  std::vector<double> size, au, af;
  double total = 0.0, tau_w = 0.0;
  for (const auto& r : per_rep) {
    for (const auto& [p, c] : r.counts) law.law[p] += c;
    size.push_back(r.size);
    au.push_back(r.agree_u);
    af.push_back(r.agree_f);
    total += r.size;
    tau_w += r.size * r.tau;
  }
  require(total > 0.0, "typical_site_law: every replica was empty at its clock");
  for (auto& [p, c] : law.law) c /= total;
  law.agree_upper = ratio_of_means(au, size);
  law.agree_full = ratio_of_means(af, size);
  law.tau_mean = tau_w / total;
  return law;
}

CouplingResult onedim_coupling_time(const GroupLattice& lat, const Kernel& k, const GraphicalRep& rep, std::size_t i,
                                    std::size_t j) {
  require(lat.kind() == LatticeKind::torus && lat.dim() == 1, "onedim_coupling_time: needs a 1D lattice");
  for (std::size_t s = 0; s < k.n; ++s)
    for (const auto& [t, r] : k.rows[s]) require(lat.distance(s, t) == 1, "onedim_coupling_time: kernel is not nearest-neighbour");
  CouplingResult res;
  if (i == j) {
    res.time = 0.0;
    return res;
  }
  SiteSet a = SiteSet::of(rep.n, {i});
  SiteSet b = SiteSet::of(rep.n, {j});
  for (const auto& e : rep.events) {
    apply_forward(a, e);
    apply_forward(b, e);
    if (a == b) {
      if (a.empty()) {
        res.extinct = true;
        return res;
      }
      res.time = e.t;
      return res;
    }
    if (a.empty() || b.empty()) {
      res.extinct = true;
      return res;
    }
  }
  return res;
}

}  // namespace ipslab
