#include "ipslab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "ipslab/error.hpp"

namespace ipslab {

namespace {

int wrap(int v, int lo, int L) {
  int r = (v - lo) % L;
  if (r < 0) r += L;
  return r + lo;
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

GroupLattice GroupLattice::torus(int d, int L, Boundary boundary) {
  require(d >= 1, "torus: need d >= 1");
  require(L >= 2, "torus: need L >= 2");
  const std::size_t n = ipow(static_cast<std::size_t>(L), d);
  require(n <= (std::size_t{1} << 24), "torus: window too large");
  GroupLattice g;
  g.kind_ = LatticeKind::torus;
  g.boundary_ = boundary;
  g.d_ = d;
  g.L_ = L;
  g.lo_ = -(L / 2);
  g.coords_.resize(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    Coord c(d);
    std::size_t r = idx;
    for (int k = 0; k < d; ++k) {
      c[k] = static_cast<int>(r % static_cast<std::size_t>(L)) + g.lo_;
      r /= static_cast<std::size_t>(L);
    }
    g.coords_[idx] = std::move(c);
  }
  g.origin_ = g.torus_index(Coord(d, 0));
  g.build_adjacency();
  return g;
}

GroupLattice GroupLattice::tree_ball(int d, int depth) {
  require(d >= 2, "tree_ball: need d >= 2");
  require(depth >= 0, "tree_ball: need depth >= 0");
  GroupLattice g;
  g.kind_ = LatticeKind::tree_ball;
  g.boundary_ = Boundary::killed;
  g.d_ = d;
  g.depth_ = depth;
  g.coords_.push_back({});
  g.tree_level_.push_back(0);
  g.tree_parent_.push_back(0);
  g.adj_.emplace_back();
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    const int lvl = g.tree_level_[v];
    if (lvl == depth) continue;
    const int kids = lvl == 0 ? d + 1 : d;
    for (int c = 0; c < kids; ++c) {
      const std::size_t w = g.coords_.size();
      require(w < (std::size_t{1} << 24), "tree_ball: window too large");
      Coord path = g.coords_[v];
      path.push_back(c);
      g.coords_.push_back(std::move(path));
      g.tree_level_.push_back(lvl + 1);
      g.tree_parent_.push_back(v);
      g.adj_.emplace_back(std::vector<std::size_t>{v});
      g.adj_[v].push_back(w);
      queue.push_back(w);
    }
  }
  g.origin_ = 0;
  return g;
}

GroupLattice GroupLattice::hierarchical(int N, int depth) {
  require(N >= 2, "hierarchical: need N >= 2");
  require(depth >= 1, "hierarchical: need depth >= 1");
  const std::size_t n = ipow(static_cast<std::size_t>(N), depth);
  require(n <= (std::size_t{1} << 24), "hierarchical: window too large");
  GroupLattice g;
  g.kind_ = LatticeKind::hierarchical;
  g.boundary_ = Boundary::periodic;
  g.d_ = depth;
  g.L_ = N;
  g.depth_ = depth;
  g.coords_.resize(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    Coord c(depth);
    std::size_t r = idx;
    for (int k = 0; k < depth; ++k) {
      c[k] = static_cast<int>(r % static_cast<std::size_t>(N));
      r /= static_cast<std::size_t>(N);
    }
    g.coords_[idx] = std::move(c);
  }
  g.origin_ = 0;
  g.build_adjacency();
  return g;
}

std::string GroupLattice::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case LatticeKind::torus:
      os << "torus(d=" << d_ << ",L=" << L_ << ","
         << (boundary_ == Boundary::periodic ? "periodic" : "killed") << ")";
      break;
    case LatticeKind::tree_ball:
      os << "tree_ball(d=" << d_ << ",depth=" << depth_ << ")";
      break;
    case LatticeKind::hierarchical:
      os << "hierarchical(N=" << L_ << ",depth=" << depth_ << ")";
      break;
  }
  return os.str();
}

std::size_t GroupLattice::torus_index(const Coord& c) const {
  std::size_t idx = 0;
  for (int k = d_ - 1; k >= 0; --k) idx = idx * static_cast<std::size_t>(L_) + static_cast<std::size_t>(c[k] - lo_);
  return idx;
}

std::optional<std::size_t> GroupLattice::find(const Coord& c) const {
  switch (kind_) {
    case LatticeKind::torus: {
      if (static_cast<int>(c.size()) != d_) return std::nullopt;
      Coord w(c);
      for (int k = 0; k < d_; ++k) {
        if (boundary_ == Boundary::periodic) {
          w[k] = wrap(c[k], lo_, L_);
        } else if (c[k] < lo_ || c[k] >= lo_ + L_) {
          return std::nullopt;
        }
      }
      return torus_index(w);
    }
    case LatticeKind::hierarchical: {
      if (static_cast<int>(c.size()) != depth_) return std::nullopt;
      std::size_t idx = 0;
      for (int k = depth_ - 1; k >= 0; --k) {
        if (c[k] < 0 || c[k] >= L_) return std::nullopt;
        idx = idx * static_cast<std::size_t>(L_) + static_cast<std::size_t>(c[k]);
      }
      return idx;
    }
    case LatticeKind::tree_ball: {
      std::size_t v = 0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        const int kids = k == 0 ? d_ + 1 : d_;
        if (c[k] < 0 || c[k] >= kids || static_cast<int>(k) >= depth_) return std::nullopt;
        v = adj_[v][(k == 0 ? 0 : 1) + static_cast<std::size_t>(c[k])];
      }
      return v;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> GroupLattice::shift(std::size_t i, const Coord& offset) const {
  if (kind_ == LatticeKind::tree_ball) return std::nullopt;
  Coord c = coords_[i];
  if (offset.size() != c.size()) throw Error("shift: offset has wrong dimension");
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] += offset[k];
    if (kind_ == LatticeKind::hierarchical) c[k] = ((c[k] % L_) + L_) % L_;
  }
  return find(c);
}

std::optional<std::size_t> GroupLattice::op(std::size_t i, std::size_t j) const {
  if (kind_ == LatticeKind::tree_ball) return std::nullopt;
  return shift(i, coords_[j]);
}

std::optional<std::size_t> GroupLattice::inverse(std::size_t i) const {
  if (kind_ == LatticeKind::tree_ball) return std::nullopt;
  Coord c = coords_[i];
  for (auto& v : c) v = -v;
  if (kind_ == LatticeKind::hierarchical)
    for (auto& v : c) v = ((v % L_) + L_) % L_;
  return find(c);
}

int GroupLattice::distance(std::size_t i, std::size_t j) const {
  switch (kind_) {
    case LatticeKind::torus: {
      int s = 0;
      for (int k = 0; k < d_; ++k) {
        int diff = std::abs(coords_[i][k] - coords_[j][k]);
        if (boundary_ == Boundary::periodic) diff = std::min(diff, L_ - diff);
        s += diff;
      }
      return s;
    }
    case LatticeKind::hierarchical: {
      for (int k = depth_ - 1; k >= 0; --k)
        if (coords_[i][k] != coords_[j][k]) return k + 1;
      return 0;
    }
    case LatticeKind::tree_ball: {
      std::size_t a = i, b = j;
      int dist = 0;
      while (tree_level_[a] > tree_level_[b]) a = tree_parent_[a], ++dist;
      while (tree_level_[b] > tree_level_[a]) b = tree_parent_[b], ++dist;
      while (a != b) a = tree_parent_[a], b = tree_parent_[b], dist += 2;
      return dist;
    }
  }
  return 0;
}

std::size_t GroupLattice::full_degree(std::size_t) const {
  switch (kind_) {
    case LatticeKind::torus:
      return static_cast<std::size_t>(2 * d_);
    case LatticeKind::hierarchical:
      return static_cast<std::size_t>(L_ - 1);
    case LatticeKind::tree_ball:
      return static_cast<std::size_t>(d_ + 1);
  }
  return 0;
}

void GroupLattice::build_adjacency() {
  adj_.assign(coords_.size(), {});
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    auto& nb = adj_[i];
    if (kind_ == LatticeKind::torus) {
      for (int k = 0; k < d_; ++k)
        for (int s : {-1, 1}) {
          Coord off(d_, 0);
          off[k] = s;
          if (auto j = shift(i, off); j && *j != i) nb.push_back(*j);
        }
    } else {
      Coord c = coords_[i];
      for (int v = 0; v < L_; ++v) {
        if (v == c[0]) continue;
        Coord w = c;
        w[0] = v;
        nb.push_back(*find(w));
      }
    }
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

double Kernel::rate(std::size_t i, std::size_t j) const {
  const auto& r = rows[i];
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const auto& e, std::size_t t) { return e.first < t; });
  return (it != r.end() && it->first == j) ? it->second : 0.0;
}

double Kernel::row_sum(std::size_t i) const {
  double s = 0.0;
  for (const auto& [j, r] : rows[i]) s += r;
  return s;
}

std::vector<std::tuple<std::size_t, std::size_t, double>> Kernel::triplets() const {
  std::vector<std::tuple<std::size_t, std::size_t, double>> out;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, r] : rows[i]) out.emplace_back(i, j, r);
  return out;
}

std::string Kernel::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "i,j,rate\n";
  for (const auto& [i, j, r] : triplets()) os << i << ',' << j << ',' << r << '\n';
  return os.str();
}

namespace {

Kernel finalize(std::vector<std::map<std::size_t, double>>&& acc, std::vector<double>&& leak,
                double total, std::vector<std::pair<Coord, double>> base) {
  Kernel k;
  k.n = acc.size();
  k.rows.resize(k.n);
  for (std::size_t i = 0; i < k.n; ++i)
    for (const auto& [j, r] : acc[i])
      if (r > 0.0) k.rows[i].emplace_back(j, r);
  k.leak = std::move(leak);
  k.total = total;
  k.base = std::move(base);
  return k;
}

}  // namespace

Kernel kernel_from_base(const GroupLattice& lat, const std::vector<std::pair<Coord, double>>& base) {
  const std::size_t n = lat.size();
  std::vector<std::map<std::size_t, double>> acc(n);
  std::vector<double> leak(n, 0.0);
  double total = 0.0;
  for (const auto& [off, r] : base) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error("kernel_from_base: negative or non-finite rate");
    total += r;
  }
  if (lat.kind() == LatticeKind::tree_ball) {
    if (base.size() > 1) throw Error("kernel_from_base: tree balls take a single per-edge rate");
    const double r = base.empty() ? 0.0 : base.front().second;
    total = r * static_cast<double>(lat.full_degree(0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : lat.neighbors(i)) acc[i][j] += r;
      leak[i] = r * static_cast<double>(lat.full_degree(i) - lat.neighbors(i).size());
    }
    return finalize(std::move(acc), std::move(leak), total, base);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [off, r] : base) {
      if (r == 0.0) continue;
      if (std::all_of(off.begin(), off.end(), [](int v) { return v == 0; }))
        throw Error("kernel_from_base: base must not charge the unit element");
      if (auto j = lat.shift(i, off)) {
        acc[i][*j] += r;
      } else {
        leak[i] += r;
      }
    }
  }
  return finalize(std::move(acc), std::move(leak), total, base);
}

Kernel nearest_neighbor_kernel(const GroupLattice& lat, double rate) {
  if (lat.kind() == LatticeKind::tree_ball) return kernel_from_base(lat, {{Coord{1}, rate}});
  if (lat.kind() == LatticeKind::hierarchical) {
    std::vector<std::pair<Coord, double>> base;
    for (int v = 1; v < lat.side(); ++v) {
      Coord c(lat.depth(), 0);
      c[0] = v;
      base.emplace_back(c, rate);
    }
    return kernel_from_base(lat, base);
  }
  std::vector<std::pair<Coord, double>> base;
  for (int k = 0; k < lat.dim(); ++k)
    for (int s : {1, -1}) {
      Coord c(lat.dim(), 0);
      c[k] = s;
      base.emplace_back(c, rate);
    }
  return kernel_from_base(lat, base);
}

Kernel isolated_kernel(std::size_t n) {
  Kernel k;
  k.n = n;
  k.rows.resize(n);
  k.leak.assign(n, 0.0);
  return k;
}

Kernel drift_kernel_1d(const GroupLattice& lat, double right, double left) {
  require(lat.kind() == LatticeKind::torus && lat.dim() == 1, "drift_kernel_1d: needs a 1D torus");
  return kernel_from_base(lat, {{Coord{1}, right}, {Coord{-1}, left}});
}

double hierarchical_rate(int N, int dist, const std::function<double(int)>& c, double tol) {
  if (dist <= 0) return 0.0;
  double sum = 0.0;
  double prev = 0.0;
  for (int k = dist; k < dist + 100000; ++k) {
    const double ck = c(k - 1);
    if (!(ck > 0.0)) throw Error("hierarchical_rate: migration constants must be positive");
    const double term = ck / std::pow(static_cast<double>(N), 2 * k - 1);
    sum += term;
    if (!std::isfinite(sum)) throw Error("hierarchical_rate: series diverges");
    if (k > dist) {
      const double q = std::max(term / prev, 1.0 / (static_cast<double>(N) * N));
      if (q < 1.0 && term * q / (1.0 - q) < tol) return sum;
    }
    prev = term;
  }
  throw Error("hierarchical_rate: series does not converge");
}

Kernel hierarchical_kernel(const GroupLattice& lat, const std::function<double(int)>& c) {
  require(lat.kind() == LatticeKind::hierarchical, "hierarchical_kernel: needs a hierarchical lattice");
  std::vector<std::pair<Coord, double>> base;
  std::vector<double> by_dist(lat.depth() + 1, 0.0);
  for (int r = 1; r <= lat.depth(); ++r) by_dist[r] = hierarchical_rate(lat.side(), r, c);
  for (std::size_t j = 0; j < lat.size(); ++j) {
    const int r = lat.distance(lat.origin(), j);
    if (r > 0) base.emplace_back(lat.coord(j), by_dist[r]);
  }
  return kernel_from_base(lat, base);
}

Kernel reverse_kernel(const Kernel& k) {
  std::vector<std::map<std::size_t, double>> acc(k.n);
  std::vector<double> inflow(k.n, 0.0);
  for (std::size_t i = 0; i < k.n; ++i)
    for (const auto& [j, r] : k.rows[i]) {
      acc[j][i] += r;
      inflow[j] += r;
    }
  std::vector<double> leak(k.n, 0.0);
  for (std::size_t i = 0; i < k.n; ++i) {
    // On a unimodular group every site receives total mass |a|; what does not
    // come from inside the window comes from outside.
    const double out = k.total - inflow[i];
    leak[i] = out > 1e-12 * k.total ? out : 0.0;
  }
  std::vector<std::pair<Coord, double>> base;
  for (const auto& [off, r] : k.base) {
    Coord c(off);
    for (auto& v : c) v = -v;
    base.emplace_back(std::move(c), r);
  }
  return finalize(std::move(acc), std::move(leak), k.total, std::move(base));
}

bool same_kernel(const Kernel& a, const Kernel& b, double tol) {
  if (a.n != b.n || std::abs(a.total - b.total) > tol) return false;
  for (std::size_t i = 0; i < a.n; ++i) {
    if (a.rows[i].size() != b.rows[i].size()) return false;
    for (std::size_t e = 0; e < a.rows[i].size(); ++e) {
      if (a.rows[i][e].first != b.rows[i][e].first) return false;
      if (std::abs(a.rows[i][e].second - b.rows[i][e].second) > tol) return false;
    }
    if (std::abs(a.leak[i] - b.leak[i]) > tol + 1e-12 * a.total) return false;
  }
  return true;
}

double translation_defect(const GroupLattice& lat, const Kernel& k) {
  require(lat.group_closed(), "translation_defect: window is not group-closed");
  double worst = 0.0;
  for (std::size_t g = 0; g < lat.size(); ++g)
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const std::size_t gi = *lat.op(g, i);
      for (const auto& [j, r] : k.rows[i]) worst = std::max(worst, std::abs(k.rate(gi, *lat.op(g, j)) - r));
      if (k.rows[gi].size() != k.rows[i].size()) worst = std::max(worst, 1.0);
    }
  return worst;
}

namespace {

std::vector<double> apply_symmetrized(const Kernel& k, const std::vector<double>& g) {
  std::vector<double> out(k.n, 0.0);
  for (std::size_t i = 0; i < k.n; ++i)
    for (const auto& [j, r] : k.rows[i]) {
      out[i] += r * g[j];
      out[j] += r * g[i];
    }
  return out;
}

}  // namespace

double ls_domination_constant(const Kernel& k, const std::vector<double>& g) {
  const auto ag = apply_symmetrized(k, g);
  double K = 0.0;
  for (std::size_t i = 0; i < k.n; ++i) {
    if (!(g[i] > 0.0)) return std::numeric_limits<double>::infinity();
    K = std::max(K, ag[i] / g[i]);
  }
  return K;
}

LSWeights ls_weights(const GroupLattice& lat, const Kernel& k, double eps, const std::vector<double>& seed) {
  require(eps > 0.0, "ls_weights: need eps > 0");
  std::vector<double> phi = seed;
  if (phi.empty()) {
    phi.resize(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) phi[i] = std::exp(-static_cast<double>(lat.distance(lat.origin(), i)));
  }
  require(phi.size() == lat.size(), "ls_weights: seed has wrong length");
  const double as = 2.0 * k.total;
  std::vector<double> gamma = phi;
  std::vector<double> term = phi;
  double w = 1.0;
  for (int step = 1; step < 100000; ++step) {
    w *= std::exp(-eps);
    if (w < 1e-16) break;
    if (as > 0.0) {
      term = apply_symmetrized(k, term);
      for (auto& v : term) v /= as;
    }
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma[i] += w * term[i];
  }
  return {gamma, ls_domination_constant(k, gamma)};
}

const char* to_string(Recurrence r) {
  switch (r) {
    case Recurrence::recurrent:
      return "recurrent";
    case Recurrence::transient:
      return "transient";
    case Recurrence::undetermined:
      return "undetermined";
  }
  return "?";
}

DkSeries dk_series(const std::function<double(int)>& c, int N, int kmax) {
  require(N >= 2, "dk_series: need N >= 2");
  require(kmax >= 0, "dk_series: need kmax >= 0");
  DkSeries out;
  double acc = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    double sum = 0.0;
    double scale = 1.0;
    bool done = false;
    for (int n = 0; n < 20000; ++n) {
      const double ck = c(k + n);
      if (!(ck > 0.0)) throw Error("dk_series: migration constants must be positive");
      const double term = ck * scale;
      sum += term;
      if (!std::isfinite(sum) || sum > 1e300) throw Error("dk_series: the series for d_k diverges");
      if (n >= 8 && term < 1e-16 * sum) {
        done = true;
        break;
      }
      scale /= N;
    }
    if (!done) throw Error("dk_series: the series for d_k diverges");
    out.d.push_back(sum);
    acc += 1.0 / sum;
    out.partial.push_back(acc);
  }
  if (kmax >= 8) {
    const int k0 = kmax / 2;
    const double q = std::pow(out.d[k0] / out.d[kmax], 1.0 / (kmax - k0));
    if (q < 0.98) {
      out.verdict = Recurrence::transient;
      out.tail_estimate = (1.0 / out.d[kmax]) * q / (1.0 - q);
    } else {
      out.verdict = Recurrence::recurrent;
    }
  }
  return out;
}

}  // namespace ipslab
