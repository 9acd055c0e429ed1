#include "ipslab/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ipslab/error.hpp"

namespace ipslab {

void Generator::add(std::size_t s, std::size_t t, double r) {
  if (r <= 0.0 || s == t) return;
  auto& row = out[s];
  auto it = std::find_if(row.begin(), row.end(), [t](const auto& e) { return e.first == t; });
  if (it == row.end()) {
    row.emplace_back(t, r);
  } else {
    it->second += r;
  }
  diag[s] -= r;
}

double Generator::max_row_defect() const {
  double worst = 0.0;
  for (std::size_t s = 0; s < M; ++s) {
    double sum = diag[s];
    for (const auto& [t, r] : out[s]) sum += r;
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

Generator contact_generator(const Kernel& k, double delta) {
  require(k.n <= kContactMaxSites, "contact_generator: too many sites for the exact oracle");
  require(delta >= 0.0, "contact_generator: need delta >= 0");
  Generator Q;
  Q.M = std::size_t{1} << k.n;
  Q.out.resize(Q.M);
  Q.diag.assign(Q.M, 0.0);
  for (std::size_t A = 0; A < Q.M; ++A) {
    for (std::size_t i = 0; i < k.n; ++i) {
      if (!(A >> i & 1U)) continue;
      Q.add(A, A & ~(std::size_t{1} << i), delta);
      for (const auto& [j, r] : k.rows[i])
        if (!(A >> j & 1U)) Q.add(A, A | (std::size_t{1} << j), r);
    }
  }
  return Q;
}

BracoSpace::BracoSpace(std::size_t n, int cap) : n_(n), cap_(cap), M_(1) {
  require(cap >= 1, "BracoSpace: need cap >= 1");
  for (std::size_t i = 0; i < n; ++i) {
    M_ *= static_cast<std::size_t>(cap + 1);
    require(M_ <= kBracoMaxStates, "braco oracle: state space exceeds the limit");
  }
}

std::size_t BracoSpace::encode(const std::vector<int>& x) const {
  std::size_t s = 0;
  for (std::size_t i = n_; i-- > 0;) {
    require(x[i] >= 0 && x[i] <= cap_, "BracoSpace: count outside 0..cap");
    s = s * static_cast<std::size_t>(cap_ + 1) + static_cast<std::size_t>(x[i]);
  }
  return s;
}

std::vector<int> BracoSpace::decode(std::size_t s) const {
  std::vector<int> x(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    x[i] = static_cast<int>(s % static_cast<std::size_t>(cap_ + 1));
    s /= static_cast<std::size_t>(cap_ + 1);
  }
  return x;
}

Generator braco_generator(const Kernel& k, double b, double c, double d, int cap) {
  require(b >= 0.0 && c >= 0.0 && d >= 0.0, "braco_generator: rates must be nonnegative");
  const BracoSpace S(k.n, cap);
  Generator Q;
  Q.M = S.size();
  Q.out.resize(Q.M);
  Q.diag.assign(Q.M, 0.0);
  std::vector<std::size_t> stride(k.n, 1);
  for (std::size_t i = 1; i < k.n; ++i) stride[i] = stride[i - 1] * static_cast<std::size_t>(cap + 1);
  for (std::size_t s = 0; s < Q.M; ++s) {
    const auto x = S.decode(s);
    for (std::size_t i = 0; i < k.n; ++i) {
      const double xi = x[i];
      if (x[i] == 0) continue;
      const std::size_t down = s - stride[i];
      Q.add(s, down, (d + k.leak[i]) * xi + c * xi * (xi - 1.0));
      if (x[i] < cap) Q.add(s, s + stride[i], b * xi);
      for (const auto& [j, r] : k.rows[i])
        if (x[j] < cap) Q.add(s, down + stride[j], r * xi);
    }
  }
  return Q;
}

Distribution point_mass(std::size_t M, std::size_t s) {
  Distribution p(M, 0.0);
  p.at(s) = 1.0;
  return p;
}

Distribution transient_distribution(const Generator& Q, const Distribution& p0, double t, double tol) {
  require(tol > 0.0, "transient_distribution: need tol > 0");
  require(t >= 0.0, "transient_distribution: need t >= 0");
  require(p0.size() == Q.M, "transient_distribution: size mismatch");
  double lam = 0.0;
  for (double v : Q.diag) lam = std::max(lam, -v);
  if (t == 0.0 || lam == 0.0) return p0;
  lam *= 1.0 + 1e-6;
  const double mu = lam * t;

  // Smallest K with Chernoff bound P[Pois(mu) > K] <= tol.
  auto log_tail = [mu](double k) { return -mu + k * std::log(std::exp(1.0) * mu / k); };
  double K = std::ceil(mu) + 1.0;
  while (log_tail(K + 1.0) > std::log(tol)) K += std::max(1.0, std::sqrt(mu) * 0.1);
  const auto kmax = static_cast<std::size_t>(K);

  Distribution v = p0;
  Distribution next(Q.M);
  Distribution result(Q.M, 0.0);
  const double log_mu = std::log(mu);
  for (std::size_t n = 0; n <= kmax; ++n) {
    const double w = std::exp(-mu + static_cast<double>(n) * log_mu - std::lgamma(static_cast<double>(n) + 1.0));
    if (w > 0.0)
      for (std::size_t s = 0; s < Q.M; ++s) result[s] += w * v[s];
    if (n == kmax) break;
    // v <- v (I + Q/lam)
    for (std::size_t s = 0; s < Q.M; ++s) next[s] = v[s] * (1.0 + Q.diag[s] / lam);
    for (std::size_t s = 0; s < Q.M; ++s) {
      if (v[s] == 0.0) continue;
      for (const auto& [u, r] : Q.out[s]) next[u] += v[s] * r / lam;
    }
    v.swap(next);
  }
  return result;
}

double contact_duality_gap(const Kernel& k, double delta, double t, double tol) {
  const Generator Q = contact_generator(k, delta);
  const Generator Qr = contact_generator(reverse_kernel(k), delta);
  const std::size_t M = Q.M;
  // fwd[A][B] = P[eta^A_t cap B = empty]
  std::vector<Distribution> fwd(M), bwd(M);
  for (std::size_t A = 0; A < M; ++A) {
    fwd[A] = transient_distribution(Q, point_mass(M, A), t, tol);
    bwd[A] = transient_distribution(Qr, point_mass(M, A), t, tol);
  }
  double gap = 0.0;
  for (std::size_t A = 0; A < M; ++A)
    for (std::size_t B = 0; B < M; ++B) {
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t s = 0; s < M; ++s) {
        if ((s & B) == 0) lhs += fwd[A][s];
        if ((s & A) == 0) rhs += bwd[B][s];
      }
      gap = std::max(gap, std::abs(lhs - rhs));
    }
  return gap;
}

}  // namespace ipslab
