#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ipslab/lattice.hpp"

namespace ipslab {

/// Sparse generator of a finite continuous-time Markov chain.
struct Generator {
  std::size_t M = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> out;  // off-diagonal rates
  std::vector<double> diag;                                      // -(row sum)

  void add(std::size_t s, std::size_t t, double r);
  [[nodiscard]] double max_row_defect() const;
};

using Distribution = std::vector<double>;

/// Contact process states are bitmasks over window sites (bit i = site i).
inline constexpr std::size_t kContactMaxSites = 14;
Generator contact_generator(const Kernel& k, double delta);

/// Per-site counts 0..cap in mixed radix (cap+1), site 0 least significant.
class BracoSpace {
 public:
  BracoSpace(std::size_t n, int cap);
  [[nodiscard]] std::size_t size() const { return M_; }
  [[nodiscard]] std::size_t sites() const { return n_; }
  [[nodiscard]] int cap() const { return cap_; }
  [[nodiscard]] std::size_t encode(const std::vector<int>& x) const;
  [[nodiscard]] std::vector<int> decode(std::size_t s) const;

 private:
  std::size_t n_;
  int cap_;
  std::size_t M_;
};

inline constexpr std::size_t kBracoMaxStates = 100000;
/// Births and immigration into a full site are suppressed. Migration that
/// leaves a killed window counts as death.
Generator braco_generator(const Kernel& k, double b, double c, double d, int cap);

/// exp(tQ)^T p0 by uniformization, l1 error at most tol.
Distribution transient_distribution(const Generator& Q, const Distribution& p0, double t, double tol = 1e-12);
Distribution point_mass(std::size_t M, std::size_t s);

/// Expectation of f(state index) under p.
template <class F>
double expect(const Distribution& p, F&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != 0.0) s += p[i] * f(i);
  return s;
}

/// Largest |P[eta^A_t cap B empty] - P[A cap eta^{dagger B}_t empty]| over all A, B.
double contact_duality_gap(const Kernel& k, double delta, double t, double tol = 1e-12);

}  // namespace ipslab
