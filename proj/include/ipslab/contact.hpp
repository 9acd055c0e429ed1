#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ipslab/lattice.hpp"
#include "ipslab/random.hpp"
#include "ipslab/stats.hpp"

namespace ipslab {

/// Subset of window sites.
class SiteSet {
 public:
  SiteSet() = default;
  explicit SiteSet(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}
  static SiteSet full(std::size_t n);
  static SiteSet of(std::size_t n, std::initializer_list<std::size_t> sites);

  [[nodiscard]] std::size_t universe() const { return n_; }
  [[nodiscard]] bool contains(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1U; }
  void insert(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void erase(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  [[nodiscard]] std::size_t count() const;
  [[nodiscard]] bool empty() const;
  [[nodiscard]] bool intersects(const SiteSet& o) const;
  [[nodiscard]] std::vector<std::size_t> members() const;
  SiteSet& operator|=(const SiteSet& o);
  friend SiteSet operator|(SiteSet a, const SiteSet& b) { return a |= b; }
  friend bool operator==(const SiteSet& a, const SiteSet& b) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

/// One Poisson mark: a recovery at `from` when from == to, otherwise an
/// infection arrow from -> to.
struct Event {
  double t;
  std::uint32_t from;
  std::uint32_t to;
  [[nodiscard]] bool recovery() const { return from == to; }
};

/// Realized Poisson marks on window x [0, T], merged into one time-ordered list.
struct GraphicalRep {
  std::size_t n = 0;
  double T = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::vector<Event> events;

  [[nodiscard]] std::size_t recoveries_at(std::size_t i) const;
  [[nodiscard]] std::size_t arrows(std::size_t i, std::size_t j) const;
  [[nodiscard]] std::string to_csv() const;
};

struct ContactModel {
  GroupLattice lattice;
  Kernel kernel;
  double delta = 1.0;

  [[nodiscard]] ContactModel reversed() const { return {lattice, reverse_kernel(kernel), delta}; }
};

GraphicalRep sample_graphical(const Kernel& k, double delta, double T, std::uint64_t seed);
GraphicalRep sample_graphical(const Kernel& k, double delta, double T, const Stream& stream);

/// eta^{A x {t0}} at time t0 + t.
SiteSet forward(const GraphicalRep& rep, const SiteSet& A, double t0, double t);
/// Sites i with (i, t1 - s) ~> B x {t1}.
SiteSet dual_backward(const GraphicalRep& rep, const SiteSet& B, double t1, double s);

/// E|eta^A_t| on a time grid, from independent forward runs.
std::vector<Estimate> expected_size(const ContactModel& m, const SiteSet& A, const std::vector<double>& t_grid,
                                    std::size_t reps, std::uint64_t seed);

struct GrowthFit {
  double r_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<Estimate> mean_size;
  bool bracket_ok = false;  // -delta <= r <= |a| - delta is compatible with the CI
};

/// Least-squares slope of log E|eta^A_t| over the last half of t_grid with a
/// percentile bootstrap CI (resampling replicas).
GrowthFit estimate_growth_rate(const ContactModel& m, const SiteSet& A, const std::vector<double>& t_grid,
                               std::size_t reps, std::uint64_t seed, std::size_t bootstrap = 400);

struct PiEstimate {
  Estimate pi;
  std::size_t extensions = 0;  // replicas whose clock exceeded the nominal horizon
};

/// (1/lambda) E|eta^A_tau|, tau ~ Exp(rate lambda). On finite windows r <= 0,
/// so lambda > 0 is required.
PiEstimate pi_lambda_hat(const ContactModel& m, const SiteSet& A, double lambda, std::size_t reps,
                         std::uint64_t seed, double horizon = 50.0);

struct CampbellSample {
  std::size_t iota;
  double tau;
  SiteSet config;
  double weight;  // batch mean of |eta_tau|, the estimated normaliser
};

struct CampbellDraws {
  std::vector<CampbellSample> samples;
  std::size_t retries = 0;
};

/// `count` draws from the size-biased law by importance resampling; each draw
/// uses its own batch of (rep, tau) pairs.
CampbellDraws campbell_sample(const ContactModel& m, const SiteSet& A, double lambda, std::size_t batch,
                              std::size_t count, std::uint64_t seed);

struct CharCheck {
  Estimate lhs;
  Estimate rhs;
  double z = 0.0;
};

/// Campbell probability that A misses the configuration seen from the typical
/// site, against the normalised expected-size functional of the reversed process.
CharCheck char_check(const ContactModel& m, const std::vector<Coord>& A, double lambda, std::size_t reps,
                     std::uint64_t seed);

struct TypicalSiteLaw {
  std::map<std::uint64_t, double> law;  // pattern on Delta (bit k = Delta[k]) -> Campbell probability
  Estimate agree_upper;                 // with the process started from the full window T_back earlier
  Estimate agree_full;                  // with the process started from the full window at time 0
  double tau_mean = 0.0;
};

TypicalSiteLaw typical_site_law(const ContactModel& m, const SiteSet& A, double lambda,
                                const std::vector<Coord>& Delta, std::size_t reps, std::uint64_t seed,
                                double T_back = 10.0);

struct CouplingResult {
  double time = std::numeric_limits<double>::infinity();
  bool extinct = false;  // one of the two processes died before they met
};

/// First time eta^{{i}} and eta^{{j}} coincide on the rep (1D nearest-neighbour kernels).
CouplingResult onedim_coupling_time(const GroupLattice& lat, const Kernel& k, const GraphicalRep& rep, std::size_t i,
                                    std::size_t j);

}  // namespace ipslab
