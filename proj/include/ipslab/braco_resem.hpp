#pragma once

#include <cstdint>
#include <vector>

#include "ipslab/lattice.hpp"
#include "ipslab/random.hpp"
#include "ipslab/stats.hpp"

namespace ipslab {

using CountConfig = std::vector<long>;
using DensityConfig = std::vector<double>;

/// Rates of the (a, b, c, d) braco / resem pair. `dt` is used by the SDE
/// stepper only, `guard` by the particle simulator only.
struct BcdParams {
  Kernel kernel;
  double b = 0.0;  // branching / selection
  double c = 0.0;  // coalescence / resampling
  double d = 0.0;  // death / mutation
  double dt = 1e-3;
  double guard = 1e7;

  [[nodiscard]] BcdParams reversed() const;
  [[nodiscard]] double ratio() const;  // b / c, requires c > 0
  void validate() const;
};

// ---------------------------------------------------------------------------
// Simulators

/// Gillespie path of the braco process, sampled at the (sorted) times in t_grid.
std::vector<CountConfig> braco_path(const BcdParams& p, const CountConfig& x0, const std::vector<double>& t_grid,
                                    Engine& eng);
CountConfig braco_simulate(const BcdParams& p, const CountConfig& x0, double t, Engine& eng);
CountConfig braco_simulate(const BcdParams& p, const CountConfig& x0, double t, std::uint64_t seed);
/// First time the total population equals `target`; +inf if that happens after t_max.
double braco_hitting_time(const BcdParams& p, const CountConfig& x0, long target, double t_max, Engine& eng);

/// Euler-Maruyama path of the resem SDE with clamping to [0,1].
std::vector<DensityConfig> resem_path(const BcdParams& p, const DensityConfig& phi0,
                                      const std::vector<double>& t_grid, Engine& eng);
DensityConfig resem_simulate(const BcdParams& p, const DensityConfig& phi0, double t, Engine& eng);
DensityConfig resem_simulate(const BcdParams& p, const DensityConfig& phi0, double t, std::uint64_t seed);

CountConfig thin(const CountConfig& x, const DensityConfig& phi, Engine& eng);
CountConfig pois(const std::vector<double>& phi, Engine& eng);

/// prod (1 - phi chi)^x, the generating functional of thin_phi(x) at chi.
double thin_pgf(const CountConfig& x, const DensityConfig& phi, const DensityConfig& chi);
/// exp(-<phi, chi>), the generating functional of pois(phi) at chi.
double pois_pgf(const std::vector<double>& phi, const DensityConfig& chi);

long total(const CountConfig& x);
double total(const DensityConfig& phi);
/// z(z+1)...(z+k-1).
double rising_factorial(double z, int k);

// ---------------------------------------------------------------------------
// Couplings

/// Black/white construction: X = black, X~ = black + white. Requires
/// x <= x~, b <= b~, c >= c~, d >= d~ (same kernel).
struct ColorPath {
  std::vector<CountConfig> lower;
  std::vector<CountConfig> upper;
};
ColorPath braco_color_coupling(const BcdParams& lo, const BcdParams& hi, const CountConfig& x,
                               const CountConfig& x_hi, const std::vector<double>& t_grid, Engine& eng);

/// Two EM paths driven by the same Gaussian increments; counts the steps
/// (times sites) at which the lower path exceeds the upper one.
struct ResemComparison {
  DensityConfig lower;
  DensityConfig upper;
  std::size_t steps = 0;
  std::size_t violations = 0;
};
ResemComparison resem_coupled(const BcdParams& lo, const BcdParams& hi, const DensityConfig& phi,
                              const DensityConfig& phi_hi, double t, Engine& eng);

// ---------------------------------------------------------------------------
// Duality experiments

struct DualityResult {
  Estimate lhs;
  Estimate rhs;
  double z = 0.0;
};

/// E^phi[(1 - X_t)^x] for resem(a) against E^x[(1 - phi)^{X†_t}] for braco(a†).
/// With oracle_cap > 0 the braco side is computed exactly (capped chain).
DualityResult duality_test(const BcdParams& p, const CountConfig& x, const DensityConfig& phi, double t,
                           std::size_t reps, std::uint64_t seed, int oracle_cap = 0);

/// E^phi[exp(-(b/c)<X_t, psi>)] for resem(a) against E^psi[exp(-(b/c)<phi, X†_t>)] for resem(a†).
DualityResult selfduality_test(const BcdParams& p, const DensityConfig& phi, const DensityConfig& psi, double t,
                               std::size_t reps, std::uint64_t seed);

/// For each psi: E[(1 - psi)^{X_t}], X_0 ~ pois((b/c) phi), against E^phi[exp(-(b/c)<X_t, psi>)].
std::vector<DualityResult> poissonization_test(const BcdParams& p, const DensityConfig& phi, double t,
                                               const std::vector<DensityConfig>& psis, std::size_t reps,
                                               std::uint64_t seed);

struct SubmartingaleReport {
  std::vector<double> t_grid;
  std::vector<Estimate> value;  // E[exp(-(b/c)|X_t|)]
  bool nondecreasing = true;    // every increment >= -4 SE
  bool flat = true;             // every pair equal within 4 SE
  double increase_z = 0.0;      // (last - first) / SE, from paired differences
};
SubmartingaleReport submartingale_check(const BcdParams& p, const DensityConfig& phi0,
                                        const std::vector<double>& t_grid, std::size_t reps, std::uint64_t seed);

/// Closed-form upper bound on the mean count per site of the maximal process.
double maximal_bound(double b, double c, double d, double t);

struct MaximalRow {
  double t;
  double bound;
  std::vector<Estimate> mean;  // one per cap, E[X_t(i)] averaged over sites
  bool within = true;          // largest cap <= bound + 4 SE
};
struct MaximalReport {
  std::vector<long> caps;
  std::vector<MaximalRow> rows;
  bool bound_ok = true;
  bool cap_monotone = true;  // estimate(cap) <= estimate(larger cap) + 4 SE
};
MaximalReport maximal_bound_check(const BcdParams& p, const std::vector<double>& t_grid, std::size_t reps,
                                  std::uint64_t seed, std::vector<long> caps = {100, 1000});

struct HomconvReport {
  std::vector<double> hist_pois;     // counts 0..4 and >= 5
  std::vector<double> hist_maximal;
  double tv = 0.0;
};
HomconvReport homconv_check(const BcdParams& p, double t_end, std::size_t reps, std::uint64_t seed,
                            long cap = 1000);

struct MomentCheck {
  Estimate moment;  // E |X_t|^<k>
  double bound = 0.0;
  bool ok = true;
};
MomentCheck factorial_moment_check(const BcdParams& p, const CountConfig& x0, double t, int k, std::size_t reps,
                                   std::uint64_t seed);

/// Fraction of resem runs with 0 < |X_T| < eps * n, for each T.
std::vector<Estimate> intermediate_mass(const BcdParams& p, const DensityConfig& phi0,
                                        const std::vector<double>& T_grid, double eps, std::size_t reps,
                                        std::uint64_t seed);

}  // namespace ipslab
