#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ipslab/grid.hpp"
#include "ipslab/random.hpp"
#include "ipslab/stats.hpp"

namespace ipslab {

/// Catalyzing function on the uniform grid with pointwise standard errors
/// (zero for exact inputs). The class (l, r) is read off the endpoints.
struct CatalyzingFn {
  GridFn1D f;
  std::vector<double> se;

  CatalyzingFn() = default;
  explicit CatalyzingFn(GridFn1D g) : f(std::move(g)), se(f.v.size(), 0.0) {}
  static CatalyzingFn sample(const std::function<double(double)>& p, std::size_t m = 40) {
    return CatalyzingFn(GridFn1D::sample(p, m));
  }

  [[nodiscard]] double operator()(double x) const { return f(x); }
  [[nodiscard]] std::size_t m() const { return f.m(); }
  [[nodiscard]] double x(std::size_t i) const { return f.x(i); }
  [[nodiscard]] int l() const { return f.v.front() > 0.0 ? 1 : 0; }
  [[nodiscard]] int r() const { return f.v.back() > 0.0 ? 1 : 0; }
};

// The named functions of the catalytic class.
double h00(double x);  // x(1-x)
double h01(double x);  // 1-(1-x)^7
double h11(double x);  // 1
double h1(double x);   // x

/// gamma_n = 1 / (s-bar_n c_n) with s-bar_n = beta + sum_{k<n} 1/c_k.
struct GammaSchedule {
  std::function<double(int)> c;
  double beta = 1.0;

  static GammaSchedule constant_gamma(double gamma);
  /// c_k = (1+g)^{-k}, for which gamma_n -> g.
  static GammaSchedule geometric(double g, double beta = 1.0);
  [[nodiscard]] double s(int n) const;
  [[nodiscard]] double gamma(int n) const;

 private:
  double fixed_ = -1.0;
};

// ---------------------------------------------------------------------------
// Wright-Fisher stationary law

/// Beta(x/gamma, (1-x)/gamma); x in {0,1} is returned as is.
double beta_stationary_sample(double x, double gamma, Engine& eng);
/// prod_{k<n} (x + k gamma)/(1 + k gamma).
double beta_moment(double x, double gamma, int n);

struct WFPathParams {
  double gamma = 1.0;
  double x = 0.5;
  double dt = 1e-3;
};
/// Default step for the U_gamma estimators: gamma/50 capped at 0.02.
double wf_default_dt(double gamma);

/// Stationary path of dy = (x-y)/gamma dt + sqrt(2y(1-y)) dB, sampled every dt
/// (the first value is drawn from the Beta law). Steps are Beta draws with the
/// exact conditional mean and variance of the diffusion.
std::vector<double> wf_stationary_path(const WFPathParams& p, double duration, Engine& eng);

// ---------------------------------------------------------------------------
// log-Laplace operator

struct UOptions {
  std::size_t paths = 20000;
  double dt = 0.0;  // 0: wf_default_dt(gamma)
  std::uint64_t seed = 1;
};

/// (1/gamma + 1) E[1 - exp(-2 int_0^{tau/2} p(y(s)) ds)], tau ~ Exp(mean gamma),
/// y a stationary path run forward (reversibility).
CatalyzingFn u_gamma_apply(const CatalyzingFn& p, double gamma, const UOptions& opt = {});
/// 1 - E[prod_{sigma_k < tau} (1 - f(y(sigma_k)))], sigma_k partial sums of
/// Exp(mean 1/2) from sigma_0 = 0, tau ~ Exp(mean gamma/2). Needs 0 <= f <= 1.
CatalyzingFn u_gamma_apply_product(const CatalyzingFn& f, double gamma, const UOptions& opt = {});

/// Single-point versions.
Estimate u_gamma_point(const std::function<double(double)>& p, double x, double gamma, const UOptions& opt);
Estimate u_gamma_product_point(const std::function<double(double)>& f, double x, double gamma,
                               const UOptions& opt);

/// Difference of grid averages over the combined average SE. Averaging the
/// pointwise SEs bounds the SE of the average even for correlated points.
double pooled_z(const CatalyzingFn& a, const CatalyzingFn& b);

/// (1+gamma)/(1/r + gamma).
double u_gamma_constant(double r, double gamma);

/// Iterates U_{gamma_{n-1}} o ... o U_{gamma_0}(p0); element k is the k-th iterate.
std::vector<CatalyzingFn> iterate_renorm(const CatalyzingFn& p0, const GammaSchedule& sched, int n,
                                         const UOptions& opt = {});

// ---------------------------------------------------------------------------
// ancestral chain, catalytic equilibrium, binary splitting

/// Number of lineages that end in the reservoir, started from (n, 0).
long ancestral_chain(long n, double gamma, Engine& eng);
/// sum_{i<m} 1/(1 + i gamma).
double psi_mean(long m, double gamma);

struct CatalyticParams {
  double x1 = 0.5, x2 = 0.5;
  double c = 1.0;
  double alpha = 1.0;
  std::function<double(double)> p;
  double dt = 1e-3;
  double burn = 10.0;
  double duration = 100.0;
};

struct CatalyticMoments {
  Estimate mean1, mean2;
  Estimate var1, var2, cov12;  // (y_i - x_i)(y_j - x_j) averages
  Estimate w11, w22;           // alpha y1(1-y1) and p(y1) y2(1-y2)
  Estimate h1;                 // y1(1-y1)
};

/// Time averages over `reps` independent chains after burn-in.
CatalyticMoments catalytic_equilibrium(const CatalyticParams& p, std::size_t reps, std::uint64_t seed);

struct BinsplitResult {
  Estimate interior_or_one;  // P[Y_T((0,1]) > 0]
  Estimate at_one;           // P[Y_T({1}) > 0]
  std::size_t max_population = 0;
};

/// Particles follow dy = sqrt(y(1-y)) dB and split at rate alpha.
BinsplitResult binsplit_simulate(double alpha, double x0, double T, std::size_t reps, std::uint64_t seed,
                                 double dt = 1e-3, std::size_t guard = 10000000);

/// Draw from y(1-y) Gamma_x(dy) / normaliser by rejection from Gamma_x; for
/// x in {0,1} the limiting Beta(x/g + 1, (1-x)/g + 1) law is used.
double size_biased_sample(double x, double gamma, Engine& eng);
/// Closed form of the size-biased kernel moment of y(1-y).
double kyy_moment(double x, double gamma);

/// P[y_t > 0] for dy = sqrt(y(1-y)) dB started at x.
Estimate wf_survival(double x, double t, std::size_t reps, std::uint64_t seed, double dt = 1e-3);
double absorption_bound(double x, double t);

}  // namespace ipslab
