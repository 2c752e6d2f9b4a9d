#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gmclab/random.hpp"

namespace gmclab {

// Branching cascade: every leaf has `branching` children, and each child's
// log-inverse conformal radius l grows by an independent increment with
// Laplace transform exp(-a sqrt(2 s)), i.e. the hitting time of level a by a
// standard Brownian motion.
struct CascadeParams {
  int branching = 4;
  double level_height = 1.3862943611198906;  // log 4
  int max_depth = 12;
  std::uint64_t seed = 1;
  std::size_t max_leaves = std::size_t{1} << 24;
};

void validate(const CascadeParams& params);

// gamma_c = 2 log b / a.
double critical_gamma(const CascadeParams& params);
// kappa(gamma) = gamma a / 2 - log b; negative below gamma_c, zero at gamma_c.
double kahane_peyriere(const CascadeParams& params, double gamma);

// a^2 / Z^2 with Z standard normal (redrawn on an exact zero).
double sample_increment(double a, Rng& rng);
double sample_increment(double a, std::uint64_t seed);

// Inverse Gaussian IG(mean, shape), transformation with one rejection step
// (Michael, Schucany and Haas).
double sample_inverse_gaussian(double mean, double shape, Rng& rng);
// Increment law tilted by exp(gamma a - gamma^2 l / 2): IG(a / gamma, a^2).
double sample_tilted_increment(double a, double gamma, Rng& rng);

// Leaves of generation n. The children of leaf k of generation n - 1 are the
// leaves k*b, ..., k*b + b - 1, so genealogy is implicit in the ordering.
class CascadeState {
 public:
  static CascadeState root(int branching);

  int depth() const { return depth_; }
  int branching() const { return branching_; }
  std::size_t leaf_count() const { return l_.size(); }
  const std::vector<double>& l() const { return l_; }
  std::size_t parent(std::size_t leaf) const { return leaf / static_cast<std::size_t>(branching_); }

 private:
  friend CascadeState evolve(const CascadeState& state, const CascadeParams& params, Rng& rng);
  int depth_ = 0;
  int branching_ = 2;
  std::vector<double> l_;
};

CascadeState evolve(const CascadeState& state, const CascadeParams& params, Rng& rng);
// Root evolved `depth` times.
CascadeState grow_tree(const CascadeParams& params, int depth, Rng& rng);

// M_n^gamma = sum b^{-n} exp(gamma a n - gamma^2 l / 2), in log-sum-exp form.
double subcritical_mass(const CascadeState& state, double gamma, double a);
double log_subcritical_mass(const CascadeState& state, double gamma, double a);
// D_n = sum b^{-n} (2 l - a n) exp(2 a n - 2 l).
double derivative_mass(const CascadeState& state, double a);
// sqrt(n) M_n^2 (0 at n = 0).
double seneta_heyde_mass(const CascadeState& state, double a);

struct SignSplit {
  double plus = 0.0;
  double minus = 0.0;
};

// Leaves with S = -gamma a n + gamma^2 l >= 0 go to plus, others to minus.
SignSplit sign_split(const CascadeState& state, double gamma, double a);
// D_n split by the sign of 2 l - a n; minus <= 0.
SignSplit derivative_split(const CascadeState& state, double a);

// floor((C / (2 - gamma))^2), guarded against representation error.
int schedule_n(double C, double gamma);

struct SpineWalk {
  double gamma = 0.0;
  double start = 0.0;
  std::vector<double> steps;
};

// Steps -gamma a + gamma^2 dl with dl from the tilted law.
SpineWalk spine_sample(const CascadeParams& params, double gamma, int depth, Rng& rng);

struct TiltRow {
  std::string function;
  double weighted = 0.0;     // E[exp(gamma a - gamma^2 dl / 2) f(dl)]
  double weighted_se = 0.0;
  double tilted = 0.0;       // E_tilted[f(dl)]
  double tilted_se = 0.0;
  double analytic = 0.0;
  bool consistent = false;   // |weighted - tilted| <= 5 joint standard errors
};

struct TiltReport {
  double gamma = 0.0;
  std::size_t draws = 0;
  std::vector<TiltRow> rows;
  bool all_consistent() const;
};

// Compares the two sides for f in {1, x, x^2, exp(-x)} with independent ensembles.
TiltReport tilt_consistency_check(const CascadeParams& params, double gamma, std::size_t draws);

struct FunctionalValue {
  double value = 0.0;
  bool excluded = false;  // D_n <= 0
};

// (sqrt(n) / D_n) sum b^{-n} exp(2 a n - 2 l) F(S / sqrt(n)), S = -2 a n + 4 l.
FunctionalValue extended_sh_functional(const CascadeState& state, double a,
                                       const std::function<double(double)>& F);

}  // namespace gmclab
