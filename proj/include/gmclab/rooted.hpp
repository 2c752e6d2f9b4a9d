#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gmclab/chaos_measures.hpp"
#include "gmclab/stats.hpp"

namespace gmclab {

// A field seen from a marked point: the plain field plus gamma times a Green
// function column of the root.
struct RootedSample {
  std::size_t z = 0;
  FieldSample field;
  double gamma = 0.0;
  std::uint64_t seed = 0;
};

// Normalized weights cr^{gamma^2/2} over the sites, 0 <= gamma < 2.
std::vector<double> root_weights(const LatticeDomain& domain, double gamma);
// Inverse-CDF table over root_weights, built once for repeated draws.
class RootLaw {
 public:
  RootLaw(const LatticeDomain& domain, double gamma);
  std::size_t sample(std::uint64_t seed) const;

 private:
  std::vector<double> cdf_;
};

// Site drawn by inverse CDF over root_weights.
std::size_t sample_root(const LatticeDomain& domain, double gamma, std::uint64_t seed);
// Adds gamma * G(z, .) to every site.
FieldSample shift_field(const FieldSample& field, std::size_t z, double gamma);
// Root from seed_stream(seed, 0), plain field from seed_stream(seed, 1).
RootedSample sample_rooted(const DomainPtr& domain, double gamma, std::uint64_t seed);

struct RootedEquivalenceReport {
  double gamma = 0.0;
  double eps = 0.0;
  std::size_t n = 0;
  KsResult ks;
  double effective_sample_size = 0.0;  // of the size-biased route
  bool low_ess = false;                // below n / 10
  double mean_shifted = 0.0;           // mean of G_eps(Z), shift route
  double mean_plain = 0.0;             // mean of G_eps at a uniform site, plain field
  double predicted_shift = 0.0;        // gamma E_Z Var G_eps(Z) under the shift route's root law
  std::vector<double> shift_route;     // G_eps(Z) samples, shift route
  std::vector<double> size_biased_route;  // after resampling
};

// Law of G_eps(Z) under the two constructions of the rooted measure at the
// mollified level:
//  (a) Z drawn with weight E[mu_eps(dz)] = exp(gamma^2/2 (Var G_eps(z) + log r_z)) h^2,
//      field shifted by gamma Cov(G(.), G_eps(Z));
//  (b) plain field, Z drawn with probability proportional to mu_eps cell mass,
//      pairs resampled (systematic) with weights mu_eps(D).
// The KS p-value uses the Kish effective size of route (b).
RootedEquivalenceReport rooted_equivalence_test(const DomainPtr& domain, double gamma, double eps, std::size_t n,
                                                std::uint64_t seed, int workers = 1);

struct MomentRow {
  double gamma = 0.0;
  double p = 0.0;
  std::string quantity;  // "rooted_moment" or "half_disk_ratio"
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double jensen_bound = 0.0;  // (mean mass)^{p-1} for rooted_moment, else 0
};

// p(gamma) = 1 + (2 - gamma) / 2.
double moment_exponent(double gamma);

// For each gamma in (1, 2): the rooted moment E*[mu_eps(D)^{p-1}] with the root
// pinned at the site nearest 0, and E[(mu_eps(right half))^p] divided by
// Area^{(p-1)(1+gamma^2/4)} times the integral of cr^{gamma^2/2} over the right half.
// 95% percentile bootstrap intervals.
std::vector<MomentRow> uniform_moment_check(const DomainPtr& domain, const std::vector<double>& gammas, double eps,
                                            std::size_t n, std::uint64_t seed, int workers = 1);

void write_moment_csv(std::ostream& os, const std::vector<MomentRow>& rows);

}  // namespace gmclab
