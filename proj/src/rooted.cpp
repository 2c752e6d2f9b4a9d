#include "gmclab/rooted.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gmclab/csv.hpp"
#include "gmclab/error.hpp"
#include "gmclab/parallel.hpp"
#include "gmclab/random.hpp"

namespace gmclab {

namespace {

Sampler default_sampler(const LatticeDomain& d) {
  return d.supports(Sampler::dense_factorization) ? Sampler::dense_factorization : Sampler::spectral;
}

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) c[i] = (s += w[i]);
  for (auto& v : c) v /= s;
  c.back() = 1.0;
  return c;
}

std::size_t inverse_cdf(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

double mean_of(std::span<const double> x) { return pairwise_sum(x) / static_cast<double>(x.size()); }

}  // namespace

std::vector<double> root_weights(const LatticeDomain& domain, double gamma) {
  if (!(gamma >= 0.0 && gamma < 2.0)) throw InvalidArgument("root law needs 0 <= gamma < 2");
  std::vector<double> w(domain.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(domain.cr_field()[i], 0.5 * gamma * gamma);
  const double s = pairwise_sum(w);
  if (!(s > 0.0 && std::isfinite(s))) throw InvalidArgument("root weights do not normalize");
  for (auto& v : w) v /= s;
  return w;
}

RootLaw::RootLaw(const LatticeDomain& domain, double gamma) : cdf_(cumulative(root_weights(domain, gamma))) {}

std::size_t RootLaw::sample(std::uint64_t seed) const {
  Rng rng(seed);
  return inverse_cdf(cdf_, rng.uniform());
}

std::size_t sample_root(const LatticeDomain& domain, double gamma, std::uint64_t seed) {
  return RootLaw(domain, gamma).sample(seed);
}

FieldSample shift_field(const FieldSample& field, std::size_t z, double gamma) {
  const auto& d = *field.domain;
  if (z >= d.size()) throw InvalidArgument("root is not an interior site");
  FieldSample out = field;
  if (gamma == 0.0) return out;
  const Eigen::VectorXd g = d.green_column(z);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += gamma * g[static_cast<Eigen::Index>(i)];
  return out;
}

RootedSample sample_rooted(const DomainPtr& domain, double gamma, std::uint64_t seed) {
  RootedSample r;
  r.z = sample_root(*domain, gamma, seed_stream(seed, 0));
  r.gamma = gamma;
  r.seed = seed;
  r.field = shift_field(sample_field(domain, seed_stream(seed, 1), default_sampler(*domain)), r.z, gamma);
  return r;
}

RootedEquivalenceReport rooted_equivalence_test(const DomainPtr& domain, double gamma, double eps, std::size_t n,
                                                std::uint64_t seed, int workers) {
  if (!(gamma >= 0.0 && gamma < 2.0)) throw InvalidArgument("rooted test needs 0 <= gamma < 2");
  if (n < 10) throw InvalidArgument("rooted test needs at least 10 replicas per route");
  const auto& d = *domain;
  const CircleAverager avg(domain, eps);
  const auto var = avg.variances();
  const Sampler sampler = default_sampler(d);
  const double g2 = 0.5 * gamma * gamma;

  std::vector<double> wa(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) wa[i] = std::exp(g2 * (var[i] + std::log(avg.radii()[i])));
  const auto cdf_a = cumulative(wa);
  double predicted = 0.0;
  {
    const double s = pairwise_sum(wa);
    std::vector<double> t(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) t[i] = wa[i] / s * var[i];
    predicted = gamma * pairwise_sum(t);
  }

  RootedEquivalenceReport rep;
  rep.gamma = gamma;
  rep.eps = eps;
  rep.n = n;
  rep.predicted_shift = predicted;
  rep.shift_route.resize(n);
  std::vector<double> plain(n), obs_b(n), weight_b(n);

  parallel_for(n, workers, [&](std::size_t k) {
    const std::uint64_t s = seed_stream(seed, k);
    Rng rng(seed_stream(s, 0));
    const std::size_t z = inverse_cdf(cdf_a, rng.uniform());
    const auto field = sample_field(domain, seed_stream(s, 1), sampler);
    // Shift by gamma Cov(G(.), G_eps(z)) = gamma G a_z, then average around z.
    const Eigen::VectorXd a = avg.weights(z);
    const Eigen::VectorXd shift = d.green_apply(a);
    double shifted = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a[i] != 0.0) shifted += a[i] * (field.values[static_cast<std::size_t>(i)] + gamma * shift[i]);
    }
    rep.shift_route[k] = shifted;
    const std::size_t u = rng.below(d.size());
    plain[k] = avg.weights(u).dot(Eigen::Map<const Eigen::VectorXd>(field.values.data(), field.values.size()));
  });

  parallel_for(n, workers, [&](std::size_t k) {
    const std::uint64_t s = seed_stream(seed, n + k);
    Rng rng(seed_stream(s, 0));
    const auto field = sample_field(domain, seed_stream(s, 1), sampler);
    const auto m = subcritical_measure(average_field(field, avg), gamma);
    const auto cdf = cumulative(m.cell_mass);
    const std::size_t z = inverse_cdf(cdf, rng.uniform());
    obs_b[k] = avg.weights(z).dot(Eigen::Map<const Eigen::VectorXd>(field.values.data(), field.values.size()));
    weight_b[k] = total_mass(m);
  });

  Rng pick(seed_stream(seed, 2 * n));
  const auto idx = systematic_resample(weight_b, n, pick.uniform());
  rep.size_biased_route.resize(n);
  for (std::size_t k = 0; k < n; ++k) rep.size_biased_route[k] = obs_b[idx[k]];
  rep.effective_sample_size = effective_sample_size(weight_b);
  rep.low_ess = rep.effective_sample_size < static_cast<double>(n) / 10.0;
  rep.ks = ks_two_sample(rep.shift_route, rep.size_biased_route, 0.0, rep.effective_sample_size);
  rep.mean_shifted = mean_of(rep.shift_route);
  rep.mean_plain = mean_of(plain);
  return rep;
}

double moment_exponent(double gamma) { return 1.0 + (2.0 - gamma) / 2.0; }

std::vector<MomentRow> uniform_moment_check(const DomainPtr& domain, const std::vector<double>& gammas, double eps,
                                            std::size_t n, std::uint64_t seed, int workers) {
  for (double g : gammas) {
    if (!(g > 1.0 && g < 2.0)) throw InvalidArgument("moment check needs gamma in (1, 2)");
  }
  if (n < 10) throw InvalidArgument("moment check needs at least 10 replicas");
  const auto& d = *domain;
  const CircleAverager avg(domain, eps);
  const auto z0 = d.nearest_site({0.0, 0.0});
  if (!z0) throw InvalidArgument("domain has no interior site");
  const Sampler sampler = default_sampler(d);
  // Averaging is linear, so the average of the shifted field is the plain
  // average plus gamma times the average of the Green column at the root.
  std::vector<double> g0(d.size());
  {
    const Eigen::VectorXd col = d.green_column(*z0);
    g0 = avg.apply(std::vector<double>(col.data(), col.data() + col.size()));
  }
  const auto right = regions::centred_right_half(d.shape());
  const std::size_t G = gammas.size();
  std::vector<std::vector<double>> rooted_mass(G, std::vector<double>(n)), half_mass(G, std::vector<double>(n));

  parallel_for(n, workers, [&](std::size_t k) {
    const auto field = sample_field(domain, seed_stream(seed, k), sampler);
    const auto a = average_field(field, avg);
    for (std::size_t j = 0; j < G; ++j) {
      AveragedField shifted = a;
      for (std::size_t i = 0; i < d.size(); ++i) shifted.value[i] += gammas[j] * g0[i];
      rooted_mass[j][k] = total_mass(subcritical_measure(shifted, gammas[j]));
      half_mass[j][k] = mass(subcritical_measure(a, gammas[j]), right).value;
    }
  });

  std::vector<MomentRow> rows;
  auto mean_stat = [](std::span<const double> x) { return pairwise_sum(x) / static_cast<double>(x.size()); };
  for (std::size_t j = 0; j < G; ++j) {
    const double g = gammas[j];
    const double p = moment_exponent(g);
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = std::pow(rooted_mass[j][k], p - 1.0);
      y[k] = std::pow(half_mass[j][k], p);
    }
    const std::uint64_t bs = seed_stream(seed, n + j);
    MomentRow r1{g, p, "rooted_moment", mean_stat(x), 0, 0, n, seed, 0};
    const auto ci1 = bootstrap_interval(x, mean_stat, 1000, bs, 0.95);
    r1.ci_lo = ci1.lo;
    r1.ci_hi = ci1.hi;
    r1.jensen_bound = std::pow(mean_stat(rooted_mass[j]), p - 1.0);
    const double denom =
        std::pow(d.area(), (p - 1.0) * (1.0 + g * g / 4.0)) * expected_mass_oracle(d, g, right);
    MomentRow r2{g, p, "half_disk_ratio", mean_stat(y) / denom, 0, 0, n, seed, 0};
    const auto ci2 = bootstrap_interval(y, mean_stat, 1000, seed_stream(bs, 1), 0.95);
    r2.ci_lo = ci2.lo / denom;
    r2.ci_hi = ci2.hi / denom;
    rows.push_back(r1);
    rows.push_back(r2);
  }
  return rows;
}

void write_moment_csv(std::ostream& os, const std::vector<MomentRow>& rows) {
  CsvWriter w(os);
  w.row({"gamma", "p", "quantity", "estimate", "ci_lo", "ci_hi", "N", "seed"});
  for (const auto& r : rows) {
    w.field(r.gamma).field(r.p).field(r.quantity).field(r.estimate).field(r.ci_lo).field(r.ci_hi);
    w.field(static_cast<std::uint64_t>(r.n)).field(r.seed);
    w.end_row();
  }
}

}  // namespace gmclab
