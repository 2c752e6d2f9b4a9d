#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmclab/error.hpp"
#include "gmclab/random.hpp"
#include "gmclab/rooted.hpp"

using namespace gmclab;

namespace {

DomainPtr disk(int m) { return LatticeDomain::build(Shape::unit_disk, m); }

}  // namespace

TEST_CASE("root weights") {
  const auto d = disk(16);
  const auto w0 = root_weights(*d, 0.0);
  for (double v : w0) CHECK(v == doctest::Approx(1.0 / d->size()).epsilon(1e-12));
  const auto w = root_weights(*d, 1.5);
  double s = 0.0;
  for (double v : w) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(root_weights(*d, 2.0), InvalidArgument);
  CHECK(sample_root(*d, 1.0, 5) == RootLaw(*d, 1.0).sample(5));
}

TEST_CASE("radial law of the root against the continuum CDF") {
  DomainOptions o;
  o.dense_green = false;
  const auto d = LatticeDomain::build(Shape::unit_disk, 256, o);
  const RootLaw law(*d, 1.0);
  std::vector<double> r(100000);
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Point p = d->site(law.sample(seed_stream(71, k)));
    r[k] = std::hypot(p.x, p.y);
  }
  // Density proportional to (1 - r^2)^{1/2} r dr on [0, 1].
  const auto ks = ks_one_sample(r, [](double x) { return 1.0 - std::pow(1.0 - std::min(x * x, 1.0), 1.5); });
  MESSAGE("KS D=", ks.statistic, " p=", ks.p_value);
  CHECK(ks.p_value > 0.001);
}

TEST_CASE("shift is an exact array identity") {
  const auto d = disk(32);
  const auto f = sample_field(d, 3, Sampler::dense_factorization);
  const std::size_t z = *d->nearest_site({0.3, -0.2});
  const auto s = shift_field(f, z, 1.3);
  for (std::size_t i = 0; i < d->size(); ++i) {
    CHECK(s.values[i] - f.values[i] == doctest::Approx(1.3 * d->green_entry(z, i)).epsilon(1e-14));
  }
  const auto same = shift_field(f, z, 0.0);
  CHECK(same.values == f.values);
  CHECK_THROWS_AS(shift_field(f, d->size(), 1.0), InvalidArgument);
}

TEST_CASE("shifted field means follow the Green function") {
  const auto d = disk(32);
  const std::size_t z = *d->nearest_site({0.0, 0.0});
  const std::size_t w = *d->nearest_site({0.4, 0.1});
  const double g = 1.0;
  const int n = 4000;
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = shift_field(sample_field(d, seed_stream(73, k), Sampler::dense_factorization), z, g).values[w];
  const auto s = summarize_sample(x);
  CHECK(std::fabs(s.mean - g * d->green_entry(z, w)) < 4 * s.std_error);
  // Circle average of G(z, .) around z is log(1/eps) + log CR(z) in the continuum.
  const double eps = 8 * d->spacing();
  const CircleAverager avg(d, eps);
  const Eigen::VectorXd col = d->green_column(z);
  const double drift = avg.weights(z).dot(col);
  CHECK(drift == doctest::Approx(std::log(1 / eps) + std::log(d->cr_field()[z])).epsilon(0.03));
}

TEST_CASE("rooted equivalence: both constructions agree") {
  const auto d = disk(32);
  const double eps = 8 * d->spacing();
  for (double g : {0.0, 1.0}) {
    const auto rep = rooted_equivalence_test(d, g, eps, 2000, 77);
    INFO("gamma=", g, " D=", rep.ks.statistic, " p=", rep.ks.p_value, " ess=", rep.effective_sample_size);
    CHECK(rep.ks.p_value > 0.01);
    CHECK_FALSE(rep.low_ess);
    const auto s = summarize_sample(rep.shift_route);
    const auto sp = summarize_sample(rep.size_biased_route);
    CHECK(std::fabs(rep.mean_shifted - rep.mean_plain - rep.predicted_shift) < 4 * std::hypot(s.std_error, sp.std_error));
  }
  const auto a = rooted_equivalence_test(d, 1.0, eps, 50, 5);
  const auto b = rooted_equivalence_test(d, 1.0, eps, 50, 5, 2);
  CHECK(a.shift_route == b.shift_route);
  CHECK(a.size_biased_route == b.size_biased_route);
}

TEST_CASE("uniform moment check") {
  CHECK(moment_exponent(1.5) == 1.25);
  const auto d = disk(32);
  const double eps = 8 * d->spacing();
  const auto rows = uniform_moment_check(d, {1.5}, eps, 10000, 79);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.estimate));
    CHECK(r.ci_lo <= r.estimate);
    CHECK(r.ci_hi >= r.estimate);
  }
  CHECK(rows[0].ci_hi - rows[0].ci_lo < 0.2 * rows[0].estimate);
  CHECK(rows[0].estimate <= rows[0].jensen_bound);
  const auto grid = uniform_moment_check(d, {1.2, 1.5, 1.8, 1.9}, eps, 2000, 81);
  for (const std::string q : {"rooted_moment", "half_disk_ratio"}) {
    double lo = 1e300, hi = 0;
    for (const auto& r : grid) {
      if (r.quantity != q) continue;
      lo = std::min(lo, r.ci_hi);
      hi = std::max(hi, r.ci_hi);
    }
    MESSAGE(q, " upper bounds in [", lo, ", ", hi, "]");
    CHECK(hi <= 3 * lo);
  }
  std::ostringstream os;
  write_moment_csv(os, rows);
  CHECK(os.str().rfind("gamma,p,quantity,estimate,ci_lo,ci_hi,N,seed\n1.5,1.25,rooted_moment,", 0) == 0);
  CHECK_THROWS_AS(uniform_moment_check(d, {2.0}, eps, 100, 1), InvalidArgument);
}
