#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gmclab/error.hpp"
#include "gmclab/walk_meander.hpp"

using namespace gmclab;
using std::numbers::pi;

namespace {

// Independent quadrature of x exp(c x - x^2 / 2) over [lo, hi].
double tanh_sinh_mgf(double c, double lo, double hi) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([c](double x) { return x * std::exp(c * x - 0.5 * x * x); }, lo, hi, 1e-15);
}

}  // namespace

TEST_CASE("increment laws") {
  for (const auto& law : {coin_law(), skewed_law()}) {
    CHECK_NOTHROW(validate(law));
    CHECK(std::fabs(law.mean()) < 1e-12);
  }
  CHECK(coin_law().variance() == doctest::Approx(1.0));
  CHECK(skewed_law().variance() == doctest::Approx(1.2));
  CHECK_THROWS_AS(validate(IncrementLaw{"bad", {-2, 2}, {0.5, 0.5}}), InvalidArgument);
  CHECK_THROWS_AS(validate(IncrementLaw{"bad", {-1, 2}, {0.5, 0.5}}), InvalidArgument);
}

TEST_CASE("walk bound left side: hand example, empty event, monotonicity") {
  WalkLemmaConfig c{coin_law(), 1, 0.5, 1.0, 1.0};
  CHECK(walk_lemma_lhs(c).value == doctest::Approx(0.5 * std::exp(1.0)).epsilon(1e-14));
  CHECK(walk_lemma_lhs(c).value == doctest::Approx(1.35914).epsilon(1e-5));
  CHECK(walk_lemma_lhs(c).method == "exact");
  WalkLemmaConfig empty{coin_law(), 9, 3.01, 2.0, 1.0};
  CHECK(walk_lemma_lhs(empty).value == 0.0);
  for (int n : {4, 7, 10}) {
    WalkLemmaConfig lo{skewed_law(), n, 1.0, 0.0, 1.0}, hi{skewed_law(), n, 1.0, static_cast<double>(n), 1.0};
    CHECK(walk_lemma_lhs(lo).value <= walk_lemma_lhs(hi).value);
  }
}

TEST_CASE("dynamic programming equals path enumeration") {
  for (const auto& law : {coin_law(), skewed_law()}) {
    for (int n : {3, 6, 9}) {
      for (double p : {0.0, 1.0, 2.0}) {
        for (double a : {0.0, 1.0, 2.5}) {
          WalkLemmaConfig c{law, n, p, a, 1.3};
          CHECK(walk_lemma_lhs(c).value == doctest::Approx(walk_lemma_lhs_bruteforce(c)).epsilon(1e-13));
        }
      }
    }
  }
}

TEST_CASE("Monte Carlo fallback agrees with the exact value") {
  WalkLemmaConfig c{coin_law(), 30, 1.0, 1.0, 1.0};
  // 2^30 paths exceed the enumeration limit.
  c.allow_monte_carlo = false;
  CHECK_THROWS_AS(walk_lemma_lhs(c), CapacityError);
  c.allow_monte_carlo = true;
  c.paths = 200000;
  const auto mc = walk_lemma_lhs(c);
  CHECK(mc.method == "monte_carlo");
  CHECK(mc.std_error > 0.0);
  // Reflection-principle value for the simple walk: count paths by endpoint and minimum.
  const int n = 30;
  double v = 0.0;
  for (int k = 0; k <= n; ++k) {
    const int x = 2 * k - n;
    if (x / std::sqrt(n) < 1.0) continue;
    // Paths ending at x that touch -2: reflected endpoint -4 - x.
    const int kr = (-4 - x + n) / 2;
    const double total = std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) - n * std::log(2.0));
    const double bad = (kr >= 0 && kr <= n)
                           ? std::exp(std::lgamma(n + 1) - std::lgamma(kr + 1) - std::lgamma(n - kr + 1) - n * std::log(2.0))
                           : 0.0;
    v += (total - bad) * std::exp(x / std::sqrt(n));
  }
  CHECK(std::fabs(mc.value - v) < 4 * mc.std_error);
}

TEST_CASE("bound ratio grid and plateau") {
  for (const auto& law : {coin_law(), skewed_law()}) {
    const auto rows = walk_lemma_grid(law, {4, 5, 6, 7, 8, 9, 10, 11, 12}, {1, 2, 4}, {0, 1, 2}, 1.0);
    CHECK(rows.size() == 81);
    for (const auto& r : rows) {
      CHECK(std::isfinite(r.ratio));
      CHECK(r.ratio >= 0.0);
    }
    const auto p = bound_ratio_plateau(rows, 8);
    CHECK(p.c_hat_full >= p.c_hat_short);
    CHECK(p.growth < 0.10);
    MESSAGE(law.id, " c_hat(8)=", p.c_hat_short, " c_hat(12)=", p.c_hat_full);
  }
  WalkLemmaConfig c{coin_law(), 6, 1.0, 1.0, 1.0};
  CHECK(walk_lemma_bound_ratio(c) ==
        doctest::Approx(walk_lemma_lhs(c).value * std::sqrt(6.0) * std::exp(0.25) / 2.0).epsilon(1e-14));
  std::ostringstream os;
  write_walk_grid_csv(os, walk_lemma_grid(coin_law(), {4}, {1}, {0}, 1.0));
  CHECK(os.str().rfind("n,p,a,law_id,lhs,ratio,method,stderr\n4,1,0,pm1,", 0) == 0);
}

TEST_CASE("meander density and mgf") {
  const auto one = meander_expectation([](double) { return 1.0; }, 1.0);
  CHECK(one.converged);
  CHECK(std::fabs(one.value - 1.0) < 1e-10);
  const auto mean = meander_expectation([](double x) { return x; }, 1.0);
  CHECK(std::fabs(mean.value - std::sqrt(pi / 2)) < 1e-10);
  CHECK(meander_mgf(0.0) == 1.0);
  CHECK(meander_mgf(1.0) == doctest::Approx(4.4766).epsilon(1e-4));
  for (double m = 0.0; m <= 5.0; m += 0.25) {
    const double closed = meander_mgf(m);
    const auto q = meander_integral([m](double x) { return std::exp(m * x); }, 0.0, 40.0, m);
    CHECK(q.converged);
    CHECK(std::fabs(q.value - closed) <= 1e-10 * closed);
    CHECK(std::fabs(tanh_sinh_mgf(m, 0.0, 60.0) - closed) <= 1e-10 * closed);
  }
  CHECK(std::fabs(meander_asymptotic_ratio(5.0) - 1.0) < 1e-3);
  for (double C : {1.0, 2.0, 3.0}) {
    const auto e = meander_expectation([C](double x) { return std::exp(C / std::numbers::sqrt2 * x); }, std::numbers::sqrt2);
    CHECK(e.value == doctest::Approx(meander_mgf(C)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(meander_mgf(-1.0), InvalidArgument);
}

TEST_CASE("truncated mgf split") {
  const auto z = truncated_mgf_split(0.0, 1.0);
  CHECK(z.lower == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-12));
  CHECK(z.upper == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  for (double C : {1.0, 3.0, 6.0}) {
    const double c = C / std::numbers::sqrt2;
    for (double p : {0.5, c, 3.0}) {
      const auto s = truncated_mgf_split(C, p);
      CHECK(std::fabs(s.lower + s.upper - meander_mgf(c)) <= 1e-9 * meander_mgf(c));
      CHECK(s.lower == doctest::Approx(tanh_sinh_mgf(c, 0.0, p)).epsilon(1e-10));
    }
  }
  // At the split point c the halves sit at e^{c^2/2} (sqrt(2 pi) c / 2 -+ 1), not at the common half.
  const double C = 6.0, c = C / std::numbers::sqrt2;
  const auto s = truncated_mgf_split(C, c);
  const double k = std::exp(0.5 * c * c);
  CHECK(s.lower == doctest::Approx(k * (std::sqrt(2 * pi) * c / 2 - 1)).epsilon(0.01));
  CHECK(s.upper == doctest::Approx(k * (std::sqrt(2 * pi) * c / 2 + 1)).epsilon(0.01));
  CHECK(half_asymptotic_mgf(C) == doctest::Approx(0.5 * std::sqrt(2 * pi) * c * k));
}

TEST_CASE("von Bahr-Esseen inequality") {
  const std::vector<DiscreteLaw> rad8(8, rademacher());
  const auto r = von_bahr_esseen_check(rad8, 1.25);
  CHECK(r.method == "exact");
  CHECK(r.holds);
  // E|sum| over 2^8 outcomes by the binomial law.
  double lhs = 0.0;
  for (int k = 0; k <= 8; ++k) lhs += std::exp(std::lgamma(9) - std::lgamma(k + 1) - std::lgamma(9 - k)) / 256.0 * std::pow(std::fabs(2.0 * k - 8), 1.25);
  CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-13));
  CHECK(r.rhs == doctest::Approx(std::pow(2.0, 1.25) * 8).epsilon(1e-14));
  const auto q2 = von_bahr_esseen_check(rad8, 2.0);
  CHECK(q2.lhs == doctest::Approx(8.0).epsilon(1e-13));
  CHECK(q2.rhs == doctest::Approx(32.0));
  const auto one = von_bahr_esseen_check({DiscreteLaw{{-2.0, 1.0}, {1.0 / 3, 2.0 / 3}}}, 1.5);
  CHECK(one.rhs == doctest::Approx(std::pow(2.0, 1.5) * one.lhs).epsilon(1e-13));
  const std::vector<DiscreteLaw> big(30, DiscreteLaw{{-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25}});
  const auto mc = von_bahr_esseen_check(big, 1.5, 50000, 3);
  CHECK(mc.method == "monte_carlo");
  CHECK(mc.holds);
  CHECK_THROWS_AS(von_bahr_esseen_check(rad8, 2.5), InvalidArgument);
}
