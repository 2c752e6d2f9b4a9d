#include <doctest.h>

#include <cmath>
#include <unordered_set>
#include <vector>

#include "gmclab/parallel.hpp"
#include "gmclab/random.hpp"
#include "gmclab/stats.hpp"

using namespace gmclab;

TEST_CASE("seed streams are distinct and reproducible") {
  CHECK(seed_stream(1, 0) != seed_stream(1, 1));
  CHECK(seed_stream(1, 0) == seed_stream(1, 0));
  CHECK(seed_stream(1, 0) != seed_stream(2, 0));
}

TEST_CASE("one million splits of a master seed never collide") {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1 << 21);
  for (std::uint64_t i = 0; i < 1000000; ++i) seen.insert(seed_stream(7, i));
  CHECK(seen.size() == 1000000);
}

TEST_CASE("rng streams are deterministic") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.normal() == b.normal());
    CHECK(a.uniform() == b.uniform());
  }
}

TEST_CASE("normal variates have unit variance") {
  Rng rng(3);
  std::vector<double> x(200000);
  for (auto& v : x) v = rng.normal();
  const auto s = summarize_sample(x);
  CHECK(std::fabs(s.mean) < 4.0 * s.std_error);
  CHECK(s.variance == doctest::Approx(1.0).epsilon(0.015));
}

TEST_CASE("poisson variates match mean and variance") {
  for (double mean : {0.3, 4.0, 25.0, 90.0}) {
    Rng rng(11);
    std::vector<double> x(100000);
    for (auto& v : x) v = static_cast<double>(rng.poisson(mean));
    const auto s = summarize_sample(x);
    CHECK(std::fabs(s.mean - mean) < 4.0 * std::sqrt(mean / x.size()));
    CHECK(s.variance == doctest::Approx(mean).epsilon(0.03));
  }
}

TEST_CASE("pairwise sum is exact on integers and independent of block shape") {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  CHECK(pairwise_sum(x) == 499500.0);
}

TEST_CASE("quantiles") {
  std::vector<double> x{5, 1, 4, 2, 3};
  CHECK(median(x) == 3.0);
  CHECK(quantile(x, 0.25) == 2.0);
  CHECK(interquartile_range(x) == 2.0);
}

TEST_CASE("kolmogorov survival function reference values") {
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(0.01));
}

TEST_CASE("KS two-sample: same law passes, shifted law fails") {
  Rng rng(5);
  std::vector<double> a(3000), b(3000), c(3000);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  for (auto& v : c) v = rng.normal() + 0.3;
  CHECK(ks_two_sample(a, b).p_value > 0.001);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("KS one-sample against uniform") {
  Rng rng(9);
  std::vector<double> a(5000);
  for (auto& v : a) v = rng.uniform();
  const auto r = ks_one_sample(a, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(r.p_value > 0.001);
}

TEST_CASE("systematic resampling reproduces proportions") {
  const std::vector<double> w{1.0, 0.0, 3.0};
  const auto idx = systematic_resample(w, 400, 0.5);
  std::size_t c0 = 0, c2 = 0;
  for (auto i : idx) (i == 0 ? c0 : c2) += (i != 1);
  CHECK(c0 == 100);
  CHECK(c2 == 300);
  CHECK(effective_sample_size(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(4.0));
}

TEST_CASE("bootstrap interval brackets the sample mean") {
  Rng rng(1);
  std::vector<double> x(2000);
  for (auto& v : x) v = rng.normal();
  const auto mean = [](std::span<const double> s) { return pairwise_sum(s) / s.size(); };
  const auto ci = bootstrap_interval(x, mean, 400, 2);
  const double m = mean(x);
  CHECK(ci.lo < m);
  CHECK(ci.hi > m);
  CHECK(ci.hi - ci.lo < 0.2);
}

TEST_CASE("parallel_for result does not depend on worker count") {
  std::vector<double> a(257), b(257);
  parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = std::sin(double(i)); });
  parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = std::sin(double(i)); });
  CHECK(a == b);
}
