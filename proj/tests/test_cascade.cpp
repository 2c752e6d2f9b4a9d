#include <algorithm>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gmclab/cascade.hpp"
#include "gmclab/deep_cascade.hpp"
#include "gmclab/error.hpp"
#include "gmclab/stats.hpp"

using namespace gmclab;

namespace {

const double kLog4 = std::log(4.0);

CascadeParams params4(int depth = 12) {
  CascadeParams p;
  p.max_depth = depth;
  return p;
}

}  // namespace

TEST_CASE("increment law: Laplace transform, positivity, median") {
  Rng rng(11);
  const double a = kLog4;
  const int n = 200000;
  std::vector<double> x(n), lt(n);
  for (int i = 0; i < n; ++i) {
    x[i] = sample_increment(a, rng);
    CHECK_FALSE(!(x[i] > 0.0));
    lt[i] = std::exp(-2.0 * x[i]);
  }
  const auto s = summarize_sample(lt);
  // E exp(-s T) = exp(-a sqrt(2 s)) at s = 2.
  CHECK(std::fabs(s.mean - std::exp(-2.0 * a)) < 4 * s.std_error);
  // The chi-square(1) median is 0.454936.
  CHECK(median(x) == doctest::Approx(a * a / 0.4549364231195724).epsilon(0.01));
  CHECK(sample_increment(a, 5) == sample_increment(a, 5));
}

TEST_CASE("evolve: leaf count, independence, monotone paths, caps") {
  Rng rng(3);
  const auto p = params4();
  auto s1 = evolve(CascadeState::root(4), p, rng);
  CHECK(s1.depth() == 1);
  CHECK(s1.leaf_count() == 4);
  const int n = 20000;
  std::vector<double> u(n), v(n);
  for (int i = 0; i < n; ++i) {
    const auto s = evolve(CascadeState::root(4), p, rng);
    u[i] = std::exp(-s.l()[0]);
    v[i] = std::exp(-s.l()[1]);
  }
  CHECK(std::fabs(sample_correlation(u, v)) < 4.0 / std::sqrt(n));
  const auto s3 = grow_tree(p, 3, rng);
  CHECK(s3.leaf_count() == 64);
  const auto s2 = grow_tree(p, 2, rng);
  auto s2n = evolve(s2, p, rng);
  for (std::size_t k = 0; k < s2n.leaf_count(); ++k) CHECK(s2n.l()[k] > s2.l()[s2n.parent(k)]);

  auto capped = params4(2);
  CHECK_THROWS_AS(grow_tree(capped, 3, rng), CapacityError);
  auto small = params4(20);
  small.max_leaves = 100;
  CHECK_THROWS_AS(grow_tree(small, 4, rng), CapacityError);
  CascadeParams bad = params4();
  bad.level_height = 0.0;
  CHECK_THROWS_AS(validate(bad), InvalidArgument);
  CHECK_THROWS_AS(CascadeState::root(1), InvalidArgument);
}

TEST_CASE("masses at the root and at gamma = 0") {
  const auto r = CascadeState::root(4);
  CHECK(subcritical_mass(r, 1.5, kLog4) == 1.0);
  CHECK(derivative_mass(r, kLog4) == 0.0);
  CHECK(seneta_heyde_mass(r, kLog4) == 0.0);
  Rng rng(2);
  const auto s = grow_tree(params4(), 5, rng);
  CHECK(subcritical_mass(s, 0.0, kLog4) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("subcritical mass is a mean-one martingale") {
  const auto p = params4();
  const int trees = 4000;
  std::vector<double> m(trees);
  for (int t = 0; t < trees; ++t) {
    Rng rng(seed_stream(17, t));
    m[t] = subcritical_mass(grow_tree(p, 5, rng), 1.5, kLog4);
  }
  const auto s = summarize_sample(m);
  CHECK(std::fabs(s.mean - 1.0) < 4 * s.std_error);
}

TEST_CASE("derivative mass is minus the gamma-derivative at the critical point") {
  Rng rng(8);
  const auto s = grow_tree(params4(), 5, rng);
  const double h = 1e-5;
  const double fd = -(subcritical_mass(s, 2.0 + h, kLog4) - subcritical_mass(s, 2.0 - h, kLog4)) / (2 * h);
  CHECK(derivative_mass(s, kLog4) == doctest::Approx(fd).epsilon(1e-6));
  const auto split = derivative_split(s, kLog4);
  CHECK(split.plus >= 0.0);
  CHECK(split.minus <= 0.0);
  CHECK(split.plus + split.minus == doctest::Approx(derivative_mass(s, kLog4)).epsilon(1e-12));
}

TEST_CASE("schedule") {
  CHECK(schedule_n(1, 1.9) == 100);
  CHECK(schedule_n(2, 1.9) == 400);
  CHECK(schedule_n(1, 1.99) == 10000);
  CHECK(schedule_n(1, 1.8) == 25);
  CHECK(schedule_n(2, 1.8) == 100);
  CHECK_THROWS_AS(schedule_n(1, 2.0), InvalidArgument);
  CHECK_THROWS_AS(schedule_n(0, 1.5), InvalidArgument);
}

TEST_CASE("sign split adds up") {
  Rng rng(21);
  const auto s = grow_tree(params4(), 6, rng);
  for (double g : {1.2, 1.5, 1.9}) {
    const auto sp = sign_split(s, g, kLog4);
    CHECK(sp.plus >= 0.0);
    CHECK(sp.minus >= 0.0);
    CHECK(sp.plus + sp.minus == doctest::Approx(subcritical_mass(s, g, kLog4)).epsilon(1e-12));
  }
}

TEST_CASE("spine walk moments") {
  const auto p = params4();
  const double g = 1.5, a = kLog4;
  Rng rng(4);
  const auto w = spine_sample(p, g, 100000, rng);
  const auto s = summarize_sample(w.steps);
  // Tilted increments are IG(a / g, a^2): mean a / g, variance a / g^3.
  CHECK(std::fabs(s.mean - (g * a - g * a)) < 4 * s.std_error);
  CHECK(s.variance == doctest::Approx(g * g * g * g * a / (g * g * g)).epsilon(0.05));
  for (double x : w.steps) CHECK_FALSE(x < -g * a);
}

TEST_CASE("tilt consistency and Kahane-Peyriere function") {
  auto p = params4();
  p.seed = 99;
  for (double g : {0.8, 1.5, 1.9}) {
    const auto rep = tilt_consistency_check(p, g, 200000);
    CHECK(rep.rows.size() == 4);
    for (const auto& r : rep.rows) {
      INFO(r.function, " gamma=", g);
      CHECK(r.consistent);
      CHECK(std::fabs(r.tilted - r.analytic) < 5 * r.tilted_se + 1e-12);
    }
  }
  CHECK(std::fabs(kahane_peyriere(p, critical_gamma(p))) < 1e-12);
  CHECK(critical_gamma(p) == doctest::Approx(2.0));
  CHECK(kahane_peyriere(p, 1.0) < 0.0);
}

TEST_CASE("supercritical mass decays") {
  const auto p = params4();
  std::vector<double> m5, m9;
  for (int t = 0; t < 60; ++t) {
    Rng rng(seed_stream(23, t));
    auto s = grow_tree(p, 5, rng);
    m5.push_back(subcritical_mass(s, 2.5, kLog4));
    for (int k = 0; k < 4; ++k) s = evolve(s, p, rng);
    m9.push_back(subcritical_mass(s, 2.5, kLog4));
  }
  CHECK(median(m9) < median(m5));
}

TEST_CASE("extended Seneta-Heyde functional") {
  Rng rng(31);
  CascadeState s = grow_tree(params4(), 6, rng);
  while (derivative_mass(s, kLog4) <= 0.0) s = grow_tree(params4(), 6, rng);
  const auto zero = extended_sh_functional(s, kLog4, [](double) { return 0.0; });
  CHECK_FALSE(zero.excluded);
  CHECK(zero.value == 0.0);
  auto f = [](double x) { return std::min(x, 3.0); };
  auto g = [](double x) { return std::exp(-x * x); };
  const double fg = extended_sh_functional(s, kLog4, [&](double x) { return 2 * f(x) + 3 * g(x); }).value;
  CHECK(fg == doctest::Approx(2 * extended_sh_functional(s, kLog4, f).value +
                              3 * extended_sh_functional(s, kLog4, g).value).epsilon(1e-12));
  CHECK(extended_sh_functional(CascadeState::root(4), kLog4, f).excluded);
  // F = 1 gives sqrt(n) M^2 / D.
  const double one = extended_sh_functional(s, kLog4, [](double) { return 1.0; }).value;
  CHECK(one == doctest::Approx(seneta_heyde_mass(s, kLog4) / derivative_mass(s, kLog4)).epsilon(1e-12));
}

TEST_CASE("mass profile of an exact tree reproduces the tree functionals") {
  Rng rng(41);
  const auto s = grow_tree(params4(), 6, rng);
  const auto p = MassProfile::from_state(s, kLog4);
  CHECK(p.critical_mass() == doctest::Approx(subcritical_mass(s, 2.0, kLog4)).epsilon(1e-12));
  CHECK(p.subcritical_mass(1.7) == doctest::Approx(subcritical_mass(s, 1.7, kLog4)).epsilon(1e-12));
  CHECK(p.derivative_mass() == doctest::Approx(derivative_mass(s, kLog4)).epsilon(1e-10));
  const auto a = p.sign_split(1.7), b = sign_split(s, 1.7, kLog4);
  CHECK(a.plus == doctest::Approx(b.plus).epsilon(1e-12));
  CHECK(a.minus == doctest::Approx(b.minus).epsilon(1e-12));
  auto F = [](double x) { return std::min(x, 3.0); };
  if (derivative_mass(s, kLog4) > 0.0) {
    CHECK(std::sqrt(6.0) * p.weighted_functional(F) / p.derivative_mass() ==
          doctest::Approx(extended_sh_functional(s, kLog4, F).value).epsilon(1e-10));
  }
}

TEST_CASE("deep simulator kernel is the potential step law") {
  DeepCascadeOptions o;
  o.depth = 10;
  const DeepCascadeSimulator sim(o);
  const auto& k = sim.kernel();
  double total = 0, mean = 0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    CHECK(k[j] >= 0.0);
    total += k[j];
    mean += k[j] * (sim.kernel_offset() + static_cast<double>(j)) * o.bin_width;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // E dV = 2 (a / 2) - 2 a + log b = log b - a, zero for a = log b (CIC keeps the mean).
  CHECK(std::fabs(mean) < 1e-6);
  CHECK(sim.upper() >= 40.0);
  CHECK_THROWS_AS(DeepCascadeSimulator([] {
                    DeepCascadeOptions b;
                    b.probe_depths = {500};
                    return b;
                  }()),
                  InvalidArgument);
}

TEST_CASE("deep simulator matches exact trees at depth 8") {
  const int trees = 300;
  const auto p = params4();
  std::vector<double> we, de, wh, dh;
  for (int t = 0; t < trees; ++t) {
    Rng rng(seed_stream(51, t));
    const auto s = grow_tree(p, 8, rng);
    we.push_back(subcritical_mass(s, 2.0, kLog4));
    de.push_back(derivative_mass(s, kLog4));
  }
  DeepCascadeOptions o;
  o.depth = 8;
  o.probe_depths = {8};
  const DeepCascadeSimulator sim(o);
  for (int t = 0; t < trees; ++t) {
    sim.run(seed_stream(52, t), [&](const MassProfile& m) {
      wh.push_back(m.critical_mass());
      dh.push_back(m.derivative_mass());
    });
  }
  REQUIRE(wh.size() == trees);
  CHECK(ks_two_sample(we, wh).p_value > 0.001);
  CHECK(ks_two_sample(de, dh).p_value > 0.001);
  MESSAGE("median W exact ", median(we), " hybrid ", median(wh), "; median D exact ", median(de), " hybrid ",
          median(dh));
}

TEST_CASE("deep simulator is deterministic and derivative mass turns positive") {
  DeepCascadeOptions o;
  o.depth = 200;
  o.probe_depths = {50, 200};
  const DeepCascadeSimulator sim(o);
  std::vector<double> d1, d2;
  int positive = 0, total = 0;
  for (int t = 0; t < 1000; ++t) {
    sim.run(seed_stream(61, t), [&](const MassProfile& m) {
      if (m.depth == 200) {
        d1.push_back(m.derivative_mass());
        positive += m.derivative_mass() > 0.0;
        ++total;
      }
    });
  }
  for (int t = 0; t < 3; ++t) {
    sim.run(seed_stream(61, t), [&](const MassProfile& m) {
      if (m.depth == 200) d2.push_back(m.derivative_mass());
    });
  }
  for (int t = 0; t < 3; ++t) CHECK(d1[t] == d2[t]);
  CHECK(total == 1000);
  CHECK(positive > 0.95 * total);
}

TEST_CASE("deep simulator keeps a population that starts far above the grid") {
  // Both grandchildren of this b=2 root land above the grid edge; the tree
  // still carries (very small) positive mass at every later depth.
  DeepCascadeOptions o;
  o.branching = 2;
  o.level_height = std::log(2.0);
  o.depth = 60;
  o.probe_depths = {2, 60};
  const DeepCascadeSimulator sim(o);
  std::vector<double> vmin, d;
  const auto diag = sim.run(6879475832078605747ULL, [&](const MassProfile& m) {
    vmin.push_back(*std::min_element(m.position.begin(), m.position.end()));
    d.push_back(m.derivative_mass());
  });
  REQUIRE(vmin.size() == 2);
  CHECK(vmin[0] > sim.upper());
  CHECK(d[0] > 0.0);
  CHECK(d[1] > 0.0);
  CHECK(diag.dropped_weight < 1e-60);
}
