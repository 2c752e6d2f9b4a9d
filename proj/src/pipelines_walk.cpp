#include <algorithm>
#include <cmath>
#include <numbers>

#include "gmclab/csv.hpp"
#include "gmclab/error.hpp"
#include "gmclab/random.hpp"
#include "gmclab/walk_meander.hpp"
#include "pipelines.hpp"

namespace gmclab::detail {

void run_walk_lemma(const Config& c, Context& ctx) {
  const auto law_ids = c.get_string_list("laws", {"pm1", "skew"});
  const auto ns64 = c.get_int_list("ns", {4, 5, 6, 7, 8, 9, 10, 11, 12});
  const auto ps = c.get_double_list("ps", {1.0, 2.0, 4.0});
  const auto as = c.get_double_list("as", {0.0, 1.0, 2.0});
  const double C = c.get_double("C", 1.0);
  const auto split = c.get_int("split_n", 8);
  c.require_all_used();
  require(!law_ids.empty() && !ns64.empty() && !ps.empty() && !as.empty(), "grid axes must not be empty");
  std::vector<IncrementLaw> laws;
  for (const auto& id : law_ids) {
    if (id == "pm1") laws.push_back(coin_law());
    else if (id == "skew") laws.push_back(skewed_law());
    else throw ConfigError("unknown increment law '" + id + "' (pm1, skew)");
  }
  std::vector<int> ns;
  for (auto n : ns64) {
    require(n >= 1 && n <= 40, "n must lie in [1, 40]");
    ns.push_back(static_cast<int>(n));
  }
  for (double a : as) require(a >= 0.0, "a must be non-negative");
  require(std::isfinite(C), "C must be finite");
  require(std::any_of(ns.begin(), ns.end(), [&](int n) { return n <= split; }), "no n at or below split_n");

  std::vector<WalkLemmaRow> all;
  for (const auto& law : laws) {
    const auto rows = walk_lemma_grid(law, ns, ps, as, C);
    const Plateau p = bound_ratio_plateau(rows, static_cast<int>(split));
    const bool finite = std::isfinite(p.c_hat_full) && p.c_hat_short > 0.0;
    ctx.add(acceptance_row("plateau law=" + law.id, p.growth, p.c_hat_full, rows.size(),
                           "max ratio finite, growth from n<=" + std::to_string(split) + " to full grid < 10%",
                           finite && p.growth < 0.10,
                           "c_hat(short) " + format_double(p.c_hat_short) + ", c_hat(full) " +
                               format_double(p.c_hat_full)));
    all.insert(all.end(), rows.begin(), rows.end());
  }
  std::ostringstream os;
  write_walk_grid_csv(os, all);
  ctx.result->tables["params"] = {{"laws", law_ids}, {"ns", ns}, {"ps", ps}, {"as", as}, {"C", C}};
  ctx.write_csv("grid", os.str());
}

void run_meander_tables(const Config& c, Context& ctx) {
  const double mgf_max = c.get_double("mgf_max", 5.0);
  const double mgf_step = c.get_double("mgf_step", 0.25);
  const double split_C = c.get_double("split_C", 6.0);
  const auto table_Cs = c.get_double_list("split_table_Cs", {1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 24, 28, 32});
  const auto vbe_draws = c.get_uint("vbe_draws", 100000);
  c.require_all_used();
  require(mgf_max > 0.0 && mgf_max <= 20.0, "mgf_max must lie in (0, 20]");
  require(mgf_step > 0.0 && mgf_step <= mgf_max, "mgf_step must lie in (0, mgf_max]");
  require(split_C > 0.0 && split_C <= 40.0, "split_C must lie in (0, 40]");
  for (double v : table_Cs) require(v > 0.0 && v <= 40.0, "split table C must lie in (0, 40]");
  require(vbe_draws >= 2, "vbe_draws must be at least 2");

  // Closed form against quadrature.
  std::ostringstream mg;
  CsvWriter mw(mg);
  mw.row({"m", "closed_form", "quadrature", "rel_error", "quad_error"});
  double worst = 0.0;
  bool converged = true;
  std::size_t points = 0;
  const auto steps = static_cast<long>(std::floor(mgf_max / mgf_step + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const double m = static_cast<double>(i) * mgf_step;
    const double closed = meander_mgf(m);
    const auto q = meander_integral([m](double x) { return std::exp(m * x); }, 0.0, INFINITY, m);
    const double rel = std::fabs(q.value - closed) / closed;
    worst = std::max(worst, rel);
    converged = converged && q.converged;
    ++points;
    mw.field(m).field(closed).field(q.value).field(rel).field(q.error);
    mw.end_row();
  }
  ctx.add(acceptance_row("mgf_identity", worst, 0.0, points, "max relative error <= 1e-10 on [0, " + label(mgf_max) + "]",
                         worst <= 1e-10 && converged, converged ? "" : "quadrature not converged"));
  {
    const double m = mgf_max;
    const auto q = meander_integral([m](double x) { return std::exp(m * x); }, 0.0, INFINITY, m);
    const double ratio = q.value / (std::sqrt(2.0 * std::numbers::pi) * m * std::exp(0.5 * m * m));
    ctx.add(acceptance_row("asymptotic_ratio m=" + label(m), ratio, std::fabs(ratio - 1.0), 1, "|ratio - 1| <= 1e-3",
                           std::fabs(ratio - 1.0) <= 1e-3,
                           "closed-form ratio " + format_double(meander_asymptotic_ratio(m))));
  }

  // Truncated mgf split at p = C / sqrt 2.
  auto split_row = [](double C) {
    const double p = C / std::numbers::sqrt2;
    const auto s = truncated_mgf_split(C, p);
    const double half = half_asymptotic_mgf(C);
    const double full = meander_mgf(C / std::numbers::sqrt2);
    struct Out {
      double p, lower, upper, half, full;
    };
    return Out{p, s.lower, s.upper, half, full};
  };
  std::ostringstream sp;
  CsvWriter sw(sp);
  sw.row({"C", "p", "lower", "upper", "half_asymptotic", "lower_rel", "upper_rel", "sum_rel_error"});
  for (double C : table_Cs) {
    const auto o = split_row(C);
    sw.field(C).field(o.p).field(o.lower).field(o.upper).field(o.half);
    sw.field(o.lower / o.half - 1.0).field(o.upper / o.half - 1.0).field(std::fabs(o.lower + o.upper - o.full) / o.full);
    sw.end_row();
  }
  {
    const auto o = split_row(split_C);
    const double rl = o.lower / o.half - 1.0, ru = o.upper / o.half - 1.0;
    const std::string cl = " C=" + label(split_C);
    ctx.add(acceptance_row("split_lower" + cl, o.lower, rl, 1, "within 5% of half the asymptotic mgf",
                           std::fabs(rl) <= 0.05, "half asymptotic " + format_double(o.half)));
    ctx.add(acceptance_row("split_upper" + cl, o.upper, ru, 1, "within 5% of half the asymptotic mgf",
                           std::fabs(ru) <= 0.05, "half asymptotic " + format_double(o.half)));
    StatRow sum = info_row("split_sum" + cl, o.lower + o.upper, std::fabs(o.lower + o.upper - o.full) / o.full, 1);
    sum.threshold = "relative error <= 1e-9";
    sum.pass = sum.dispersion <= 1e-9;
    ctx.add(sum);
  }

  // Endpoint density: normalization and mean.
  {
    const auto one = meander_expectation([](double) { return 1.0; }, 1.0);
    const auto mean = meander_expectation([](double x) { return x; }, 1.0);
    const double target = std::sqrt(std::numbers::pi / 2.0);
    StatRow r1 = info_row("density_normalization", one.value, std::fabs(one.value - 1.0), 1);
    r1.threshold = "within 1e-10 of 1";
    r1.pass = r1.dispersion <= 1e-10;
    ctx.add(r1);
    StatRow r2 = info_row("density_mean", mean.value, std::fabs(mean.value - target), 1, "sqrt(pi/2)");
    r2.threshold = "within 1e-10 of sqrt(pi/2)";
    r2.pass = r2.dispersion <= 1e-10;
    ctx.add(r2);
  }

  // von Bahr-Esseen inequality.
  std::ostringstream vb;
  CsvWriter vw(vb);
  vw.row({"case", "q", "k", "lhs", "lhs_se", "rhs", "rhs_se", "holds", "method"});
  struct Case {
    std::string name;
    double q;
    std::vector<DiscreteLaw> laws;
  };
  const DiscreteLaw skew{{-1.0, 0.0, 2.0}, {0.4, 0.4, 0.2}};
  const std::vector<Case> cases = {
      {"rademacher", 1.25, std::vector<DiscreteLaw>(8, rademacher())},
      {"rademacher", 2.0, std::vector<DiscreteLaw>(8, rademacher())},
      {"single", 1.5, {skew}},
      {"skew_mc", 1.25, std::vector<DiscreteLaw>(24, skew)},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& cs = cases[i];
    const auto r = von_bahr_esseen_check(cs.laws, cs.q, vbe_draws, seed_stream(ctx.seed, i));
    StatRow row = info_row("von_bahr_esseen " + cs.name + " q=" + label(cs.q) + " k=" + std::to_string(r.k), r.lhs,
                           r.lhs_se, r.method == "exact" ? 0 : vbe_draws, "rhs " + format_double(r.rhs) + ", " + r.method);
    row.threshold = "lhs <= rhs + 4 joint SE";
    row.pass = r.holds;
    ctx.add(row);
    vw.field(cs.name).field(cs.q).field(static_cast<std::uint64_t>(r.k)).field(r.lhs).field(r.lhs_se);
    vw.field(r.rhs).field(r.rhs_se).field(r.holds ? "true" : "false").field(r.method);
    vw.end_row();
  }

  ctx.result->tables["params"] = {{"mgf_max", mgf_max}, {"mgf_step", mgf_step}, {"split_C", split_C}};
  ctx.write_csv("mgf", mg.str());
  ctx.write_csv("split", sp.str());
  ctx.write_csv("von_bahr_esseen", vb.str());
}

}  // namespace gmclab::detail
