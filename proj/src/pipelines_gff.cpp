#include <algorithm>
#include <cmath>
#include <numbers>

#include "gmclab/chaos_measures.hpp"
#include "gmclab/csv.hpp"
#include "gmclab/error.hpp"
#include "gmclab/parallel.hpp"
#include "gmclab/random.hpp"
#include "gmclab/rooted.hpp"
#include "gmclab/stats.hpp"
#include "pipelines.hpp"

namespace gmclab::detail {

namespace {

struct LatticeKeys {
  Shape shape = Shape::unit_disk;
  int m = 64;
  int eps_cells = 8;
  Sampler sampler = Sampler::dense_factorization;
};

LatticeKeys read_lattice(const Config& c, int default_m, int max_m) {
  LatticeKeys k;
  try {
    k.shape = parse_shape(c.get_string("shape", "unit_disk"));
    k.sampler = parse_sampler(c.get_string("sampler", "dense_factorization"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const auto m = c.get_int("m", default_m);
  require(m >= 8 && m <= max_m, "m must lie in [8, " + std::to_string(max_m) + "]");
  k.m = static_cast<int>(m);
  if (k.sampler == Sampler::spectral) require(k.shape == Shape::unit_square, "the spectral sampler needs shape = unit_square");
  return k;
}

double eps_for(const LatticeDomain& d, std::int64_t cells) {
  const double eps = static_cast<double>(cells) * d.spacing();
  return eps;
}

void check_eps_cells(std::int64_t cells, int m) {
  require(cells >= 2, "eps_cells must be at least 2");
  require(cells < m / 2, "eps_cells must be below m / 2");
}

}  // namespace

void run_gff_expectations(const Config& c, Context& ctx) {
  const LatticeKeys lk = read_lattice(c, 64, kMaxFactorizationResolution);
  const auto eps_cells = c.get_int("eps_cells", 8);
  const auto gammas = c.get_double_list("gammas", {0.5, 1.0, 1.5});
  const auto replicas = c.get_uint("replicas", 2000);
  c.require_all_used();
  check_eps_cells(eps_cells, lk.m);
  require(!gammas.empty(), "gammas must not be empty");
  for (double g : gammas) require(g >= 0.0 && g < 2.0, "gamma " + label(g) + " outside [0, 2)");
  require(replicas >= 2, "replicas must be at least 2");

  const auto domain = LatticeDomain::build(lk.shape, lk.m, {.dense_green = false});
  const double eps = eps_for(*domain, eps_cells);
  const CircleAverager averager(domain, eps);
  const std::size_t q = gammas.size() + 1;  // masses, then the derivative total
  std::vector<double> values(replicas * q);
  parallel_for(replicas, ctx.workers, [&](std::size_t k) {
    const auto field = sample_field(domain, seed_stream(ctx.seed, k), lk.sampler);
    const auto avg = average_field(field, averager);
    for (std::size_t j = 0; j < gammas.size(); ++j) values[k * q + j] = total_mass(subcritical_measure(avg, gammas[j]));
    values[k * q + gammas.size()] = total_mass(derivative_measure(avg));
  });

  std::ostringstream raw;
  CsvWriter rw(raw);
  rw.row({"replica", "seed", "quantity", "gamma", "value"});
  for (std::size_t k = 0; k < replicas; ++k) {
    for (std::size_t j = 0; j < q; ++j) {
      const bool deriv = j == gammas.size();
      rw.field(static_cast<std::uint64_t>(k)).field(seed_stream(ctx.seed, k));
      rw.field(deriv ? "derivative" : "mass").field(deriv ? 2.0 : gammas[j]).field(values[k * q + j]);
      rw.end_row();
    }
  }

  const bool disk = lk.shape == Shape::unit_disk;
  std::ostringstream sum;
  CsvWriter sw(sum);
  sw.row({"quantity", "gamma", "mean", "std_error", "N", "closed_form", "lattice_oracle"});
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < q; ++j) {
    const bool deriv = j == gammas.size();
    std::vector<double> col(replicas);
    for (std::size_t k = 0; k < replicas; ++k) col[k] = values[k * q + j];
    const auto s = summarize_sample(col);
    const double g = deriv ? 2.0 : gammas[j];
    const double closed = deriv ? 2.0 * std::numbers::pi / 9.0 : std::numbers::pi / (1.0 + g * g / 2.0);
    const double lattice = deriv ? expected_derivative_oracle(*domain, regions::whole())
                                 : expected_mass_oracle(*domain, g, regions::whole());
    const std::string tag = deriv ? "expected_derivative" : "expected_mass gamma=" + label(g);
    if (disk) {
      const double tol = 4.0 * s.std_error + 0.05 * closed;
      ctx.add(acceptance_row(tag, s.mean, s.std_error, replicas, "|mean - closed form| <= 4 SE + 5%",
                             std::fabs(s.mean - closed) <= tol, "closed form " + format_double(closed)));
    }
    StatRow r = info_row(tag + " vs lattice", s.mean, s.std_error, replicas, "lattice oracle " + format_double(lattice));
    r.threshold = "|mean - lattice oracle| <= 4 SE + 5%";
    r.pass = std::fabs(s.mean - lattice) <= 4.0 * s.std_error + 0.05 * std::fabs(lattice);
    ctx.add(r);
    sw.field(deriv ? "derivative" : "mass").field(g).field(s.mean).field(s.std_error);
    sw.field(static_cast<std::uint64_t>(replicas)).field(disk ? format_double(closed) : std::string()).field(lattice);
    sw.end_row();
    table.push_back({{"quantity", deriv ? "derivative" : "mass"},
                     {"gamma", g},
                     {"mean", s.mean},
                     {"std_error", s.std_error},
                     {"lattice_oracle", lattice}});
  }
  ctx.result->tables["params"] = {{"shape", to_string(lk.shape)}, {"m", lk.m},   {"eps", eps},
                                  {"sampler", to_string(lk.sampler)}, {"N", replicas}};
  ctx.result->tables["expectations"] = table;
  ctx.write_csv("replicas", raw.str());
  ctx.write_csv("summary", sum.str());
}

void run_gff_theorem1(const Config& c, Context& ctx) {
  const LatticeKeys lk = read_lattice(c, 64, kMaxFactorizationResolution);
  const auto cells = c.get_int_list("eps_cells", {16, 8, 4});
  const auto gammas = c.get_double_list("gammas", {1.5, 1.8, 1.9});
  const auto replicas = c.get_uint("replicas", 200);
  c.require_all_used();
  require(!cells.empty() && !gammas.empty(), "eps_cells and gammas must not be empty");
  for (auto e : cells) check_eps_cells(e, lk.m);
  for (double g : gammas) require(g > 1.0 && g < 2.0, "gamma " + label(g) + " outside (1, 2)");
  require(replicas >= 2, "replicas must be at least 2");

  const auto domain = LatticeDomain::build(lk.shape, lk.m, {.dense_green = false});
  const Region region = regions::centred_right_half(lk.shape);
  std::vector<CircleAverager> averagers;
  for (auto e : cells) averagers.emplace_back(domain, eps_for(*domain, e));
  const std::size_t q = cells.size() * gammas.size();
  std::vector<Theorem1Statistic> stats(replicas * q);
  parallel_for(replicas, ctx.workers, [&](std::size_t k) {
    const auto field = sample_field(domain, seed_stream(ctx.seed, k), lk.sampler);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto avg = average_field(field, averagers[i]);
      for (std::size_t j = 0; j < gammas.size(); ++j) {
        stats[k * q + i * gammas.size() + j] = theorem1_statistic(avg, gammas[j], region);
      }
    }
  });

  std::ostringstream raw, sum;
  CsvWriter rw(raw), sw(sum);
  rw.row({"replica", "seed", "eps", "gamma", "x", "y", "ratio"});
  sw.row({"eps", "gamma", "median_ratio", "iqr", "N", "excluded"});
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double eps = averagers[i].epsilon();
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      std::vector<double> ratios;
      std::uint64_t excluded = 0;
      for (std::size_t k = 0; k < replicas; ++k) {
        const auto& t = stats[k * q + i * gammas.size() + j];
        const bool ok = t.y > 0.0;
        if (ok) ratios.push_back(t.x / t.y);
        else ++excluded;
        rw.field(static_cast<std::uint64_t>(k)).field(seed_stream(ctx.seed, k)).field(eps).field(gammas[j]);
        rw.field(t.x).field(t.y).field(ok ? format_double(t.x / t.y) : std::string());
        rw.end_row();
      }
      const double med = ratios.empty() ? std::nan("") : median(ratios);
      const double iqr = ratios.empty() ? std::nan("") : interquartile_range(ratios);
      StatRow r = info_row("ratio_median eps=" + label(eps) + " gamma=" + label(gammas[j]), med, iqr, ratios.size(),
                           "median of x/y, dispersion is the IQR");
      r.excluded = excluded;
      ctx.add(r);
      sw.field(eps).field(gammas[j]).field(med).field(iqr);
      sw.field(static_cast<std::uint64_t>(ratios.size())).field(excluded);
      sw.end_row();
      table.push_back({{"eps", eps}, {"gamma", gammas[j]}, {"median_ratio", med}, {"iqr", iqr},
                       {"count_excluded", excluded}});
    }
  }
  ctx.result->tables["params"] = {{"shape", to_string(lk.shape)}, {"m", lk.m}, {"N", replicas}};
  ctx.result->tables["ratios"] = table;
  ctx.write_csv("replicas", raw.str());
  ctx.write_csv("summary", sum.str());
}

void run_rooted_equivalence(const Config& c, Context& ctx) {
  const LatticeKeys lk = read_lattice(c, 32, 48);
  const auto eps_cells = c.get_int("eps_cells", 8);
  const auto gammas = c.get_double_list("gammas", {0.5, 1.0, 1.5});
  const auto replicas = c.get_uint("replicas", 5000);
  c.require_all_used();
  check_eps_cells(eps_cells, lk.m);
  require(!gammas.empty(), "gammas must not be empty");
  for (double g : gammas) require(g >= 0.0 && g < 2.0, "gamma " + label(g) + " outside [0, 2)");
  require(replicas >= 10, "replicas must be at least 10");

  const auto domain = LatticeDomain::build(lk.shape, lk.m);
  const double eps = eps_for(*domain, eps_cells);
  std::ostringstream raw, sum;
  CsvWriter rw(raw), sw(sum);
  rw.row({"gamma", "route", "index", "value"});
  sw.row({"gamma", "eps", "N", "ks_statistic", "p_value", "effective_n", "ess", "low_ess", "mean_shifted",
          "mean_plain", "predicted_shift"});
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double g = gammas[i];
    const auto rep = rooted_equivalence_test(domain, g, eps, replicas, seed_stream(ctx.seed, i), ctx.workers);
    ctx.add(acceptance_row("ks gamma=" + label(g), rep.ks.p_value, rep.ks.statistic, replicas,
                           "KS p > 0.01 and ESS >= N/10", rep.ks.p_value > 0.01 && !rep.low_ess,
                           "ess " + format_double(rep.effective_sample_size)));
    const auto sa = summarize_sample(rep.shift_route);
    const auto sb = summarize_sample(rep.size_biased_route);
    StatRow shift = info_row("mean_shift gamma=" + label(g), rep.mean_shifted - rep.mean_plain,
                             std::hypot(sa.std_error, sb.std_error), replicas,
                             "predicted " + format_double(rep.predicted_shift));
    shift.threshold = "|shift - predicted| <= 4 SE";
    shift.pass = std::fabs(shift.estimate - rep.predicted_shift) <= 4.0 * shift.dispersion;
    ctx.add(shift);
    for (std::size_t k = 0; k < rep.shift_route.size(); ++k) {
      rw.field(g).field("shift").field(static_cast<std::uint64_t>(k)).field(rep.shift_route[k]);
      rw.end_row();
    }
    for (std::size_t k = 0; k < rep.size_biased_route.size(); ++k) {
      rw.field(g).field("size_biased").field(static_cast<std::uint64_t>(k)).field(rep.size_biased_route[k]);
      rw.end_row();
    }
    sw.field(g).field(eps).field(static_cast<std::uint64_t>(replicas)).field(rep.ks.statistic).field(rep.ks.p_value);
    sw.field(rep.ks.effective_n).field(rep.effective_sample_size).field(rep.low_ess ? "true" : "false");
    sw.field(rep.mean_shifted).field(rep.mean_plain).field(rep.predicted_shift);
    sw.end_row();
  }
  ctx.result->tables["params"] = {{"shape", to_string(lk.shape)}, {"m", lk.m}, {"eps", eps}, {"N", replicas}};
  ctx.write_csv("samples", raw.str());
  ctx.write_csv("ks", sum.str());
}

void run_moment_bounds(const Config& c, Context& ctx) {
  const LatticeKeys lk = read_lattice(c, 32, 48);
  const auto eps_cells = c.get_int("eps_cells", 8);
  const auto gammas = c.get_double_list("gammas", {1.2, 1.5, 1.8, 1.9});
  const auto replicas = c.get_uint("replicas", 10000);
  c.require_all_used();
  check_eps_cells(eps_cells, lk.m);
  require(!gammas.empty(), "gammas must not be empty");
  for (double g : gammas) require(g > 1.0 && g < 2.0, "gamma " + label(g) + " outside (1, 2)");
  require(replicas >= 10, "replicas must be at least 10");

  const auto domain = LatticeDomain::build(lk.shape, lk.m);
  const double eps = eps_for(*domain, eps_cells);
  const auto rows = uniform_moment_check(domain, gammas, eps, replicas, ctx.seed, ctx.workers);
  for (const auto& m : rows) {
    StatRow r = info_row(m.quantity + " gamma=" + label(m.gamma), m.estimate, m.ci_hi - m.ci_lo, m.n,
                         "95% bootstrap interval [" + format_double(m.ci_lo) + ", " + format_double(m.ci_hi) + "]");
    r.threshold = "CI width < 20% of the estimate";
    r.pass = m.ci_hi - m.ci_lo < 0.2 * m.estimate;
    if (m.quantity == "rooted_moment") {
      r.threshold += "; estimate <= (mean mass)^(p-1)";
      r.pass = r.pass && m.estimate <= m.jensen_bound;
    }
    ctx.add(r);
  }
  for (const std::string q : {"rooted_moment", "half_disk_ratio"}) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& m : rows) {
      if (m.quantity != q) continue;
      lo = std::min(lo, m.ci_hi);
      hi = std::max(hi, m.ci_hi);
    }
    StatRow r = info_row(q + " bound_spread", hi / lo, 0.0, gammas.size(), "max / min upper confidence bound");
    r.threshold = "spread <= 3";
    r.pass = hi / lo <= 3.0;
    ctx.add(r);
  }
  std::ostringstream os;
  write_moment_csv(os, rows);
  ctx.result->tables["params"] = {{"shape", to_string(lk.shape)}, {"m", lk.m}, {"eps", eps}, {"N", replicas}};
  ctx.write_csv("moments", os.str());
}

}  // namespace gmclab::detail
