#include "gmclab/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmclab/csv.hpp"
#include "gmclab/error.hpp"
#include "gmclab/stats.hpp"

namespace gmclab {

void validate(const CascadeParams& p) {
  if (p.branching < 2) throw InvalidArgument("branching must be at least 2");
  if (!(p.level_height > 0.0)) throw InvalidArgument("level height must be positive");
  if (p.max_depth < 0) throw InvalidArgument("max depth must be non-negative");
}

double critical_gamma(const CascadeParams& p) { return 2.0 * std::log(static_cast<double>(p.branching)) / p.level_height; }

double kahane_peyriere(const CascadeParams& p, double gamma) {
  return gamma * p.level_height / 2.0 - std::log(static_cast<double>(p.branching));
}

double sample_increment(double a, Rng& rng) {
  double z;
  do {
    z = rng.normal();
  } while (z == 0.0);
  return a * a / (z * z);
}

double sample_increment(double a, std::uint64_t seed) {
  Rng rng(seed);
  return sample_increment(a, rng);
}

double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
  const double nu = rng.normal();
  const double my = mean * nu * nu;
  // Smaller root of the quadratic, written without cancellation.
  const double x = mean - 2.0 * mean * my / (my + std::sqrt(my * (4.0 * shape + my)));
  if (rng.uniform() * (mean + x) <= mean) return x;
  return mean * mean / x;
}

double sample_tilted_increment(double a, double gamma, Rng& rng) {
  if (!(gamma > 0.0)) throw InvalidArgument("tilted law needs gamma > 0");
  return sample_inverse_gaussian(a / gamma, a * a, rng);
}

CascadeState CascadeState::root(int branching) {
  if (branching < 2) throw InvalidArgument("branching must be at least 2");
  CascadeState s;
  s.branching_ = branching;
  s.l_.assign(1, 0.0);
  return s;
}

CascadeState evolve(const CascadeState& state, const CascadeParams& params, Rng& rng) {
  validate(params);
  if (state.branching() != params.branching) throw InvalidArgument("state and parameters disagree on branching");
  if (state.depth() >= params.max_depth) {
    throw CapacityError("depth cap " + std::to_string(params.max_depth) + " reached");
  }
  const auto b = static_cast<std::size_t>(params.branching);
  if (state.leaf_count() > params.max_leaves / b) {
    throw CapacityError("leaf count would exceed the cap of " + std::to_string(params.max_leaves));
  }
  CascadeState next;
  next.branching_ = params.branching;
  next.depth_ = state.depth() + 1;
  next.l_.resize(state.leaf_count() * b);
  const double a = params.level_height;
  for (std::size_t k = 0; k < state.leaf_count(); ++k) {
    const double base = state.l()[k];
    for (std::size_t c = 0; c < b; ++c) next.l_[k * b + c] = base + sample_increment(a, rng);
  }
  return next;
}

CascadeState grow_tree(const CascadeParams& params, int depth, Rng& rng) {
  CascadeState s = CascadeState::root(params.branching);
  for (int n = 0; n < depth; ++n) s = evolve(s, params, rng);
  return s;
}

namespace {

double log_b(const CascadeState& s) { return std::log(static_cast<double>(s.branching())); }

// log sum_i exp(e_i) over the exponent table.
double log_sum_exp(const std::vector<double>& e) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : e) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  std::vector<double> t(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) t[i] = std::exp(e[i] - mx);
  return mx + std::log(pairwise_sum(t));
}

}  // namespace

double log_subcritical_mass(const CascadeState& state, double gamma, double a) {
  const double n = state.depth();
  const double base = -n * log_b(state) + gamma * a * n;
  std::vector<double> e(state.leaf_count());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = base - 0.5 * gamma * gamma * state.l()[i];
  return log_sum_exp(e);
}

double subcritical_mass(const CascadeState& state, double gamma, double a) {
  return std::exp(log_subcritical_mass(state, gamma, a));
}

SignSplit derivative_split(const CascadeState& state, double a) {
  const double n = state.depth();
  const double base = -n * log_b(state) + 2.0 * a * n;
  std::vector<double> e(state.leaf_count());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = base - 2.0 * state.l()[i];
    mx = std::max(mx, e[i]);
  }
  std::vector<double> plus, minus;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double u = 2.0 * state.l()[i] - a * n;
    const double term = u * std::exp(e[i] - mx);
    (u >= 0.0 ? plus : minus).push_back(term);
  }
  const double scale = std::exp(mx);
  return {pairwise_sum(plus) * scale, pairwise_sum(minus) * scale};
}

double derivative_mass(const CascadeState& state, double a) {
  const SignSplit s = derivative_split(state, a);
  return s.plus + s.minus;
}

double seneta_heyde_mass(const CascadeState& state, double a) {
  if (state.depth() == 0) return 0.0;
  return std::sqrt(static_cast<double>(state.depth())) * subcritical_mass(state, 2.0, a);
}

SignSplit sign_split(const CascadeState& state, double gamma, double a) {
  const double n = state.depth();
  const double base = -n * log_b(state) + gamma * a * n;
  std::vector<double> e(state.leaf_count());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = base - 0.5 * gamma * gamma * state.l()[i];
    mx = std::max(mx, e[i]);
  }
  std::vector<double> plus, minus;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double s = -gamma * a * n + gamma * gamma * state.l()[i];
    (s >= 0.0 ? plus : minus).push_back(std::exp(e[i] - mx));
  }
  const double scale = std::exp(mx);
  return {pairwise_sum(plus) * scale, pairwise_sum(minus) * scale};
}

int schedule_n(double C, double gamma) {
  if (!(gamma > 0.0 && gamma < 2.0)) throw InvalidArgument("schedule needs 0 < gamma < 2");
  if (!(C > 0.0)) throw InvalidArgument("schedule needs C > 0");
  const double x = (C / (2.0 - gamma)) * (C / (2.0 - gamma));
  // 2 - 1.9 is not exactly 0.1 in binary; a relative guard keeps the exact cases exact.
  const double guarded = std::floor(x * (1.0 + 1e-9));
  if (guarded > static_cast<double>(std::numeric_limits<int>::max())) throw InvalidArgument("schedule overflows");
  return static_cast<int>(guarded);
}

SpineWalk spine_sample(const CascadeParams& params, double gamma, int depth, Rng& rng) {
  validate(params);
  if (!(gamma > 0.0)) throw InvalidArgument("spine needs gamma > 0");
  SpineWalk w;
  w.gamma = gamma;
  w.steps.resize(static_cast<std::size_t>(depth));
  const double a = params.level_height;
  for (auto& s : w.steps) s = -gamma * a + gamma * gamma * sample_tilted_increment(a, gamma, rng);
  return w;
}

bool TiltReport::all_consistent() const {
  return std::all_of(rows.begin(), rows.end(), [](const TiltRow& r) { return r.consistent; });
}

TiltReport tilt_consistency_check(const CascadeParams& params, double gamma, std::size_t draws) {
  validate(params);
  if (!(gamma > 0.0)) throw InvalidArgument("tilt check needs gamma > 0");
  if (draws < 2) throw InvalidArgument("tilt check needs at least two draws");
  const double a = params.level_height;
  struct Fn {
    const char* name;
    double (*f)(double);
  };
  const Fn fns[] = {{"1", [](double) { return 1.0; }},
                    {"x", [](double x) { return x; }},
                    {"x^2", [](double x) { return x * x; }},
                    {"exp(-x)", [](double x) { return std::exp(-x); }}};
  const double mu = a / gamma;
  const double lam = a * a;
  const double analytic[] = {1.0, mu, mu * mu * mu / lam + mu * mu,
                             std::exp(a * gamma * (1.0 - std::sqrt(1.0 + 2.0 / (gamma * gamma))))};
  Rng plain(seed_stream(params.seed, 0));
  Rng tilted(seed_stream(params.seed, 1));
  std::vector<double> xp(draws), wp(draws), xt(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    xp[i] = sample_increment(a, plain);
    wp[i] = std::exp(gamma * a - 0.5 * gamma * gamma * xp[i]);
    xt[i] = sample_tilted_increment(a, gamma, tilted);
  }
  TiltReport rep;
  rep.gamma = gamma;
  rep.draws = draws;
  std::vector<double> u(draws), v(draws);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < draws; ++i) {
      u[i] = wp[i] * fns[k].f(xp[i]);
      v[i] = fns[k].f(xt[i]);
    }
    const auto su = summarize_sample(u), sv = summarize_sample(v);
    TiltRow r;
    r.function = fns[k].name;
    r.weighted = su.mean;
    r.weighted_se = su.std_error;
    r.tilted = sv.mean;
    r.tilted_se = sv.std_error;
    r.analytic = analytic[k];
    const double joint = std::hypot(su.std_error, sv.std_error);
    r.consistent = std::fabs(su.mean - sv.mean) <= 5.0 * joint + 1e-12 * std::fabs(analytic[k]);
    rep.rows.push_back(r);
  }
  return rep;
}

FunctionalValue extended_sh_functional(const CascadeState& state, double a, const std::function<double(double)>& F) {
  FunctionalValue out;
  const double d = derivative_mass(state, a);
  if (!(d > 0.0) || state.depth() == 0) {
    out.excluded = true;
    return out;
  }
  const double n = state.depth();
  const double sn = std::sqrt(n);
  const double base = -n * log_b(state) + 2.0 * a * n;
  std::vector<double> t(state.leaf_count());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double l = state.l()[i];
    t[i] = std::exp(base - 2.0 * l) * F((-2.0 * a * n + 4.0 * l) / sn);
  }
  out.value = sn * pairwise_sum(t) / d;
  return out;
}

}  // namespace gmclab
