#include "gmclab/walk_meander.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <ostream>

#include "gmclab/csv.hpp"
#include "gmclab/error.hpp"
#include "gmclab/random.hpp"
#include "gmclab/stats.hpp"

namespace gmclab {

namespace {

constexpr double kEnumerationLimit = 1e8;
constexpr double kCutoff = 40.0;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

int sample_value(const IncrementLaw& law, Rng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < law.values.size(); ++i) {
    if (u < law.probs[i]) return law.values[i];
    u -= law.probs[i];
  }
  return law.values.back();
}

}  // namespace

double IncrementLaw::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i];
  return m;
}

double IncrementLaw::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) v += probs[i] * (values[i] - m) * (values[i] - m);
  return v;
}

void validate(const IncrementLaw& law) {
  if (law.values.empty() || law.values.size() != law.probs.size()) throw InvalidArgument("increment law is malformed");
  double total = 0.0;
  for (double p : law.probs) {
    if (!(p > 0.0)) throw InvalidArgument("increment probabilities must be positive");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw InvalidArgument("increment probabilities must sum to 1");
  if (*std::min_element(law.values.begin(), law.values.end()) < -1) throw InvalidArgument("increments below -1");
  if (std::fabs(law.mean()) > 1e-12) throw InvalidArgument("increment law must be centred");
}

IncrementLaw coin_law() { return {"pm1", {-1, 1}, {0.5, 0.5}}; }
IncrementLaw skewed_law() { return {"skew", {-1, 0, 2}, {0.4, 0.4, 0.2}}; }

WalkLemmaValue walk_lemma_lhs(const WalkLemmaConfig& c) {
  validate(c.law);
  if (c.n < 1) throw InvalidArgument("walk length must be positive");
  if (!(c.a >= 0.0)) throw InvalidArgument("floor a must be non-negative");
  const double sn = std::sqrt(static_cast<double>(c.n));
  const double paths = std::pow(static_cast<double>(c.law.values.size()), c.n);
  WalkLemmaValue out;
  if (paths <= kEnumerationLimit) {
    // Dynamic programming over positions carries exactly the path sum.
    const int vmax = *std::max_element(c.law.values.begin(), c.law.values.end());
    const int lo = static_cast<int>(std::ceil(-c.a));
    const int hi = c.n * std::max(vmax, 0);
    std::vector<double> dist(static_cast<std::size_t>(hi - lo + 1), 0.0), next(dist.size());
    dist[static_cast<std::size_t>(-lo)] = 1.0;
    for (int k = 0; k < c.n; ++k) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] == 0.0) continue;
        for (std::size_t s = 0; s < c.law.values.size(); ++s) {
          const long j = static_cast<long>(i) + c.law.values[s];
          if (j < 0) continue;  // below the floor
          next[static_cast<std::size_t>(j)] += dist[i] * c.law.probs[s];
        }
      }
      dist.swap(next);
    }
    std::vector<double> terms;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const double x = static_cast<double>(static_cast<long>(i) + lo);
      if (dist[i] > 0.0 && x / sn >= c.p) terms.push_back(dist[i] * std::exp(c.c_n * x / sn));
    }
    out.value = pairwise_sum(terms);
    out.method = "exact";
    return out;
  }
  if (!c.allow_monte_carlo) throw CapacityError("exact enumeration infeasible and Monte Carlo disabled");
  Rng rng(c.seed);
  std::vector<double> v(c.paths);
  for (std::size_t r = 0; r < c.paths; ++r) {
    long x = 0;
    bool alive = true;
    for (int k = 0; k < c.n; ++k) {
      x += sample_value(c.law, rng);
      if (x < -c.a) {
        alive = false;
        break;
      }
    }
    v[r] = (alive && x / sn >= c.p) ? std::exp(c.c_n * x / sn) : 0.0;
  }
  const auto s = summarize_sample(v);
  out.value = s.mean;
  out.std_error = s.std_error;
  out.method = "monte_carlo";
  return out;
}

double walk_lemma_lhs_bruteforce(const WalkLemmaConfig& c) {
  validate(c.law);
  const std::size_t k = c.law.values.size();
  if (std::pow(static_cast<double>(k), c.n) > kEnumerationLimit) throw CapacityError("too many paths to enumerate");
  const double sn = std::sqrt(static_cast<double>(c.n));
  std::vector<std::size_t> idx(static_cast<std::size_t>(c.n), 0);
  double total = 0.0;
  for (;;) {
    long x = 0;
    double prob = 1.0;
    bool alive = true;
    for (std::size_t i : idx) {
      x += c.law.values[i];
      prob *= c.law.probs[i];
      alive = alive && x >= -c.a;
    }
    if (alive && x / sn >= c.p) total += prob * std::exp(c.c_n * x / sn);
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] == k) idx[d++] = 0;
    if (d == idx.size()) break;
  }
  return total;
}

double walk_lemma_bound_ratio(const WalkLemmaConfig& c) {
  return walk_lemma_lhs(c).value * std::sqrt(static_cast<double>(c.n)) * std::exp(c.p / 4.0) / (c.a + 1.0);
}

std::vector<WalkLemmaRow> walk_lemma_grid(const IncrementLaw& law, const std::vector<int>& ns,
                                          const std::vector<double>& ps, const std::vector<double>& as, double C) {
  std::vector<WalkLemmaRow> rows;
  for (int n : ns) {
    for (double p : ps) {
      for (double a : as) {
        WalkLemmaConfig c{law, n, p, a, C};
        const auto v = walk_lemma_lhs(c);
        rows.push_back({n, p, a, law.id, v.value,
                        v.value * std::sqrt(static_cast<double>(n)) * std::exp(p / 4.0) / (a + 1.0), v.method,
                        v.std_error});
      }
    }
  }
  return rows;
}

Plateau bound_ratio_plateau(const std::vector<WalkLemmaRow>& rows, int split_n) {
  Plateau p;
  for (const auto& r : rows) {
    if (r.n <= split_n) p.c_hat_short = std::max(p.c_hat_short, r.ratio);
    p.c_hat_full = std::max(p.c_hat_full, r.ratio);
  }
  if (!(p.c_hat_short > 0.0)) throw InvalidArgument("plateau needs a positive ratio below the split");
  p.growth = p.c_hat_full / p.c_hat_short - 1.0;
  return p;
}

void write_walk_grid_csv(std::ostream& os, const std::vector<WalkLemmaRow>& rows) {
  CsvWriter w(os);
  w.row({"n", "p", "a", "law_id", "lhs", "ratio", "method", "stderr"});
  for (const auto& r : rows) {
    w.field(r.n).field(r.p).field(r.a).field(r.law_id).field(r.lhs).field(r.ratio).field(r.method).field(r.std_error);
    w.end_row();
  }
}

double meander_mgf(double m) {
  if (!(m >= 0.0)) throw InvalidArgument("meander mgf needs m >= 0");
  return 1.0 + std::sqrt(2.0 * std::numbers::pi) * m * std::exp(0.5 * m * m) * std_normal_cdf(m);
}

double meander_asymptotic_ratio(double m) {
  if (!(m > 0.0)) throw InvalidArgument("asymptotic ratio needs m > 0");
  return meander_mgf(m) / (std::sqrt(2.0 * std::numbers::pi) * m * std::exp(0.5 * m * m));
}

QuadratureResult meander_integral(const std::function<double(double)>& g, double lo, double hi, double peak) {
  QuadratureResult out;
  lo = std::max(lo, 0.0);
  hi = std::min(hi, kCutoff);
  if (!(hi > lo)) {
    out.converged = true;
    return out;
  }
  std::vector<double> cuts{lo, hi};
  for (double c : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, peak - 2.0, peak, peak + 2.0}) {
    if (c > lo && c < hi) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto f = [&](double x) { return g(x) * x * std::exp(-0.5 * x * x); };
  double total = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double e = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 15, 1e-13, &e);
    err += e;
  }
  out.value = total;
  out.error = err;
  out.converged = err <= 1e-11 * std::fabs(total) + 1e-300;
  return out;
}

QuadratureResult meander_expectation(const std::function<double(double)>& F, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("scale must be positive");
  return meander_integral([&](double x) { return F(sigma * x); }, 0.0, kCutoff);
}

MgfSplit truncated_mgf_split(double C, double p) {
  if (!(C >= 0.0)) throw InvalidArgument("split needs C >= 0");
  const double c = C / std::numbers::sqrt2;
  auto g = [c](double x) { return std::exp(c * x); };
  MgfSplit s;
  s.lower = meander_integral(g, 0.0, p, c).value;
  s.upper = meander_integral(g, std::max(p, 0.0), kCutoff, c).value;
  return s;
}

double half_asymptotic_mgf(double C) {
  const double c = C / std::numbers::sqrt2;
  return 0.5 * std::sqrt(2.0 * std::numbers::pi) * c * std::exp(0.5 * c * c);
}

DiscreteLaw rademacher() { return {{-1.0, 1.0}, {0.5, 0.5}}; }

VonBahrEsseenReport von_bahr_esseen_check(const std::vector<DiscreteLaw>& laws, double q, std::size_t draws,
                                          std::uint64_t seed) {
  if (!(q >= 1.0 && q <= 2.0)) throw InvalidArgument("q must lie in [1, 2]");
  if (laws.empty()) throw InvalidArgument("need at least one variable");
  double outcomes = 1.0;
  for (const auto& l : laws) {
    if (l.values.empty() || l.values.size() != l.probs.size()) throw InvalidArgument("discrete law is malformed");
    double m = 0.0, t = 0.0;
    for (std::size_t i = 0; i < l.values.size(); ++i) {
      m += l.values[i] * l.probs[i];
      t += l.probs[i];
    }
    if (std::fabs(t - 1.0) > 1e-12 || std::fabs(m) > 1e-12) throw InvalidArgument("laws must be centred probability laws");
    outcomes *= static_cast<double>(l.values.size());
  }
  VonBahrEsseenReport r;
  r.q = q;
  r.k = laws.size();
  double moments = 0.0;
  for (const auto& l : laws) {
    for (std::size_t i = 0; i < l.values.size(); ++i) moments += l.probs[i] * std::pow(std::fabs(l.values[i]), q);
  }
  r.rhs = std::pow(2.0, q) * moments;
  if (outcomes <= static_cast<double>(1u << 20)) {
    std::vector<std::size_t> idx(laws.size(), 0);
    double total = 0.0;
    for (;;) {
      double s = 0.0, p = 1.0;
      for (std::size_t j = 0; j < laws.size(); ++j) {
        s += laws[j].values[idx[j]];
        p *= laws[j].probs[idx[j]];
      }
      total += p * std::pow(std::fabs(s), q);
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] == laws[d].values.size()) idx[d++] = 0;
      if (d == idx.size()) break;
    }
    r.lhs = total;
    r.method = "exact";
  } else {
    Rng rng(seed);
    std::vector<double> v(draws);
    for (auto& x : v) {
      double s = 0.0;
      for (const auto& l : laws) {
        double u = rng.uniform();
        std::size_t i = 0;
        while (i + 1 < l.probs.size() && u >= l.probs[i]) u -= l.probs[i++];
        s += l.values[i];
      }
      x = std::pow(std::fabs(s), q);
    }
    const auto st = summarize_sample(v);
    r.lhs = st.mean;
    r.lhs_se = st.std_error;
    r.method = "monte_carlo";
  }
  r.holds = r.lhs <= r.rhs + 4.0 * std::hypot(r.lhs_se, r.rhs_se);
  return r;
}

}  // namespace gmclab
