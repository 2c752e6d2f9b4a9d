#include "gmclab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gmclab/error.hpp"
#include "gmclab/random.hpp"

namespace gmclab {

double pairwise_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

SampleSummary summarize_sample(std::span<const double> x) {
  SampleSummary s;
  s.n = x.size();
  if (s.n == 0) return s;
  s.mean = pairwise_sum(x) / static_cast<double>(s.n);
  if (s.n > 1) {
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - s.mean) * (x[i] - s.mean);
    s.variance = pairwise_sum(sq) / static_cast<double>(s.n - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
  }
  return s;
}

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("covariance needs two equal samples of size >= 2");
  const double mx = pairwise_sum(x) / static_cast<double>(x.size());
  const double my = pairwise_sum(y) / static_cast<double>(y.size());
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = (x[i] - mx) * (y[i] - my);
  return pairwise_sum(p) / static_cast<double>(x.size() - 1);
}

double sample_correlation(std::span<const double> x, std::span<const double> y) {
  const double cxy = sample_covariance(x, y);
  const double cxx = sample_covariance(x, x);
  const double cyy = sample_covariance(y, y);
  return cxy / std::sqrt(cxx * cyy);
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw InvalidArgument("quantile of empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  const double f = pos - static_cast<double>(lo);
  return x[lo] + f * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double interquartile_range(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  return quantile(x, 0.75) - quantile(x, 0.25);
}

double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

static KsResult finish_ks(double d, double ne) {
  KsResult r;
  r.statistic = d;
  r.effective_n = ne;
  const double sq = std::sqrt(ne);
  r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  return r;
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y, double ne_x,
                       double ne_y) {
  if (x.empty() || y.empty()) throw InvalidArgument("KS test needs non-empty samples");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ex = ne_x > 0.0 ? ne_x : na;
  const double ey = ne_y > 0.0 ? ne_y : nb;
  return finish_ks(d, ex * ey / (ex + ey));
}

KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw InvalidArgument("KS test needs a non-empty sample");
  std::vector<double> a(x.begin(), x.end());
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return finish_ks(d, n);
}

Interval bootstrap_interval(std::span<const double> x,
                            const std::function<double(std::span<const double>)>& statistic,
                            int resamples, std::uint64_t seed, double level) {
  if (x.empty() || resamples < 2) throw InvalidArgument("bootstrap needs data and >= 2 resamples");
  Rng rng(seed);
  std::vector<double> buf(x.size());
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  for (auto& s : stats) {
    for (auto& v : buf) v = x[rng.below(x.size())];
    s = statistic(buf);
  }
  const double alpha = 0.5 * (1.0 - level);
  return {quantile(stats, alpha), quantile(stats, 1.0 - alpha)};
}

double effective_sample_size(std::span<const double> weights) {
  std::vector<double> sq(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) sq[i] = weights[i] * weights[i];
  const double s = pairwise_sum(weights);
  const double s2 = pairwise_sum(sq);
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t count,
                                             double u) {
  const double total = pairwise_sum(weights);
  if (!(total > 0.0) || weights.empty()) throw InvalidArgument("resampling needs positive total weight");
  std::vector<std::size_t> out;
  out.reserve(count);
  const double step = total / static_cast<double>(count);
  double target = u * step;
  double cum = weights[0];
  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    while (cum <= target && j + 1 < weights.size()) cum += weights[++j];
    out.push_back(j);
    target += step;
  }
  return out;
}

}  // namespace gmclab
