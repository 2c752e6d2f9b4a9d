#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gmclab {

// Sum in a fixed pairwise tree. The result depends only on the order of the
// input, never on how the caller produced it.
double pairwise_sum(std::span<const double> x);

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;   // unbiased
  double std_error = 0.0;  // sqrt(variance / n)
};

SampleSummary summarize_sample(std::span<const double> x);

double sample_covariance(std::span<const double> x, std::span<const double> y);
double sample_correlation(std::span<const double> x, std::span<const double> y);

// Linear-interpolation quantile (type 7). q in [0, 1].
double quantile(std::vector<double> x, double q);
double median(std::vector<double> x);
double interquartile_range(std::vector<double> x);

// Limiting Kolmogorov survival function Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_survival(double t);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double effective_n = 0.0;
};

// Two-sample Kolmogorov-Smirnov test. The p-value uses the asymptotic law with
// Stephens' small-sample correction. When ne_x / ne_y are positive they
// replace the sample sizes in the p-value (for weighted or resampled data).
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y,
                       double ne_x = 0.0, double ne_y = 0.0);

// One-sample test against a continuous CDF.
KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap interval of a statistic.
Interval bootstrap_interval(std::span<const double> x,
                            const std::function<double(std::span<const double>)>& statistic,
                            int resamples, std::uint64_t seed, double level = 0.95);

// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

// Systematic resampling: count output draws from weights with one uniform offset u in [0,1).
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t count,
                                             double u);

}  // namespace gmclab
