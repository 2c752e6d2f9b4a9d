#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace gmclab {

// Increment law on a finite integer support.
struct IncrementLaw {
  std::string id;
  std::vector<int> values;
  std::vector<double> probs;

  double mean() const;
  double variance() const;
};

// Throws InvalidArgument unless probabilities sum to 1, min support >= -1 and mean is 0 (to 1e-12).
void validate(const IncrementLaw& law);
IncrementLaw coin_law();    // +-1 with probability 1/2
IncrementLaw skewed_law();  // {-1, 0, 2} with {0.4, 0.4, 0.2}

struct WalkLemmaConfig {
  IncrementLaw law;
  int n = 1;
  double p = 1.0;
  double a = 0.0;    // floor: inf_k X_k >= -a
  double c_n = 1.0;  // value of the sequence C_n at this n
  bool allow_monte_carlo = true;
  std::uint64_t seed = 1;
  std::size_t paths = 1000000;
};

struct WalkLemmaValue {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact values
  std::string method;      // "exact" or "monte_carlo"
};

// E[exp(C_n X_n / sqrt n) 1{X_n / sqrt n >= p} 1{min_k X_k >= -a}], X_0 = 0.
// Exact by dynamic programming over positions when support^n <= 1e8,
// otherwise Monte Carlo (or CapacityError when disallowed).
WalkLemmaValue walk_lemma_lhs(const WalkLemmaConfig& config);
// Same expectation by explicit enumeration of all support^n paths.
double walk_lemma_lhs_bruteforce(const WalkLemmaConfig& config);
// LHS * sqrt(n) * exp(p / 4) / (a + 1).
double walk_lemma_bound_ratio(const WalkLemmaConfig& config);

struct WalkLemmaRow {
  int n = 0;
  double p = 0.0;
  double a = 0.0;
  std::string law_id;
  double lhs = 0.0;
  double ratio = 0.0;
  std::string method;
  double std_error = 0.0;
};

// Full grid with C_n = C.
std::vector<WalkLemmaRow> walk_lemma_grid(const IncrementLaw& law, const std::vector<int>& ns,
                                          const std::vector<double>& ps, const std::vector<double>& as, double C);

struct Plateau {
  double c_hat_short = 0.0;  // max ratio over n <= split
  double c_hat_full = 0.0;   // max ratio over the whole grid
  double growth = 0.0;       // c_hat_full / c_hat_short - 1
};

Plateau bound_ratio_plateau(const std::vector<WalkLemmaRow>& rows, int split_n);

void write_walk_grid_csv(std::ostream& os, const std::vector<WalkLemmaRow>& rows);

// Brownian meander endpoint R_1 has density x exp(-x^2 / 2) on [0, inf).

// E exp(m R_1) = 1 + sqrt(2 pi) m exp(m^2 / 2) Phi(m), m >= 0.
double meander_mgf(double m);
// meander_mgf(m) / (sqrt(2 pi) m exp(m^2 / 2)).
double meander_asymptotic_ratio(double m);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

// Integral of g(x) x exp(-x^2/2) over [lo, hi], hi capped at the cutoff 40,
// by adaptive Gauss-Kronrod split at the peak of exp(peak x - x^2/2).
QuadratureResult meander_integral(const std::function<double(double)>& g, double lo, double hi, double peak = 1.0);
// E F(sigma R_1).
QuadratureResult meander_expectation(const std::function<double(double)>& F, double sigma);

struct MgfSplit {
  double lower = 0.0;  // E[exp(c R_1) 1{R_1 <= p}]
  double upper = 0.0;  // E[exp(c R_1) 1{R_1 > p}]
};

// c = C / sqrt 2.
MgfSplit truncated_mgf_split(double C, double p);
// 1/2 sqrt(2 pi) (C / sqrt 2) exp(C^2 / 4): half the asymptotic mgf at C / sqrt 2.
double half_asymptotic_mgf(double C);

// Centred discrete law with real support.
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;
};

DiscreteLaw rademacher();

struct VonBahrEsseenReport {
  double q = 0.0;
  std::size_t k = 0;
  double lhs = 0.0;  // E|sum X_i|^q
  double lhs_se = 0.0;
  double rhs = 0.0;  // 2^q sum E|X_i|^q
  double rhs_se = 0.0;
  bool holds = false;  // lhs <= rhs + 4 joint standard errors
  std::string method;
};

// Exact enumeration when the product of support sizes is at most 2^20, otherwise Monte Carlo.
VonBahrEsseenReport von_bahr_esseen_check(const std::vector<DiscreteLaw>& laws, double q, std::size_t draws = 100000,
                                          std::uint64_t seed = 1);

}  // namespace gmclab
