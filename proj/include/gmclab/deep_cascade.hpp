#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "gmclab/cascade.hpp"

namespace gmclab {

// Critical mass of one generation, held as atoms (V_k, w_k) where
// V = 2 l - 2 a n + n log b is the leaf potential and w is the total critical
// weight exp(-V) of the leaves represented by the atom. Every cascade
// functional of the generation is a sum over atoms.
struct MassProfile {
  int depth = 0;
  int branching = 4;
  double level_height = 0.0;
  std::vector<double> position;
  std::vector<double> weight;

  static MassProfile from_state(const CascadeState& state, double a);

  // l and 2 l - a n of an atom at potential V.
  double l_of(double v) const;
  double u_of(double v) const;

  double critical_mass() const;             // M_n^2
  double subcritical_mass(double gamma) const;  // M_n^gamma
  double derivative_mass() const;           // D_n
  SignSplit derivative_split() const;
  SignSplit sign_split(double gamma) const;
  // sum w F(S / sqrt(n)) with S = 2 (2 l - a n); divide by D_n and multiply
  // by sqrt(n) for the extended Seneta-Heyde functional.
  double weighted_functional(const std::function<double(double)>& F) const;
};

struct DeepCascadeOptions {
  int branching = 4;
  double level_height = 1.3862943611198906;
  int depth = 400;
  std::vector<int> probe_depths;
  // Subcritical parameters whose tilted mass must stay on the grid at the probe depths.
  std::vector<double> gammas;
  double bin_width = 0.1;
  // Bins whose expected leaf count is below this are resolved into explicit atoms.
  double count_threshold = 10.0;
  double lower = -20.0;
  // 0 selects an upper edge from the probe depths and gammas.
  double upper = 0.0;
};

struct DeepCascadeDiagnostics {
  std::size_t max_explicit = 0;
  double dropped_weight = 0.0;
};

// Deep-generation estimator. Leaves with sparse potential (expected count per
// bin below the threshold) are simulated individually; dense regions are
// carried as a deterministic weight density on a uniform grid of potentials,
// propagated by convolution with the spine step law IG(a/2, a^2) mapped to
// potentials. Atoms move between the two representations as the local count
// crosses the threshold, conserving weight in expectation.
class DeepCascadeSimulator {
 public:
  explicit DeepCascadeSimulator(DeepCascadeOptions options);
  ~DeepCascadeSimulator();
  DeepCascadeSimulator(const DeepCascadeSimulator&) = delete;
  DeepCascadeSimulator& operator=(const DeepCascadeSimulator&) = delete;

  const DeepCascadeOptions& options() const { return options_; }
  double upper() const { return upper_; }
  std::size_t grid_size() const { return bins_; }
  // Kernel on grid offsets, first entry at offset kernel_offset().
  const std::vector<double>& kernel() const { return kernel_; }
  int kernel_offset() const { return kernel_offset_; }

  // Simulates one tree from its seed and calls on_probe at each probe depth.
  DeepCascadeDiagnostics run(std::uint64_t seed, const std::function<void(const MassProfile&)>& on_probe) const;

 private:
  struct Fft;
  DeepCascadeOptions options_;
  double upper_ = 0.0;
  std::size_t bins_ = 0;
  long grid_origin_ = 0;  // lower / bin_width
  std::vector<double> kernel_;
  int kernel_offset_ = 0;
  std::unique_ptr<Fft> fft_;
};

}  // namespace gmclab
