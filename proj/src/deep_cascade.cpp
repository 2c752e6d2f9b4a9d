#include "gmclab/deep_cascade.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <mutex>

#include "gmclab/error.hpp"
#include "gmclab/stats.hpp"

namespace gmclab {

namespace {

double log_sum_exp(const std::vector<double>& e) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : e) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  std::vector<double> t(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) t[i] = std::exp(e[i] - mx);
  return mx + std::log(pairwise_sum(t));
}

std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

MassProfile MassProfile::from_state(const CascadeState& state, double a) {
  MassProfile p;
  p.depth = state.depth();
  p.branching = state.branching();
  p.level_height = a;
  const double n = state.depth();
  const double shift = -2.0 * a * n + n * std::log(static_cast<double>(state.branching()));
  p.position.resize(state.leaf_count());
  p.weight.resize(state.leaf_count());
  for (std::size_t i = 0; i < state.leaf_count(); ++i) {
    const double v = 2.0 * state.l()[i] + shift;
    p.position[i] = v;
    p.weight[i] = std::exp(-v);
  }
  return p;
}

double MassProfile::l_of(double v) const {
  const double n = depth;
  return 0.5 * (v + 2.0 * level_height * n - n * std::log(static_cast<double>(branching)));
}

double MassProfile::u_of(double v) const {
  const double n = depth;
  return v + level_height * n - n * std::log(static_cast<double>(branching));
}

double MassProfile::critical_mass() const { return pairwise_sum(weight); }

double MassProfile::subcritical_mass(double gamma) const {
  const double n = depth;
  const double base = -n * std::log(static_cast<double>(branching)) + gamma * level_height * n;
  std::vector<double> e(weight.size());
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double v = position[i];
    e[i] = std::log(weight[i]) + v + base - 0.5 * gamma * gamma * l_of(v);
  }
  return std::exp(log_sum_exp(e));
}

double MassProfile::derivative_mass() const {
  const SignSplit s = derivative_split();
  return s.plus + s.minus;
}

SignSplit MassProfile::derivative_split() const {
  std::vector<double> plus, minus;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double u = u_of(position[i]);
    (u >= 0.0 ? plus : minus).push_back(weight[i] * u);
  }
  return {pairwise_sum(plus), pairwise_sum(minus)};
}

SignSplit MassProfile::sign_split(double gamma) const {
  const double n = depth;
  const double base = -n * std::log(static_cast<double>(branching)) + gamma * level_height * n;
  std::vector<double> plus, minus;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double v = position[i];
    const double l = l_of(v);
    const double term = std::exp(std::log(weight[i]) + v + base - 0.5 * gamma * gamma * l);
    const double s = -gamma * level_height * n + gamma * gamma * l;
    (s >= 0.0 ? plus : minus).push_back(term);
  }
  return {pairwise_sum(plus), pairwise_sum(minus)};
}

double MassProfile::weighted_functional(const std::function<double(double)>& F) const {
  const double sn = std::sqrt(static_cast<double>(depth));
  std::vector<double> t(weight.size());
  for (std::size_t i = 0; i < weight.size(); ++i) t[i] = weight[i] * F(2.0 * u_of(position[i]) / sn);
  return pairwise_sum(t);
}

struct DeepCascadeSimulator::Fft {
  std::size_t length = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> kernel_re, kernel_im;

  ~Fft() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

DeepCascadeSimulator::~DeepCascadeSimulator() = default;

DeepCascadeSimulator::DeepCascadeSimulator(DeepCascadeOptions options) : options_(std::move(options)) {
  auto& o = options_;
  if (o.branching < 2) throw InvalidArgument("branching must be at least 2");
  if (!(o.level_height > 0.0)) throw InvalidArgument("level height must be positive");
  if (o.depth < 1) throw InvalidArgument("depth must be at least 1");
  if (!(o.bin_width > 0.0)) throw InvalidArgument("bin width must be positive");
  if (!(o.count_threshold >= 1.0)) throw InvalidArgument("count threshold must be at least 1");
  std::sort(o.probe_depths.begin(), o.probe_depths.end());
  o.probe_depths.erase(std::unique(o.probe_depths.begin(), o.probe_depths.end()), o.probe_depths.end());
  for (int p : o.probe_depths) {
    if (p < 1 || p > o.depth) throw InvalidArgument("probe depth " + std::to_string(p) + " outside [1, depth]");
  }

  const double a = o.level_height;
  const double nb = std::log(static_cast<double>(o.branching));
  const double delta = o.bin_width;
  grid_origin_ = std::lround(o.lower / delta);

  upper_ = o.upper;
  if (upper_ <= 0.0) {
    // Potential of the gamma-tilted spine: drift 2a/gamma - 2a + log b, variance 4a/gamma^3 per step.
    std::vector<double> gs = o.gammas;
    gs.push_back(2.0);
    std::vector<int> ns = o.probe_depths;
    ns.push_back(o.depth);
    upper_ = 40.0;
    for (double g : gs) {
      if (!(g > 0.0)) continue;
      const double drift = 2.0 * a / g - 2.0 * a + nb;
      const double var = 4.0 * a / (g * g * g);
      for (int n : ns) upper_ = std::max(upper_, n * drift + 8.0 * std::sqrt(n * var) + 30.0);
    }
  }
  if (!(upper_ > o.lower + 10 * delta)) throw InvalidArgument("upper edge must lie above the lower edge");
  bins_ = static_cast<std::size_t>(std::ceil(upper_ / delta)) - static_cast<std::size_t>(grid_origin_) + 1;

  // Step law on grid units: Y = (2 dl - 2a + log b) / delta with dl ~ IG(a/2, a^2).
  const boost::math::inverse_gaussian_distribution<double> ig(a / 2.0, a * a);
  const double y_min = (nb - 2.0 * a) / delta;
  auto cdf_y = [&](double y) {
    const double t = 0.5 * (y * delta + 2.0 * a - nb);
    return t <= 0.0 ? 0.0 : boost::math::cdf(ig, t);
  };
  auto sf_y = [&](double y) {
    const double t = 0.5 * (y * delta + 2.0 * a - nb);
    return t <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(ig, t));
  };
  const int k0 = static_cast<int>(std::floor(y_min)) - 2;
  int k1 = k0 + 4;
  while (sf_y(k1) > 1e-18) ++k1;
  k1 += 2;
  // I[k - k0] = integral of the CDF over [k, k+1]; G(k) = sum of I below k.
  std::vector<double> G(static_cast<std::size_t>(k1 - k0 + 2), 0.0);
  for (int k = k0; k <= k1; ++k) {
    double integral = 0.0;
    constexpr int pieces = 16;
    for (int s = 0; s < pieces; ++s) {
      const double x0 = k + static_cast<double>(s) / pieces;
      integral += boost::math::quadrature::gauss<double, 20>::integrate(cdf_y, x0, x0 + 1.0 / pieces);
    }
    G[static_cast<std::size_t>(k - k0 + 1)] = G[static_cast<std::size_t>(k - k0)] + integral;
  }
  // weight_j = G(j+1) - 2 G(j) + G(j-1) for j in [k0+1, k1].
  kernel_offset_ = k0 + 1;
  kernel_.clear();
  for (int j = k0 + 1; j <= k1; ++j) {
    const auto i = static_cast<std::size_t>(j - k0);
    kernel_.push_back(std::max(0.0, G[i + 1] - 2.0 * G[i] + G[i - 1]));
  }
  const double total = pairwise_sum(kernel_);
  for (auto& w : kernel_) w /= total;

  fft_ = std::make_unique<Fft>();
  std::size_t len = 1;
  while (len < bins_ + kernel_.size()) len <<= 1;
  fft_->length = len;
  double* in = fftw_alloc_real(len);
  fftw_complex* out = fftw_alloc_complex(len / 2 + 1);
  {
    std::lock_guard lock(planner_mutex());
    fft_->forward = fftw_plan_dft_r2c_1d(static_cast<int>(len), in, out, FFTW_ESTIMATE);
    fft_->backward = fftw_plan_dft_c2r_1d(static_cast<int>(len), out, in, FFTW_ESTIMATE);
  }
  std::fill(in, in + len, 0.0);
  std::copy(kernel_.begin(), kernel_.end(), in);
  fftw_execute_dft_r2c(fft_->forward, in, out);
  fft_->kernel_re.resize(len / 2 + 1);
  fft_->kernel_im.resize(len / 2 + 1);
  for (std::size_t k = 0; k <= len / 2; ++k) {
    fft_->kernel_re[k] = out[k][0] / static_cast<double>(len);
    fft_->kernel_im[k] = out[k][1] / static_cast<double>(len);
  }
  fftw_free(in);
  fftw_free(out);
}

DeepCascadeDiagnostics DeepCascadeSimulator::run(std::uint64_t seed,
                                                 const std::function<void(const MassProfile&)>& on_probe) const {
  const auto& o = options_;
  const double a = o.level_height;
  const double nb = std::log(static_cast<double>(o.branching));
  const double delta = o.bin_width;
  const double lower = static_cast<double>(grid_origin_) * delta;
  const double K = o.count_threshold;
  const std::size_t B = bins_;
  const std::size_t L = fft_->length;
  const int jmin = kernel_offset_;

  std::vector<double> node_v(B), node_exp(B);
  for (std::size_t j = 0; j < B; ++j) {
    node_v[j] = static_cast<double>(grid_origin_ + static_cast<long>(j)) * delta;
    node_exp[j] = std::exp(node_v[j]);
  }

  Rng rng(seed);
  DeepCascadeDiagnostics diag;
  std::vector<double> mass(B, 0.0), count(B, 0.0);
  std::vector<double> atoms{0.0}, kids, keep;
  bool has_mass = false;
  double offset = 0.0;  // true potential = stored potential + offset

  struct Buffers {
    double* in;
    fftw_complex* out;
    std::size_t len;
    explicit Buffers(std::size_t n) : in(fftw_alloc_real(n)), out(fftw_alloc_complex(n / 2 + 1)), len(n) {}
    ~Buffers() {
      fftw_free(in);
      fftw_free(out);
    }
  } buf(L);

  std::size_t next_probe = 0;
  for (int t = 1; t <= o.depth; ++t) {
    kids.clear();
    if (has_mass) {
      std::fill(buf.in, buf.in + L, 0.0);
      std::copy(mass.begin(), mass.end(), buf.in);
      fftw_execute_dft_r2c(fft_->forward, buf.in, buf.out);
      for (std::size_t k = 0; k <= L / 2; ++k) {
        const double re = buf.out[k][0], im = buf.out[k][1];
        buf.out[k][0] = re * fft_->kernel_re[k] - im * fft_->kernel_im[k];
        buf.out[k][1] = re * fft_->kernel_im[k] + im * fft_->kernel_re[k];
      }
      fftw_execute_dft_c2r(fft_->backward, buf.out, buf.in);
      // Output index s holds the weight moved to grid index s + jmin.
      double total = 0.0;
      for (std::size_t s = 0; s < B + kernel_.size() - 1; ++s) total += std::max(0.0, buf.in[s]);
      const double floor_level = 1e-13 * total;
      for (std::size_t s = 0; s < B + kernel_.size() - 1; ++s) {
        const double w = buf.in[s];
        if (!(w > floor_level)) continue;
        const long i = static_cast<long>(s) + jmin;
        if (i < 0) {
          // Weight pushed below the grid becomes explicit atoms.
          const double v = lower + static_cast<double>(i) * delta;
          const std::uint64_t c = rng.poisson(w * std::exp(v));
          for (std::uint64_t q = 0; q < c; ++q) kids.push_back(v);
        } else if (static_cast<std::size_t>(i) >= B) {
          diag.dropped_weight += w * std::exp(-offset);
        }
      }
      for (std::size_t i = 0; i < B; ++i) {
        const long s = static_cast<long>(i) - jmin;
        const double w = (s >= 0 && static_cast<std::size_t>(s) < L) ? buf.in[s] : 0.0;
        mass[i] = w > floor_level ? w : 0.0;
      }
    }

    // Explicit atoms branch.
    const double shift = nb - 2.0 * a;
    for (double v : atoms) {
      for (int c = 0; c < o.branching; ++c) {
        double z;
        do {
          z = rng.normal();
        } while (z == 0.0);
        kids.push_back(v + 2.0 * a * a / (z * z) + shift);
      }
    }

    // A population that lives entirely far above the grid is translated down;
    // the dynamics are translation invariant, so only the offset is recorded.
    if (!kids.empty() && std::all_of(mass.begin(), mass.end(), [](double w) { return w == 0.0; })) {
      const double mn = *std::min_element(kids.begin(), kids.end());
      if (mn > 0.5 * upper_) {
        offset += mn;
        for (double& v : kids) v -= mn;
      }
    }

    // Expected leaf count per bin from both representations.
    for (std::size_t j = 0; j < B; ++j) count[j] = mass[j] * node_exp[j];
    keep.clear();
    std::vector<std::pair<std::size_t, double>> located;
    located.reserve(kids.size());
    for (double v : kids) {
      if (v >= upper_) {
        diag.dropped_weight += std::exp(-(v + offset));
        continue;
      }
      const double pos = (v - lower) / delta;
      if (pos < 0.0) {
        keep.push_back(v);
        continue;
      }
      const auto j0 = static_cast<std::size_t>(pos);
      if (j0 + 1 >= B) {
        keep.push_back(v);
        continue;
      }
      const double f = pos - static_cast<double>(j0);
      count[j0] += 1.0 - f;
      count[j0 + 1] += f;
      located.emplace_back(j0, v);
    }
    for (const auto& [j0, v] : located) {
      if (count[j0] >= K && count[j0 + 1] >= K) {
        const double f = (v - lower) / delta - static_cast<double>(j0);
        const double w = std::exp(-v);
        mass[j0] += (1.0 - f) * w;
        mass[j0 + 1] += f * w;
      } else {
        keep.push_back(v);
      }
    }
    has_mass = false;
    for (std::size_t j = 0; j < B; ++j) {
      if (mass[j] <= 0.0) continue;
      if (count[j] < K) {
        const std::uint64_t c = rng.poisson(mass[j] * node_exp[j]);
        for (std::uint64_t q = 0; q < c; ++q) keep.push_back(node_v[j]);
        mass[j] = 0.0;
      } else {
        has_mass = true;
      }
    }
    atoms.swap(keep);
    diag.max_explicit = std::max(diag.max_explicit, atoms.size());

    if (next_probe < o.probe_depths.size() && o.probe_depths[next_probe] == t) {
      ++next_probe;
      MassProfile p;
      p.depth = t;
      p.branching = o.branching;
      p.level_height = a;
      p.position.reserve(atoms.size() + B);
      p.weight.reserve(atoms.size() + B);
      const double scale = std::exp(-offset);
      for (double v : atoms) {
        p.position.push_back(v + offset);
        p.weight.push_back(std::exp(-(v + offset)));
      }
      for (std::size_t j = 0; j < B; ++j) {
        if (mass[j] > 0.0) {
          p.position.push_back(node_v[j] + offset);
          p.weight.push_back(mass[j] * scale);
        }
      }
      on_probe(p);
    }
  }
  return diag;
}

}  // namespace gmclab
