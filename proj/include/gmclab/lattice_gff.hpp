#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gmclab {

enum class Shape { unit_disk, unit_square };
enum class Sampler { dense_factorization, spectral };

std::string to_string(Shape shape);
std::string to_string(Sampler sampler);
Shape parse_shape(std::string_view text);
Sampler parse_sampler(std::string_view text);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Largest resolution for which the factorization sampler is provided.
inline constexpr int kMaxFactorizationResolution = 96;

struct DomainOptions {
  // Materialize the dense Green matrix. Without it, Green products go
  // through the sparse factorization (or the sine basis on the square).
  bool dense_green = true;
  std::size_t memory_cap_bytes = std::size_t{3} << 30;
};

class LatticeDomain;
using DomainPtr = std::shared_ptr<const LatticeDomain>;

// Lattice approximation of the unit disk ([-1,1]^2 grid, h = 2/m) or the
// unit square ([0,1]^2 grid, h = 1/m). Green's function is
// G = 2*pi * L^{-1} with L the 5-point Laplacian restricted to interior
// sites, so that G(x,y) ~ log(1/|x-y|) at the continuum scale.
// Immutable after construction.
class LatticeDomain {
 public:
  static DomainPtr build(Shape shape, int m, const DomainOptions& options = {});

  Shape shape() const { return shape_; }
  int resolution() const { return m_; }
  double spacing() const { return h_; }
  double cell_area() const { return h_ * h_; }
  // Continuum area of the domain.
  double area() const;
  std::size_t size() const { return ix_.size(); }

  Point site(std::size_t i) const;
  int grid_x(std::size_t i) const { return ix_[i]; }
  int grid_y(std::size_t i) const { return iy_[i]; }
  Point grid_point(int ix, int iy) const;
  std::optional<std::size_t> index_at(int ix, int iy) const;
  // Interior site closest to p, if p lies inside the domain.
  std::optional<std::size_t> nearest_site(Point p) const;
  bool contains(Point p) const;
  double boundary_distance(Point p) const;
  double boundary_distance(std::size_t i) const { return boundary_distance(site(i)); }

  bool has_dense_green() const { return green_.size() > 0; }
  const Eigen::MatrixXd& green() const;
  double green_entry(std::size_t i, std::size_t j) const;
  // G w for a vector over interior sites.
  Eigen::VectorXd green_apply(const Eigen::VectorXd& w) const;
  double quadratic_form(const Eigen::VectorXd& w) const;
  // Column G(i, .).
  Eigen::VectorXd green_column(std::size_t i) const;
  double green_diagonal(std::size_t i) const;

  const std::vector<double>& cr_field() const { return cr_; }
  // k0 = G_diag - log(1/h) - log CR, measured on a disk lattice of spacing h.
  double lattice_constant() const { return k0_; }

  bool supports(Sampler sampler) const;
  const Eigen::SparseMatrix<double>& laplacian() const { return laplacian_; }

  // Sampler internals.
  Eigen::VectorXd factor_sample(const Eigen::VectorXd& xi) const;
  Eigen::VectorXd spectral_sample(const Eigen::VectorXd& xi) const;

  LatticeDomain(const LatticeDomain&) = delete;
  LatticeDomain& operator=(const LatticeDomain&) = delete;
  ~LatticeDomain();

 private:
  LatticeDomain() = default;
  struct Factor;

  Shape shape_ = Shape::unit_disk;
  int m_ = 0;
  double h_ = 0.0;
  std::vector<int> ix_, iy_;
  std::vector<std::int64_t> grid_index_;  // (m+1)^2 entries, -1 off-domain
  Eigen::SparseMatrix<double> laplacian_;
  std::unique_ptr<Factor> factor_;
  Eigen::MatrixXd green_;
  std::vector<double> green_diag_;
  std::vector<double> cr_;
  double k0_ = 0.0;
  // Sine basis of the square: S(k,i) = sqrt(2/m) sin(pi k i / m), and the
  // eigenvalues 4 - 2cos(pi k/m) - 2cos(pi l/m).
  Eigen::MatrixXd sine_;
  Eigen::MatrixXd eigen_;
};

// G_D(z,z) - log(1/h) - log CR(z) on the disk lattice of resolution m,
// measured at the site nearest the origin. Cached per resolution.
double disk_lattice_constant(int m);

struct FieldSample {
  DomainPtr domain;
  std::vector<double> values;
  std::uint64_t seed = 0;
  Sampler sampler = Sampler::dense_factorization;
};

FieldSample sample_field(const DomainPtr& domain, std::uint64_t seed, Sampler sampler);
FieldSample zero_field(const DomainPtr& domain);

struct StencilEntry {
  std::size_t site;
  double weight;
};

// Uniform weights on lattice points with |w - z| in [eps - h, eps + h].
// Points off the interior carry the boundary value 0 and enter only the
// normalization.
std::vector<StencilEntry> annulus_stencil(const LatticeDomain& domain, Point z, double eps);

// Circle average of the field around z. Requires eps >= 2h and
// eps <= dist(z, boundary).
double circle_average(const FieldSample& field, Point z, double eps);

enum class StencilKind { annulus, shrunk, point };

// Circle averages at every interior site for a nominal radius eps:
// sites with dist > eps use eps, sites with dist <= eps use dist/2 when that
// is at least 2h, and the remaining sites use the point value with the
// effective radius h*exp(-k0).
class CircleAverager {
 public:
  CircleAverager(DomainPtr domain, double eps);

  const DomainPtr& domain() const { return domain_; }
  double epsilon() const { return eps_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<StencilKind>& kinds() const { return kinds_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const { return weights_; }

  std::vector<double> apply(const FieldSample& field) const;
  std::vector<double> apply(const std::vector<double>& values) const;
  // Var of each averaged value under the GFF, w^T G w.
  std::vector<double> variances() const;
  Eigen::VectorXd weights(std::size_t site) const;

 private:
  DomainPtr domain_;
  double eps_;
  std::vector<double> radii_;
  std::vector<StencilKind> kinds_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> weights_;
};

double conformal_radius(const LatticeDomain& domain, std::size_t site);
double conformal_radius(const LatticeDomain& domain, Point z);

struct Snapshot {
  Shape shape = Shape::unit_disk;
  int resolution = 0;
  std::uint64_t seed = 0;
  std::vector<double> grid;  // (m+1)^2 values, row-major, zero off-domain
};

// Binary grid format: "GMCLAB1\0", u32 shape, u32 m, u64 seed, then
// (m+1)^2 little-endian float64 values in row-major order.
void write_snapshot(const std::filesystem::path& path, const FieldSample& field);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace gmclab
