#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "gmclab/error.hpp"
#include "gmclab/lattice_gff.hpp"

namespace gmclab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Enumeration {
  std::vector<int> ix, iy;
  std::vector<std::int64_t> grid_index;
};

double origin_x(Shape shape) { return shape == Shape::unit_disk ? -1.0 : 0.0; }

double spacing_for(Shape shape, int m) { return shape == Shape::unit_disk ? 2.0 / m : 1.0 / m; }

Enumeration enumerate_sites(Shape shape, int m) {
  Enumeration e;
  const double h = spacing_for(shape, m);
  const double x0 = origin_x(shape);
  e.grid_index.assign(static_cast<std::size_t>(m + 1) * (m + 1), -1);
  for (int iy = 0; iy <= m; ++iy) {
    for (int ix = 0; ix <= m; ++ix) {
      bool inside;
      if (shape == Shape::unit_disk) {
        const double x = x0 + ix * h, y = x0 + iy * h;
        inside = std::hypot(x, y) < 1.0 - 0.5 * h;
      } else {
        inside = ix >= 1 && ix <= m - 1 && iy >= 1 && iy <= m - 1;
      }
      if (!inside) continue;
      e.grid_index[static_cast<std::size_t>(iy) * (m + 1) + ix] = static_cast<std::int64_t>(e.ix.size());
      e.ix.push_back(ix);
      e.iy.push_back(iy);
    }
  }
  return e;
}

Eigen::SparseMatrix<double> assemble_laplacian(const Enumeration& e, int m) {
  const std::size_t n = e.ix.size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * n);
  auto at = [&](int x, int y) -> std::int64_t {
    if (x < 0 || y < 0 || x > m || y > m) return -1;
    return e.grid_index[static_cast<std::size_t>(y) * (m + 1) + x];
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<int>(i);
    t.emplace_back(r, r, 4.0);
    const int x = e.ix[i], y = e.iy[i];
    for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const std::int64_t j = at(x + dx, y + dy);
      if (j >= 0) t.emplace_back(r, static_cast<int>(j), -1.0);
    }
  }
  Eigen::SparseMatrix<double> L(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

using Llt = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>;

// Site nearest the origin of the disk lattice and its constant.
double disk_constant_from(const Enumeration& e, int m, const Llt& llt) {
  const double h = 2.0 / m;
  std::size_t best = 0;
  double best_r = 1e300;
  for (std::size_t i = 0; i < e.ix.size(); ++i) {
    const double r = std::hypot(-1.0 + e.ix[i] * h, -1.0 + e.iy[i] * h);
    if (r < best_r) {
      best_r = r;
      best = i;
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.ix.size()));
  rhs[static_cast<Eigen::Index>(best)] = 1.0;
  const Eigen::VectorXd col = llt.solve(rhs);
  const double g = kTwoPi * col[static_cast<Eigen::Index>(best)];
  return g - std::log(1.0 / h) - std::log(1.0 - best_r * best_r);
}

std::mutex& constant_mutex() {
  static std::mutex mu;
  return mu;
}

std::map<int, double>& constant_cache() {
  static std::map<int, double> cache;
  return cache;
}

}  // namespace

struct LatticeDomain::Factor {
  Llt llt;
};

LatticeDomain::~LatticeDomain() = default;

std::string to_string(Shape shape) { return shape == Shape::unit_disk ? "unit_disk" : "unit_square"; }

std::string to_string(Sampler sampler) {
  return sampler == Sampler::dense_factorization ? "dense_factorization" : "spectral";
}

Shape parse_shape(std::string_view text) {
  if (text == "unit_disk") return Shape::unit_disk;
  if (text == "unit_square") return Shape::unit_square;
  throw InvalidArgument("unknown shape '" + std::string(text) + "'");
}

Sampler parse_sampler(std::string_view text) {
  if (text == "dense_factorization") return Sampler::dense_factorization;
  if (text == "spectral") return Sampler::spectral;
  throw InvalidArgument("unknown sampler '" + std::string(text) + "'");
}

double disk_lattice_constant(int m) {
  {
    std::lock_guard lock(constant_mutex());
    auto it = constant_cache().find(m);
    if (it != constant_cache().end()) return it->second;
  }
  const Enumeration e = enumerate_sites(Shape::unit_disk, m);
  Llt llt(assemble_laplacian(e, m));
  if (llt.info() != Eigen::Success) throw Error("disk Laplacian factorization failed");
  const double k0 = disk_constant_from(e, m, llt);
  std::lock_guard lock(constant_mutex());
  constant_cache()[m] = k0;
  return k0;
}

DomainPtr LatticeDomain::build(Shape shape, int m, const DomainOptions& options) {
  if (m < 8) throw InvalidArgument("resolution must be at least 8 (got " + std::to_string(m) + ")");
  std::shared_ptr<LatticeDomain> d(new LatticeDomain());
  d->shape_ = shape;
  d->m_ = m;
  d->h_ = spacing_for(shape, m);
  Enumeration e = enumerate_sites(shape, m);
  d->ix_ = std::move(e.ix);
  d->iy_ = std::move(e.iy);
  d->grid_index_ = std::move(e.grid_index);
  const std::size_t n = d->ix_.size();

  const bool factorize = m <= kMaxFactorizationResolution;
  if (options.dense_green) {
    if (!factorize && shape == Shape::unit_disk) {
      throw CapacityError("dense Green matrix on the disk requires m <= " +
                          std::to_string(kMaxFactorizationResolution));
    }
    const double bytes = 16.0 * static_cast<double>(n) * static_cast<double>(n);
    if (bytes > static_cast<double>(options.memory_cap_bytes)) {
      throw CapacityError("dense Green matrix needs about " + std::to_string(bytes / (1 << 20)) +
                          " MiB, above the configured cap of " +
                          std::to_string(options.memory_cap_bytes >> 20) + " MiB");
    }
  }

  Enumeration view{d->ix_, d->iy_, d->grid_index_};
  d->laplacian_ = assemble_laplacian(view, m);
  if (factorize) {
    d->factor_ = std::make_unique<Factor>();
    d->factor_->llt.compute(d->laplacian_);
    if (d->factor_->llt.info() != Eigen::Success) throw Error("Laplacian factorization failed");
  }

  if (shape == Shape::unit_square) {
    const int k = m - 1;
    d->sine_.resize(k, k);
    d->eigen_.resize(k, k);
    const double s = std::sqrt(2.0 / m);
    for (int a = 1; a <= k; ++a) {
      for (int b = 1; b <= k; ++b) {
        d->sine_(a - 1, b - 1) = s * std::sin(std::numbers::pi * a * b / m);
        d->eigen_(a - 1, b - 1) = 4.0 - 2.0 * std::cos(std::numbers::pi * a / m) -
                                  2.0 * std::cos(std::numbers::pi * b / m);
      }
    }
  }

  if (options.dense_green) {
    if (factorize) {
      d->green_ = d->factor_->llt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                                  static_cast<Eigen::Index>(n)));
      d->green_ *= kTwoPi;
    } else {
      d->green_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      Eigen::VectorXd e_i = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        e_i.setZero();
        e_i[static_cast<Eigen::Index>(i)] = 1.0;
        d->green_.col(static_cast<Eigen::Index>(i)) = d->green_apply(e_i);
      }
    }
    for (Eigen::Index j = 0; j < d->green_.cols(); ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double v = 0.5 * (d->green_(i, j) + d->green_(j, i));
        d->green_(i, j) = v;
        d->green_(j, i) = v;
      }
    }
    d->green_diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      d->green_diag_[i] = d->green_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    }
  } else if (shape == Shape::unit_square) {
    const Eigen::MatrixXd q = d->sine_.cwiseProduct(d->sine_);
    const Eigen::MatrixXd diag = kTwoPi * (q.transpose() * d->eigen_.cwiseInverse() * q);
    d->green_diag_.assign(diag.data(), diag.data() + diag.size());
  }

  if (shape == Shape::unit_disk) {
    if (factorize) {
      d->k0_ = disk_constant_from(view, m, d->factor_->llt);
      std::lock_guard lock(constant_mutex());
      constant_cache().emplace(m, d->k0_);
    } else {
      d->k0_ = disk_lattice_constant(m);
    }
    d->cr_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point p = d->site(i);
      d->cr_[i] = 1.0 - (p.x * p.x + p.y * p.y);
    }
  } else {
    d->k0_ = disk_lattice_constant(2 * m);
    d->cr_.resize(n);
    for (std::size_t i = 0; i < n; ++i) d->cr_[i] = d->h_ * std::exp(d->green_diag_[i] - d->k0_);
  }

  const double bound = 10.0 * d->area();
  for (double cr : d->cr_) {
    if (!(cr > 0.0) || cr * cr > bound) throw Error("conformal radius field violates CR^2 <= 10 Area");
  }
  return d;
}

double LatticeDomain::area() const { return shape_ == Shape::unit_disk ? std::numbers::pi : 1.0; }

Point LatticeDomain::grid_point(int ix, int iy) const {
  const double x0 = origin_x(shape_);
  return {x0 + ix * h_, x0 + iy * h_};
}

Point LatticeDomain::site(std::size_t i) const { return grid_point(ix_.at(i), iy_.at(i)); }

std::optional<std::size_t> LatticeDomain::index_at(int ix, int iy) const {
  if (ix < 0 || iy < 0 || ix > m_ || iy > m_) return std::nullopt;
  const std::int64_t k = grid_index_[static_cast<std::size_t>(iy) * (m_ + 1) + ix];
  if (k < 0) return std::nullopt;
  return static_cast<std::size_t>(k);
}

bool LatticeDomain::contains(Point p) const {
  if (shape_ == Shape::unit_disk) return p.x * p.x + p.y * p.y < 1.0;
  return p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0;
}

std::optional<std::size_t> LatticeDomain::nearest_site(Point p) const {
  if (!contains(p)) return std::nullopt;
  const double x0 = origin_x(shape_);
  const int ix = static_cast<int>(std::lround((p.x - x0) / h_));
  const int iy = static_cast<int>(std::lround((p.y - x0) / h_));
  return index_at(ix, iy);
}

double LatticeDomain::boundary_distance(Point p) const {
  if (shape_ == Shape::unit_disk) return 1.0 - std::hypot(p.x, p.y);
  return std::min({p.x, 1.0 - p.x, p.y, 1.0 - p.y});
}

const Eigen::MatrixXd& LatticeDomain::green() const {
  if (!has_dense_green()) throw InvalidArgument("domain was built without a dense Green matrix");
  return green_;
}

double LatticeDomain::green_entry(std::size_t i, std::size_t j) const {
  return green()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

Eigen::VectorXd LatticeDomain::green_apply(const Eigen::VectorXd& w) const {
  if (static_cast<std::size_t>(w.size()) != size()) throw InvalidArgument("weight vector has wrong length");
  if (has_dense_green()) return green_ * w;
  if (factor_) return kTwoPi * factor_->llt.solve(w);
  if (shape_ == Shape::unit_square) {
    const int k = m_ - 1;
    Eigen::Map<const Eigen::MatrixXd> W(w.data(), k, k);
    const Eigen::MatrixXd coef = (sine_ * W * sine_).cwiseQuotient(eigen_);
    const Eigen::MatrixXd g = kTwoPi * (sine_ * coef * sine_);
    return Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
  }
  throw InvalidArgument("no Green operator available on this domain (disk above m = " +
                        std::to_string(kMaxFactorizationResolution) + ")");
}

double LatticeDomain::quadratic_form(const Eigen::VectorXd& w) const { return w.dot(green_apply(w)); }

Eigen::VectorXd LatticeDomain::green_column(std::size_t i) const {
  if (i >= size()) throw InvalidArgument("site index out of range");
  if (has_dense_green()) return green_.col(static_cast<Eigen::Index>(i));
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  e[static_cast<Eigen::Index>(i)] = 1.0;
  return green_apply(e);
}

double LatticeDomain::green_diagonal(std::size_t i) const {
  if (i >= size()) throw InvalidArgument("site index out of range");
  if (!green_diag_.empty()) return green_diag_[i];
  return green_column(i)[static_cast<Eigen::Index>(i)];
}

bool LatticeDomain::supports(Sampler sampler) const {
  if (sampler == Sampler::spectral) return shape_ == Shape::unit_square;
  return factor_ != nullptr;
}

Eigen::VectorXd LatticeDomain::factor_sample(const Eigen::VectorXd& xi) const {
  if (!factor_) throw InvalidArgument("factorization sampler unavailable above m = " +
                                      std::to_string(kMaxFactorizationResolution));
  // L = P^T U^T U P, so P^T U^{-1} xi has covariance L^{-1}.
  const Eigen::VectorXd y = factor_->llt.matrixU().solve(xi);
  return std::sqrt(kTwoPi) * (factor_->llt.permutationPinv() * y);
}

Eigen::VectorXd LatticeDomain::spectral_sample(const Eigen::VectorXd& xi) const {
  if (shape_ != Shape::unit_square) throw InvalidArgument("spectral sampler requires the unit square");
  const int k = m_ - 1;
  Eigen::Map<const Eigen::MatrixXd> X(xi.data(), k, k);
  const Eigen::MatrixXd coef = X.cwiseQuotient(eigen_.cwiseSqrt());
  const Eigen::MatrixXd f = std::sqrt(kTwoPi) * (sine_ * coef * sine_);
  return Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
}

double conformal_radius(const LatticeDomain& domain, std::size_t site) {
  if (site >= domain.size()) throw InvalidArgument("conformal radius requested off the interior");
  return domain.cr_field()[site];
}

double conformal_radius(const LatticeDomain& domain, Point z) {
  const auto i = domain.nearest_site(z);
  if (!i) throw InvalidArgument("conformal radius requested outside the domain");
  const Point s = domain.site(*i);
  if (std::hypot(s.x - z.x, s.y - z.y) > 1e-9 * domain.spacing()) {
    throw InvalidArgument("point is not an interior lattice site");
  }
  return conformal_radius(domain, *i);
}

}  // namespace gmclab
