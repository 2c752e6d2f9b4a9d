#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gmclab/error.hpp"
#include "gmclab/lattice_gff.hpp"
#include "gmclab/random.hpp"

namespace gmclab {

namespace {

constexpr double kRelTol = 1e-12;

double origin_of(const LatticeDomain& d) { return d.shape() == Shape::unit_disk ? -1.0 : 0.0; }

}  // namespace

FieldSample sample_field(const DomainPtr& domain, std::uint64_t seed, Sampler sampler) {
  if (!domain) throw InvalidArgument("sample_field needs a domain");
  if (sampler == Sampler::spectral && domain->shape() != Shape::unit_square) {
    throw InvalidArgument("spectral sampler requested on a non-square domain");
  }
  if (!domain->supports(sampler)) {
    throw InvalidArgument("sampler " + to_string(sampler) + " is not available at m = " +
                          std::to_string(domain->resolution()));
  }
  Rng rng(seed);
  Eigen::VectorXd xi(static_cast<Eigen::Index>(domain->size()));
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
  const Eigen::VectorXd v =
      sampler == Sampler::spectral ? domain->spectral_sample(xi) : domain->factor_sample(xi);
  FieldSample f;
  f.domain = domain;
  f.values.assign(v.data(), v.data() + v.size());
  f.seed = seed;
  f.sampler = sampler;
  return f;
}

FieldSample zero_field(const DomainPtr& domain) {
  FieldSample f;
  f.domain = domain;
  f.values.assign(domain->size(), 0.0);
  return f;
}

std::vector<StencilEntry> annulus_stencil(const LatticeDomain& domain, Point z, double eps) {
  const double h = domain.spacing();
  const double x0 = origin_of(domain);
  const double lo = eps - h, hi = eps + h;
  const int ix0 = static_cast<int>(std::floor((z.x - hi - x0) / h)) - 1;
  const int ix1 = static_cast<int>(std::ceil((z.x + hi - x0) / h)) + 1;
  const int iy0 = static_cast<int>(std::floor((z.y - hi - x0) / h)) - 1;
  const int iy1 = static_cast<int>(std::ceil((z.y + hi - x0) / h)) + 1;
  std::vector<StencilEntry> out;
  std::size_t count = 0;
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double r = std::hypot(x0 + ix * h - z.x, x0 + iy * h - z.y);
      if (r < lo * (1.0 - kRelTol) || r > hi * (1.0 + kRelTol)) continue;
      ++count;
      if (auto s = domain.index_at(ix, iy)) out.push_back({*s, 0.0});
    }
  }
  for (auto& e : out) e.weight = 1.0 / static_cast<double>(count);
  return out;
}

double circle_average(const FieldSample& field, Point z, double eps) {
  const LatticeDomain& d = *field.domain;
  if (eps < 2.0 * d.spacing() * (1.0 - kRelTol)) {
    throw InvalidArgument("circle radius below two lattice spacings");
  }
  if (!d.contains(z) || eps > d.boundary_distance(z) * (1.0 + kRelTol)) {
    throw InvalidArgument("circle exits the domain");
  }
  double s = 0.0;
  for (const auto& e : annulus_stencil(d, z, eps)) s += e.weight * field.values[e.site];
  return s;
}

CircleAverager::CircleAverager(DomainPtr domain, double eps) : domain_(std::move(domain)), eps_(eps) {
  const LatticeDomain& d = *domain_;
  const double h = d.spacing();
  if (!(eps >= 2.0 * h * (1.0 - kRelTol))) throw InvalidArgument("circle radius below two lattice spacings");
  const std::size_t n = d.size();
  radii_.resize(n);
  kinds_.resize(n);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < n; ++i) {
    const Point z = d.site(i);
    const double dist = d.boundary_distance(z);
    double r;
    if (dist > eps) {
      r = eps;
      kinds_[i] = StencilKind::annulus;
    } else if (0.5 * dist >= 2.0 * h * (1.0 - kRelTol)) {
      r = 0.5 * dist;
      kinds_[i] = StencilKind::shrunk;
    } else {
      radii_[i] = h * std::exp(-d.lattice_constant());
      kinds_[i] = StencilKind::point;
      t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
      continue;
    }
    radii_[i] = r;
    for (const auto& e : annulus_stencil(d, z, r)) {
      t.emplace_back(static_cast<int>(i), static_cast<int>(e.site), e.weight);
    }
  }
  weights_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  weights_.setFromTriplets(t.begin(), t.end());
  weights_.makeCompressed();
}

std::vector<double> CircleAverager::apply(const std::vector<double>& values) const {
  if (values.size() != domain_->size()) throw InvalidArgument("field has wrong length");
  Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  const Eigen::VectorXd r = weights_ * v;
  return {r.data(), r.data() + r.size()};
}

std::vector<double> CircleAverager::apply(const FieldSample& field) const {
  if (field.domain != domain_) throw InvalidArgument("field belongs to a different domain");
  return apply(field.values);
}

Eigen::VectorXd CircleAverager::weights(std::size_t site) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain_->size()));
  for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(weights_, static_cast<Eigen::Index>(site));
       it; ++it) {
    w[it.col()] = it.value();
  }
  return w;
}

std::vector<double> CircleAverager::variances() const {
  const std::size_t n = domain_->size();
  std::vector<double> out(n);
  if (domain_->has_dense_green()) {
    const Eigen::MatrixXd& g = domain_->green();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator a(weights_, static_cast<Eigen::Index>(i)); a; ++a) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator b(weights_, static_cast<Eigen::Index>(i)); b; ++b) {
          s += a.value() * b.value() * g(a.col(), b.col());
        }
      }
      out[i] = s;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = domain_->quadratic_form(weights(i));
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'G', 'M', 'C', 'L', 'A', 'B', '1', '\0'};

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error("truncated snapshot file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const FieldSample& field) {
  const LatticeDomain& d = *field.domain;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, d.shape() == Shape::unit_disk ? 0u : 1u);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d.resolution()));
  put_le<std::uint64_t>(os, field.seed);
  const int m = d.resolution();
  for (int iy = 0; iy <= m; ++iy) {
    for (int ix = 0; ix <= m; ++ix) {
      const auto s = d.index_at(ix, iy);
      put_le<double>(os, s ? field.values[*s] : 0.0);
    }
  }
  if (!os) throw Error("failed writing " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(path.string() + " is not a GMCLAB1 snapshot");
  }
  Snapshot s;
  const auto shape = get_le<std::uint32_t>(is);
  if (shape > 1) throw Error("snapshot has unknown shape code");
  s.shape = shape == 0 ? Shape::unit_disk : Shape::unit_square;
  s.resolution = static_cast<int>(get_le<std::uint32_t>(is));
  s.seed = get_le<std::uint64_t>(is);
  const std::size_t count = static_cast<std::size_t>(s.resolution + 1) * (s.resolution + 1);
  s.grid.resize(count);
  for (auto& v : s.grid) v = get_le<double>(is);
  return s;
}

}  // namespace gmclab
