#include "gmclab/chaos_measures.hpp"

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <ostream>

#include "gmclab/csv.hpp"
#include "gmclab/error.hpp"
#include "gmclab/stats.hpp"

namespace gmclab {

namespace {

void require_subcritical(double gamma) {
  if (!(gamma >= 0.0 && gamma < 2.0)) {
    throw InvalidArgument("gamma must lie in [0, 2), got " + format_double(gamma));
  }
}

void require_small_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1), got " + format_double(eps));
}

template <class M>
RegionMass region_sum(const M& m, const Region& region) {
  std::vector<double> picked;
  for (std::size_t i = 0; i < m.cell_mass.size(); ++i) {
    if (region(m.domain->site(i))) picked.push_back(m.cell_mass[i]);
  }
  RegionMass r;
  r.empty_region = picked.empty();
  r.value = pairwise_sum(picked);
  return r;
}

}  // namespace

std::string to_string(Normalization n) {
  return n == Normalization::derivative ? "derivative" : "seneta_heyde";
}

AveragedField average_field(const FieldSample& field, const CircleAverager& averager) {
  AveragedField a;
  a.domain = field.domain;
  a.eps = averager.epsilon();
  a.seed = field.seed;
  a.radius = averager.radii();
  a.value = averager.apply(field);
  return a;
}

ChaosMeasure subcritical_measure(const AveragedField& avg, double gamma) {
  require_subcritical(gamma);
  ChaosMeasure m;
  m.domain = avg.domain;
  m.gamma = gamma;
  m.eps = avg.eps;
  m.seed = avg.seed;
  m.radius = avg.radius;
  const double h2 = avg.domain->cell_area();
  const double q = 0.5 * gamma * gamma;
  m.cell_mass.resize(avg.value.size());
  for (std::size_t i = 0; i < avg.value.size(); ++i) {
    m.cell_mass[i] = std::exp(gamma * avg.value[i] + q * std::log(avg.radius[i])) * h2;
  }
  return m;
}

ChaosMeasure subcritical_measure(const FieldSample& field, double gamma, double eps) {
  require_subcritical(gamma);
  return subcritical_measure(average_field(field, CircleAverager(field.domain, eps)), gamma);
}

SignedChaosMeasure seneta_heyde_measure(const AveragedField& avg) {
  require_small_eps(avg.eps);
  SignedChaosMeasure m;
  m.domain = avg.domain;
  m.eps = avg.eps;
  m.seed = avg.seed;
  m.normalization = Normalization::seneta_heyde;
  m.radius = avg.radius;
  const double h2 = avg.domain->cell_area();
  m.cell_mass.resize(avg.value.size());
  for (std::size_t i = 0; i < avg.value.size(); ++i) {
    const double r = avg.radius[i];
    m.cell_mass[i] = std::sqrt(std::log(1.0 / r)) * std::exp(2.0 * avg.value[i] + 2.0 * std::log(r)) * h2;
  }
  return m;
}

SignedChaosMeasure seneta_heyde_measure(const FieldSample& field, double eps) {
  require_small_eps(eps);
  return seneta_heyde_measure(average_field(field, CircleAverager(field.domain, eps)));
}

SignedChaosMeasure derivative_measure(const AveragedField& avg) {
  require_small_eps(avg.eps);
  SignedChaosMeasure m;
  m.domain = avg.domain;
  m.eps = avg.eps;
  m.seed = avg.seed;
  m.normalization = Normalization::derivative;
  m.radius = avg.radius;
  const double h2 = avg.domain->cell_area();
  m.cell_mass.resize(avg.value.size());
  for (std::size_t i = 0; i < avg.value.size(); ++i) {
    const double r = avg.radius[i];
    const double g = avg.value[i];
    m.cell_mass[i] = (-g + 2.0 * std::log(1.0 / r)) * std::exp(2.0 * g + 2.0 * std::log(r)) * h2;
  }
  return m;
}

SignedChaosMeasure derivative_measure(const FieldSample& field, double eps) {
  require_small_eps(eps);
  return derivative_measure(average_field(field, CircleAverager(field.domain, eps)));
}

namespace regions {

Region whole() {
  return [](Point) { return true; };
}
Region half_plane_right() {
  return [](Point p) { return p.x > 0.0; };
}
Region half_plane_left() {
  return [](Point p) { return p.x <= 0.0; };
}
Region sector(double theta0, double theta1) {
  return [=](Point p) {
    double t = std::atan2(p.y, p.x);
    if (t < theta0) t += 2.0 * std::numbers::pi;
    return t >= theta0 && t < theta1;
  };
}
Region quarter_disk() {
  return [](Point p) { return p.x > 0.0 && p.y > 0.0; };
}
Region sub_square(double x0, double y0, double x1, double y1) {
  return [=](Point p) { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; };
}
Region centred_right_half(Shape shape) {
  const double c = shape == Shape::unit_disk ? 0.0 : 0.5;
  return [c](Point p) { return p.x > c; };
}
Region centred_left_half(Shape shape) {
  const double c = shape == Shape::unit_disk ? 0.0 : 0.5;
  return [c](Point p) { return p.x <= c; };
}

}  // namespace regions

RegionMass mass(const ChaosMeasure& measure, const Region& region) { return region_sum(measure, region); }
RegionMass mass(const SignedChaosMeasure& measure, const Region& region) { return region_sum(measure, region); }
double total_mass(const ChaosMeasure& measure) { return pairwise_sum(measure.cell_mass); }
double total_mass(const SignedChaosMeasure& measure) { return pairwise_sum(measure.cell_mass); }

double expected_mass_oracle(const LatticeDomain& domain, double gamma, const Region& region) {
  std::vector<double> v;
  const double q = 0.5 * gamma * gamma;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (region(domain.site(i))) v.push_back(std::pow(domain.cr_field()[i], q) * domain.cell_area());
  }
  return pairwise_sum(v);
}

double expected_derivative_oracle(const LatticeDomain& domain, const Region& region) {
  std::vector<double> v;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (!region(domain.site(i))) continue;
    const double cr = domain.cr_field()[i];
    v.push_back(2.0 * std::log(1.0 / cr) * cr * cr * domain.cell_area());
  }
  return pairwise_sum(v);
}

Theorem1Statistic theorem1_statistic(const AveragedField& avg, double gamma, const Region& region) {
  if (!(gamma > 1.0 && gamma < 2.0)) {
    throw InvalidArgument("ratio statistic needs 1 < gamma < 2, got " + format_double(gamma));
  }
  Theorem1Statistic s;
  s.x = mass(subcritical_measure(avg, gamma), region).value / (2.0 - gamma);
  s.y = 2.0 * mass(derivative_measure(avg), region).value;
  return s;
}

Theorem1Statistic theorem1_statistic(const FieldSample& field, double gamma, double eps, const Region& region) {
  if (!(gamma > 1.0 && gamma < 2.0)) {
    throw InvalidArgument("ratio statistic needs 1 < gamma < 2, got " + format_double(gamma));
  }
  return theorem1_statistic(average_field(field, CircleAverager(field.domain, eps)), gamma, region);
}

namespace {

template <class M>
void write_rows(std::ostream& os, const M& m) {
  CsvWriter w(os);
  w.row({"site_x", "site_y", "radius", "mass"});
  for (std::size_t i = 0; i < m.cell_mass.size(); ++i) {
    const Point p = m.domain->site(i);
    w.field(p.x).field(p.y).field(m.radius[i]).field(m.cell_mass[i]);
    w.end_row();
  }
}

}  // namespace

void write_measure_csv(std::ostream& os, const ChaosMeasure& m) {
  os << "# gamma=" << format_double(m.gamma) << " eps=" << format_double(m.eps) << " seed=" << m.seed
     << " normalization=subcritical\n";
  write_rows(os, m);
}

void write_measure_csv(std::ostream& os, const SignedChaosMeasure& m) {
  os << "# gamma=2 eps=" << format_double(m.eps) << " seed=" << m.seed
     << " normalization=" << to_string(m.normalization) << "\n";
  write_rows(os, m);
}

std::string measure_summary_json(const ChaosMeasure& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["params"] = {{"gamma", m.gamma},
                 {"eps", m.eps},
                 {"seed", m.seed},
                 {"shape", to_string(m.domain->shape())},
                 {"resolution", m.domain->resolution()}};
  j["totals"] = {{"mass", total_mass(m)},
                 {"expected", expected_mass_oracle(*m.domain, m.gamma, regions::whole())}};
  nlohmann::ordered_json errors = nlohmann::ordered_json::array();
  for (double v : m.cell_mass) {
    if (!std::isfinite(v) || v < 0.0) {
      errors.push_back("non-finite or negative cell mass");
      break;
    }
  }
  j["errors"] = errors;
  return j.dump(2);
}

}  // namespace gmclab
