#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gmclab/lattice_gff.hpp"

namespace gmclab {

enum class Normalization { derivative, seneta_heyde };

std::string to_string(Normalization n);

// Cell masses of an approximate chaos measure. radius[i] is the circle
// radius actually used at site i (eps in the bulk, smaller near the boundary).
struct ChaosMeasure {
  DomainPtr domain;
  double gamma = 0.0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> radius;
  std::vector<double> cell_mass;
};

struct SignedChaosMeasure {
  DomainPtr domain;
  double eps = 0.0;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::derivative;
  std::vector<double> radius;
  std::vector<double> cell_mass;
};

// Circle averages of one field, evaluated with the boundary rule of
// CircleAverager. Building blocks shared by all measures of that field.
struct AveragedField {
  DomainPtr domain;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> radius;
  std::vector<double> value;
};

AveragedField average_field(const FieldSample& field, const CircleAverager& averager);

// exp(gamma G_eps) eps^{gamma^2/2} h^2, 0 <= gamma < 2.
ChaosMeasure subcritical_measure(const AveragedField& avg, double gamma);
ChaosMeasure subcritical_measure(const FieldSample& field, double gamma, double eps);
// sqrt(log(1/eps)) exp(2 G_eps) eps^2 h^2, eps < 1.
SignedChaosMeasure seneta_heyde_measure(const AveragedField& avg);
SignedChaosMeasure seneta_heyde_measure(const FieldSample& field, double eps);
// (-G_eps + 2 log(1/eps)) exp(2 G_eps) eps^2 h^2, eps < 1.
SignedChaosMeasure derivative_measure(const AveragedField& avg);
SignedChaosMeasure derivative_measure(const FieldSample& field, double eps);

using Region = std::function<bool(Point)>;

namespace regions {
Region whole();
Region half_plane_right();  // x > centre
Region half_plane_left();   // x <= centre
// Disk sector of angles [theta0, theta1) about the origin.
Region sector(double theta0, double theta1);
Region quarter_disk();  // x > 0, y > 0
Region sub_square(double x0, double y0, double x1, double y1);
Region centred_right_half(Shape shape);
Region centred_left_half(Shape shape);
}  // namespace regions

struct RegionMass {
  double value = 0.0;
  bool empty_region = false;
};

RegionMass mass(const ChaosMeasure& measure, const Region& region);
RegionMass mass(const SignedChaosMeasure& measure, const Region& region);
double total_mass(const ChaosMeasure& measure);
double total_mass(const SignedChaosMeasure& measure);

// Sum over sites in the region of CR^{gamma^2/2} h^2.
double expected_mass_oracle(const LatticeDomain& domain, double gamma, const Region& region);
// Sum over sites in the region of 2 log(1/CR) CR^2 h^2.
double expected_derivative_oracle(const LatticeDomain& domain, const Region& region);

struct Theorem1Statistic {
  double x = 0.0;  // mu_eps^gamma(region) / (2 - gamma)
  double y = 0.0;  // 2 D_eps(region)
};

Theorem1Statistic theorem1_statistic(const AveragedField& avg, double gamma, const Region& region);
Theorem1Statistic theorem1_statistic(const FieldSample& field, double gamma, double eps, const Region& region);

void write_measure_csv(std::ostream& os, const ChaosMeasure& m);
void write_measure_csv(std::ostream& os, const SignedChaosMeasure& m);
// JSON record {schema_version, params, totals, errors}.
std::string measure_summary_json(const ChaosMeasure& m);

}  // namespace gmclab
