#include "triad/thermal_gas.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace triad {

void ThermalCloud::validate() const {
  if (atom_count < 1) throw std::invalid_argument("thermal cloud: atom_count must be >= 1");
  if (!(temperature > 0)) throw std::invalid_argument("thermal cloud: temperature must be > 0");
  if (!(frequencies.array() > 0).all())
    throw std::invalid_argument("thermal cloud: frequencies must be > 0");
}

ThermalCloud thermal_cloud(const TrapState& state, int atom_count) {
  ThermalCloud c{atom_count, state.temperature, state.frequencies};
  c.validate();
  return c;
}

double peak_density(const ThermalCloud& cloud, const PhysicalConstants& pc) {
  cloud.validate();
  const double inv_area = pc.atom_mass / (2.0 * kPi * pc.k_B * cloud.temperature);
  return cloud.atom_count * cloud.frequencies.prod() * std::pow(inv_area, 1.5);
}

double density_at(const ThermalCloud& cloud, const Eigen::Vector3d& r,
                  const PhysicalConstants& pc) {
  const double energy =
      0.5 * pc.atom_mass * (cloud.frequencies.array().square() * r.array().square()).sum();
  return peak_density(cloud, pc) * std::exp(-energy / (pc.k_B * cloud.temperature));
}

namespace {

void check_power(int j) {
  if (j < 1 || j > 3)
    throw std::domain_error("density_power_integral: j must be 1, 2 or 3");
}

}  // namespace

double density_power_integral(const ThermalCloud& cloud, int j, const PhysicalConstants& pc) {
  check_power(j);
  if (j == 1) return cloud.atom_count;
  return std::pow(peak_density(cloud, pc), j - 1) * cloud.atom_count * std::pow(j, -1.5);
}

double thermal_width(const ThermalCloud& cloud, int axis, const PhysicalConstants& pc) {
  cloud.validate();
  if (axis < 0 || axis > 2) throw std::domain_error("thermal_width: axis must be 0, 1 or 2");
  const double w = cloud.frequencies[axis];
  return std::sqrt(pc.k_B * cloud.temperature / (pc.atom_mass * w * w));
}

double density_power_integral_numeric(const ThermalCloud& cloud, int j,
                                      const PhysicalConstants& pc) {
  check_power(j);
  using boost::math::quadrature::gauss_kronrod;
  double product = std::pow(peak_density(cloud, pc), j);
  for (int axis = 0; axis < 3; ++axis) {
    // Integrate in units of the thermal width so the tolerance is scale-free.
    const double sigma = thermal_width(cloud, axis, pc);
    auto f = [j](double u) { return std::exp(-0.5 * j * u * u); };
    const double inf = std::numeric_limits<double>::infinity();
    product *= sigma * gauss_kronrod<double, 15>::integrate(f, -inf, inf, 15, 1e-13);
  }
  return product;
}

double peak_linear_density(const ThermalCloud& cloud, const PhysicalConstants& pc) {
  cloud.validate();
  if (cloud.frequencies.x() != cloud.frequencies.y())
    throw std::domain_error("peak_linear_density: transverse frequencies differ");
  const double w = cloud.frequencies.x();
  return peak_density(cloud, pc) * 2.0 * kPi * pc.k_B * cloud.temperature /
         (pc.atom_mass * w * w);
}

double linear_density_at(const ThermalCloud& cloud, double z, const PhysicalConstants& pc) {
  const double sigma = thermal_width(cloud, 2, pc);
  return peak_linear_density(cloud, pc) * std::exp(-0.5 * z * z / (sigma * sigma));
}

}  // namespace triad
