#pragma once

#include <Eigen/Core>

#include "triad/constants.hpp"
#include "triad/trap.hpp"

namespace triad {

/// N classical atoms at temperature T in a 3D harmonic trap.
///
/// The rate model only uses N in {1, 2, 3}; the density utilities accept any
/// N >= 1.
struct ThermalCloud {
  int atom_count = 3;
  double temperature = 0.0;     // K
  Eigen::Vector3d frequencies;  // rad/s

  void validate() const;
};

ThermalCloud thermal_cloud(const TrapState& state, int atom_count);

/// Normalisation n0 such that the Boltzmann profile integrates to N.
double peak_density(const ThermalCloud& cloud, const PhysicalConstants& pc = kRb85);

/// n0 exp(-sum_i m w_i^2 r_i^2 / (2 k_B T)).
double density_at(const ThermalCloud& cloud, const Eigen::Vector3d& r,
                  const PhysicalConstants& pc = kRb85);

/// Closed form of the integral of n^j over all space, j in {1, 2, 3}:
/// n0^(j-1) N j^(-3/2).
double density_power_integral(const ThermalCloud& cloud, int j,
                              const PhysicalConstants& pc = kRb85);

/// Same integral evaluated by adaptive quadrature, one axis at a time (the
/// harmonic Boltzmann factor separates).
double density_power_integral_numeric(const ThermalCloud& cloud, int j,
                                      const PhysicalConstants& pc = kRb85);

/// Transversely integrated density on the axis, n0 2 pi k_B T / (m w_perp^2).
/// Throws std::domain_error unless the two transverse frequencies agree.
double peak_linear_density(const ThermalCloud& cloud, const PhysicalConstants& pc = kRb85);

/// Axial profile n1D(z) = n1D(0) exp(-m w_z^2 z^2 / (2 k_B T)).
double linear_density_at(const ThermalCloud& cloud, double z,
                         const PhysicalConstants& pc = kRb85);

/// Gaussian rms width sqrt(k_B T / (m w^2)) of the density along an axis.
double thermal_width(const ThermalCloud& cloud, int axis, const PhysicalConstants& pc = kRb85);

}  // namespace triad
