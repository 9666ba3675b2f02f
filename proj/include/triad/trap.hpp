#pragma once

#include <Eigen/Core>

#include "triad/constants.hpp"

namespace triad {

/// Tweezer reference data. Everything is stored in SI units; the frequencies
/// here are the ordinary (Hz) values quoted at `ref_power_freq`.
struct TrapConfig {
  double ref_power_freq = 0.110;                        // W
  Eigen::Vector3d ref_frequencies{210e3, 210e3, 34e3};  // Hz at ref_power_freq
  double ref_power_temp = 0.005;                        // W
  double ref_temperature = 17.8e-6;                     // K at ref_power_temp
  double wavelength = 1064e-9;                          // m
  double waist = 1.1e-6;                                // m

  /// Throws std::invalid_argument when a field is non-positive, the
  /// transverse pair differs, or the aspect ratio is outside (0, 1).
  void validate() const;
};

/// Trap frequencies (rad/s) at `power`, scaled as sqrt(P / P_ref).
Eigen::Vector3d frequencies_at_power(const TrapConfig& cfg, double power);

/// Temperature at `power`, scaled as sqrt(P / P_ref_temp).
double temperature_at_power(const TrapConfig& cfg, double power);

/// k_B T / (hbar omega_z); both scale as sqrt(P) so the ratio is power-independent.
double thermal_ratio(const TrapConfig& cfg, const PhysicalConstants& pc = kRb85);

/// sqrt(hbar / (m omega_perp)).
double transverse_length(double omega_perp, const PhysicalConstants& pc = kRb85);

struct TrapState {
  double power;                 // W
  Eigen::Vector3d frequencies;  // rad/s
  double temperature;           // K
  double l_perp;                // m

  double omega_perp() const { return frequencies.x(); }
};

TrapState trap_state(const TrapConfig& cfg, double power, const PhysicalConstants& pc = kRb85);

}  // namespace triad
