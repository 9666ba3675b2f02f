#pragma once

namespace triad {

/// CODATA values in SI units, plus the 85Rb atomic mass.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;         // J s
  double k_B = 1.380649e-23;             // J / K
  double atom_mass = 84.911789738 * 1.66053906660e-27;  // kg
  double bohr_radius = 5.29177210903e-11;  // m

  void validate() const;
};

/// Shared default instance; all physics functions take constants explicitly
/// so tests can swap in alternatives.
inline constexpr PhysicalConstants kRb85{};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace triad
