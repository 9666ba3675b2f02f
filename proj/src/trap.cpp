#include "triad/trap.hpp"

#include <cmath>
#include <stdexcept>

namespace triad {

void PhysicalConstants::validate() const {
  if (!(hbar > 0 && k_B > 0 && atom_mass > 0 && bohr_radius > 0))
    throw std::invalid_argument("physical constants must be strictly positive");
}

void TrapConfig::validate() const {
  if (!(ref_power_freq > 0 && ref_power_temp > 0 && ref_temperature > 0 && wavelength > 0 &&
        waist > 0))
    throw std::invalid_argument("trap config: all fields must be strictly positive");
  if (!(ref_frequencies.array() > 0).all())
    throw std::invalid_argument("trap config: reference frequencies must be positive");
  if (ref_frequencies.x() != ref_frequencies.y())
    throw std::invalid_argument("trap config: transverse frequencies must be equal");
  const double aspect = ref_frequencies.z() / ref_frequencies.x();
  if (!(aspect > 0 && aspect < 1))
    throw std::invalid_argument("trap config: axial/transverse aspect ratio must lie in (0, 1)");
}

Eigen::Vector3d frequencies_at_power(const TrapConfig& cfg, double power) {
  if (!(power > 0)) throw std::domain_error("frequencies_at_power: power must be positive");
  return 2.0 * kPi * std::sqrt(power / cfg.ref_power_freq) * cfg.ref_frequencies;
}

double temperature_at_power(const TrapConfig& cfg, double power) {
  if (!(power > 0)) throw std::domain_error("temperature_at_power: power must be positive");
  return cfg.ref_temperature * std::sqrt(power / cfg.ref_power_temp);
}

double thermal_ratio(const TrapConfig& cfg, const PhysicalConstants& pc) {
  cfg.validate();
  const double p = cfg.ref_power_freq;
  return pc.k_B * temperature_at_power(cfg, p) / (pc.hbar * frequencies_at_power(cfg, p).z());
}

double transverse_length(double omega_perp, const PhysicalConstants& pc) {
  if (!(omega_perp > 0)) throw std::domain_error("transverse_length: omega must be positive");
  return std::sqrt(pc.hbar / (pc.atom_mass * omega_perp));
}

TrapState trap_state(const TrapConfig& cfg, double power, const PhysicalConstants& pc) {
  cfg.validate();
  TrapState s{power, frequencies_at_power(cfg, power), temperature_at_power(cfg, power), 0.0};
  s.l_perp = transverse_length(s.omega_perp(), pc);
  return s;
}

}  // namespace triad
