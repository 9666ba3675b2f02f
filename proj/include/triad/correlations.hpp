#pragma once

#include "triad/constants.hpp"
#include "triad/rates.hpp"
#include "triad/thermal_gas.hpp"

namespace triad {

/// How g3 enters the transverse-ground-state 1D integral.
enum class G3Mode {
  Local,  ///< g3(gamma_LL(n1D(z))) evaluated at each z under the integral
  Peak,   ///< g3 fixed at its value for the peak linear density
};

/// Microscopic loss constants, SI units throughout.
struct MicroscopicConstants {
  double kappa1 = 0.0;                               // s^-1
  double kappa2 = 0.0;                               // m^3 / s
  double kappa3 = 0.093e-25 * 1e-12;                 // m^6 / s
  double scattering_length = -475.0 * kRb85.bohr_radius;  // m
  double lieb_liniger_C = 1.0326;
  G3Mode g3_mode = G3Mode::Local;
  /// g3 is flagged outside |gamma_LL| > this bound.
  double strong_coupling_bound = 1.0;

  void validate() const;
};

/// Integrated n-body correlator of an m-atom uncorrelated thermal cloud,
/// n! m!/(m-n)! / m^n times the integral of n(r)^n. Zero when n > m.
/// Requires cloud.atom_count == m.
double thermal_correlator(const ThermalCloud& cloud, int n, int m,
                          const PhysicalConstants& pc = kRb85);

/// 2 kappa3 (4/3) int n^3, for a three-atom cloud.
double gamma3_thermal(const ThermalCloud& cloud, const MicroscopicConstants& mc,
                      const PhysicalConstants& pc = kRb85);

/// Same rate with the density integral taken by quadrature.
double gamma3_thermal_numeric(const ThermalCloud& cloud, const MicroscopicConstants& mc,
                              const PhysicalConstants& pc = kRb85);

/// Two-body rates of the uncorrelated thermal model at matched single-particle
/// profile: gamma2 from the dyad (m = 2) and gamma2_tilde from the triad
/// (m = 3) correlator. The two agree up to rounding.
RateCoefficients thermal_rates(const ThermalCloud& triad_cloud, const MicroscopicConstants& mc,
                               const PhysicalConstants& pc = kRb85);

/// 1D coupling 2a / (n1D l_perp^2 (1 - C a / l_perp)).
/// Throws SingularityError within 1e-9 of the confinement-induced resonance.
double lieb_liniger_gamma(double n1d_local, const MicroscopicConstants& mc, double l_perp);

struct G3Estimate {
  double value;
  bool strong_coupling;  ///< |gamma_LL| above the validity bound
};

/// Strong-coupling three-body correlation 16 pi^6 / (15 gamma_LL^6).
G3Estimate g3_super_tg(double gamma_ll, double strong_coupling_bound = 1.0);

/// Thermal rate scaled by g3 evaluated at the peak linear density.
double gamma3_stg_thermal(const ThermalCloud& cloud, const MicroscopicConstants& mc,
                          double l_perp, const PhysicalConstants& pc = kRb85);

/// 2 kappa3 9/(4 pi^4 l_perp^4) int g3 n1D(z)^3 dz, by adaptive quadrature.
double gamma3_ground_state_1d(const ThermalCloud& cloud, const MicroscopicConstants& mc,
                              double l_perp, const PhysicalConstants& pc = kRb85);

/// Gamma2 = A omega_perp^(2m + 3/2), m in {0, 1, 2}.
double gamma2_scaling(double amplitude, int m, double omega_perp);

/// 2m + 3/2.
double gamma2_exponent(int m);

/// All theory curves at one beam power.
struct Gamma3Prediction {
  double power;       // W
  double omega_perp;  // rad/s
  double l_perp;      // m
  double peak_density;
  double peak_linear_density;
  double gamma_ll;
  G3Estimate g3;
  double thermal;
  double stg;
  double ground_state_1d;
};

Gamma3Prediction predict_gamma3(const TrapConfig& trap, const MicroscopicConstants& mc,
                                double power, const PhysicalConstants& pc = kRb85);

}  // namespace triad
