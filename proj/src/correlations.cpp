#include "triad/correlations.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "triad/errors.hpp"

namespace triad {

void MicroscopicConstants::validate() const {
  if (!(kappa1 >= 0 && kappa2 >= 0 && kappa3 >= 0))
    throw std::invalid_argument("microscopic constants: kappas must be non-negative");
  if (!std::isfinite(scattering_length))
    throw std::invalid_argument("microscopic constants: scattering length must be finite");
  if (!(lieb_liniger_C > 0))
    throw std::invalid_argument("microscopic constants: C must be positive");
  if (!(strong_coupling_bound >= 0))
    throw std::invalid_argument("microscopic constants: coupling bound must be non-negative");
}

double thermal_correlator(const ThermalCloud& cloud, int n, int m, const PhysicalConstants& pc) {
  if (n < 1 || m < 1 || m > 3)
    throw std::domain_error("thermal_correlator: need n >= 1 and 1 <= m <= 3");
  if (cloud.atom_count != m)
    throw std::domain_error("thermal_correlator: cloud atom count must equal m");
  if (n > m) return 0.0;
  // n! m (m-1) ... (m-n+1) / m^n
  double prefactor = 1.0;
  for (int i = 0; i < n; ++i) prefactor *= double(i + 1) * double(m - i) / double(m);
  return prefactor * density_power_integral(cloud, n, pc);
}

double gamma3_thermal(const ThermalCloud& cloud, const MicroscopicConstants& mc,
                      const PhysicalConstants& pc) {
  if (cloud.atom_count != 3) throw std::domain_error("gamma3_thermal: needs three atoms");
  return 2.0 * mc.kappa3 * thermal_correlator(cloud, 3, 3, pc);
}

double gamma3_thermal_numeric(const ThermalCloud& cloud, const MicroscopicConstants& mc,
                              const PhysicalConstants& pc) {
  if (cloud.atom_count != 3) throw std::domain_error("gamma3_thermal: needs three atoms");
  return 2.0 * mc.kappa3 * (4.0 / 3.0) * density_power_integral_numeric(cloud, 3, pc);
}

RateCoefficients thermal_rates(const ThermalCloud& triad_cloud, const MicroscopicConstants& mc,
                               const PhysicalConstants& pc) {
  ThermalCloud dyad = triad_cloud;
  dyad.atom_count = 2;
  RateCoefficients r;
  r.gamma1 = 2.0 * mc.kappa1;
  r.gamma2 = 2.0 * mc.kappa2 * thermal_correlator(dyad, 2, 2, pc);
  r.gamma2_tilde = 2.0 / 3.0 * mc.kappa2 * thermal_correlator(triad_cloud, 2, 3, pc);
  r.gamma3 = gamma3_thermal(triad_cloud, mc, pc);
  return r;
}

double lieb_liniger_gamma(double n1d_local, const MicroscopicConstants& mc, double l_perp) {
  if (!(n1d_local > 0)) throw std::domain_error("lieb_liniger_gamma: density must be positive");
  if (!(l_perp > 0)) throw std::domain_error("lieb_liniger_gamma: l_perp must be positive");
  const double a = mc.scattering_length;
  const double shift = 1.0 - mc.lieb_liniger_C * a / l_perp;
  if (std::abs(shift) < 1e-9)
    throw SingularityError("lieb_liniger_gamma: confinement-induced resonance");
  return 2.0 * a / (n1d_local * l_perp * l_perp * shift);
}

G3Estimate g3_super_tg(double gamma_ll, double strong_coupling_bound) {
  const double g6 = std::pow(gamma_ll, 6);
  const double pi6 = std::pow(kPi, 6);
  return {16.0 * pi6 / (15.0 * g6), std::abs(gamma_ll) > strong_coupling_bound};
}

double gamma3_stg_thermal(const ThermalCloud& cloud, const MicroscopicConstants& mc,
                          double l_perp, const PhysicalConstants& pc) {
  const double gamma = lieb_liniger_gamma(peak_linear_density(cloud, pc), mc, l_perp);
  return g3_super_tg(gamma, mc.strong_coupling_bound).value * gamma3_thermal(cloud, mc, pc);
}

double gamma3_ground_state_1d(const ThermalCloud& cloud, const MicroscopicConstants& mc,
                              double l_perp, const PhysicalConstants& pc) {
  if (cloud.atom_count != 3) throw std::domain_error("gamma3_ground_state_1d: needs three atoms");
  const double n_peak = peak_linear_density(cloud, pc);
  const double sigma = thermal_width(cloud, 2, pc);
  const double g3_peak = g3_super_tg(lieb_liniger_gamma(n_peak, mc, l_perp)).value;

  // Integrate over u = z / sigma with the density in units of its peak.
  auto integrand = [&](double u) {
    const double profile = std::exp(-0.5 * u * u);
    const double g3 = mc.g3_mode == G3Mode::Local
                          ? g3_super_tg(lieb_liniger_gamma(n_peak * profile, mc, l_perp)).value
                          : g3_peak;
    return g3 * profile * profile * profile;
  };
  using boost::math::quadrature::gauss_kronrod;
  // The cubed profile is below 1e-90 past 12 widths; going much further
  // overflows gamma_LL^6 in the local mode.
  const double reach = 12.0;
  const double integral =
      sigma * n_peak * n_peak * n_peak *
      gauss_kronrod<double, 15>::integrate(integrand, -reach, reach, 20, 1e-12);
  const double l2 = l_perp * l_perp;
  return 2.0 * mc.kappa3 * 9.0 / (4.0 * std::pow(kPi, 4) * l2 * l2) * integral;
}

double gamma2_exponent(int m) {
  if (m < 0 || m > 2) throw std::domain_error("gamma2 scaling: m must be 0, 1 or 2");
  return 2.0 * m + 1.5;
}

double gamma2_scaling(double amplitude, int m, double omega_perp) {
  const double e = gamma2_exponent(m);
  if (!(amplitude >= 0)) throw std::domain_error("gamma2_scaling: amplitude must be >= 0");
  if (!(omega_perp > 0)) throw std::domain_error("gamma2_scaling: omega must be positive");
  return amplitude * std::pow(omega_perp, e);
}

Gamma3Prediction predict_gamma3(const TrapConfig& trap, const MicroscopicConstants& mc,
                                double power, const PhysicalConstants& pc) {
  const TrapState state = trap_state(trap, power, pc);
  const ThermalCloud cloud = thermal_cloud(state, 3);
  Gamma3Prediction p{};
  p.power = power;
  p.omega_perp = state.omega_perp();
  p.l_perp = state.l_perp;
  p.peak_density = peak_density(cloud, pc);
  p.peak_linear_density = peak_linear_density(cloud, pc);
  p.gamma_ll = lieb_liniger_gamma(p.peak_linear_density, mc, state.l_perp);
  p.g3 = g3_super_tg(p.gamma_ll, mc.strong_coupling_bound);
  p.thermal = gamma3_thermal(cloud, mc, pc);
  p.stg = p.g3.value * p.thermal;
  p.ground_state_1d = gamma3_ground_state_1d(cloud, mc, state.l_perp, pc);
  return p;
}

}  // namespace triad
