#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "triad/rates.hpp"

namespace triad {

/// Generator G of dr/dt = G r in state order (r3, r2, r1, r0).
///
/// Lower triangular; each column sums to zero.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> generator_matrix(const BasicRateCoefficients<Scalar>& g) {
  Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Zero();
  m(0, 0) = -(g.gamma3 + Scalar(3) * g.gamma2_tilde + Scalar(3) * g.gamma1);
  m(1, 0) = Scalar(3) * g.gamma1;
  m(2, 0) = Scalar(3) * g.gamma2_tilde;
  m(3, 0) = g.gamma3;
  m(1, 1) = -(g.gamma2 + Scalar(2) * g.gamma1);
  m(2, 1) = Scalar(2) * g.gamma1;
  m(3, 1) = g.gamma2;
  m(2, 2) = -g.gamma1;
  m(3, 2) = g.gamma1;
  return m;
}

/// The five denominators of the closed-form solution. A vanishing entry means
/// two decay constants coincide (or a channel is switched off) and the
/// closed form is not usable as written.
template <typename Scalar>
std::array<Scalar, 5> closed_form_denominators(const BasicRateCoefficients<Scalar>& g) {
  const Scalar three_body = g.gamma3 + Scalar(3) * g.gamma2_tilde;
  return {three_body - g.gamma2 + g.gamma1, three_body + Scalar(2) * g.gamma1,
          g.gamma2 + g.gamma1, g.gamma2 + Scalar(2) * g.gamma1,
          three_body + Scalar(3) * g.gamma1};
}

/// Closed-form populations at time t. Only meaningful when none of
/// closed_form_denominators(g) vanishes.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> closed_form_populations(const Eigen::Matrix<Scalar, 4, 1>& r_init,
                                                    const BasicRateCoefficients<Scalar>& g,
                                                    Scalar t) {
  using std::exp;
  const auto [d32, d31, d21, lambda2, lambda3] = closed_form_denominators(g);
  const Scalar g1 = g.gamma1;
  const Scalar g2 = g.gamma2;

  // Integration constants from the t = 0 populations.
  const Scalar A = r_init[0];
  const Scalar c32 = -Scalar(3) * A * g1 / d32;  // r2 amplitude on the r3 mode
  const Scalar B = r_init[1] - c32;
  const Scalar alpha = Scalar(3) * A / d31 * (g.gamma2_tilde - Scalar(2) * g1 * g1 / d32);
  const Scalar beta = Scalar(2) * B * g1 / d21;
  const Scalar C = r_init[2] + alpha + beta;
  const Scalar k3 = (-g.gamma3 * A - g2 * c32 + g1 * alpha) / lambda3;
  const Scalar k2 = (-g2 * B + g1 * beta) / lambda2;
  const Scalar D = r_init[3] - k3 - k2 + C;

  const Scalar e3 = exp(-lambda3 * t);
  const Scalar e2 = exp(-lambda2 * t);
  const Scalar e1 = exp(-g1 * t);

  Eigen::Matrix<Scalar, 4, 1> r;
  r[0] = A * e3;
  r[1] = c32 * e3 + B * e2;
  r[2] = -alpha * e3 - beta * e2 + C * e1;
  r[3] = k3 * e3 + k2 * e2 - C * e1 + D;
  return r;
}

/// True when some closed-form denominator is below 1e-9 times the largest rate.
bool closed_form_degenerate(const RateCoefficients& rates);

struct AnalyticPopulations {
  PopulationVector populations;
  /// The rates hit a removable singularity of the closed form and the value
  /// came from the numerical integrator instead.
  bool used_numeric = false;
};

/// Exact populations at t >= 0 from r_init, falling back to evolve_numeric
/// for degenerate rate sets.
AnalyticPopulations evolve_analytic(const PopulationVector& r_init, const RateCoefficients& rates,
                                    double t);

struct Trajectory {
  std::vector<double> times;
  std::vector<PopulationVector> populations;

  std::size_t size() const { return times.size(); }
};

/// Adaptive Dormand-Prince integration of dr/dt = G r, sampled at `times`
/// (strictly increasing, times[0] >= 0). Throws IntegrationError if the
/// stepper cannot meet its tolerances (1e-10 relative, 1e-14 absolute).
Trajectory evolve_numeric(const PopulationVector& r_init, const RateCoefficients& rates,
                          std::span<const double> times);

/// Closed form sampled at every time.
Trajectory evolve_analytic(const PopulationVector& r_init, const RateCoefficients& rates,
                           std::span<const double> times);

/// Triad-loading initial condition (r3, r2, r1, r0) = (0.836, 0.022, 0.141, 0.001).
PopulationVector default_initial_populations();

/// Dyad loading: two atoms with certainty.
PopulationVector dyad_initial_populations();

/// CSV with columns t_s,r3,r2,r1,r0.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace triad
