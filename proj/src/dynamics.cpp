#include "triad/dynamics.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "triad/errors.hpp"

namespace triad {

namespace {

constexpr double kDegeneracyRatio = 1e-9;
constexpr double kRelTolerance = 1e-10;
// Tight enough that decayed components stay inside the clamp window instead of
// wandering at the relative tolerance.
constexpr double kAbsTolerance = 1e-14;

using State = std::array<double, 4>;

void check_times(std::span<const double> times) {
  if (times.empty()) throw std::domain_error("evolve: empty time grid");
  if (!(times.front() >= 0)) throw std::domain_error("evolve: times must be non-negative");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::domain_error("evolve: times must be strictly increasing");
}

PopulationVector finish(const Eigen::Vector4d& r) {
  return PopulationVector(r).clamped();
}

}  // namespace

bool closed_form_degenerate(const RateCoefficients& rates) {
  const double scale = rates.largest();
  const auto d = closed_form_denominators(rates);
  return std::any_of(d.begin(), d.end(),
                     [&](double x) { return std::abs(x) < kDegeneracyRatio * scale; }) ||
         std::any_of(d.begin(), d.end(), [](double x) { return x == 0.0; });
}

Trajectory evolve_numeric(const PopulationVector& r_init, const RateCoefficients& rates,
                          std::span<const double> times) {
  namespace odeint = boost::numeric::odeint;
  if (!rates.valid()) throw std::domain_error("evolve_numeric: invalid rates");
  check_times(times);

  const Eigen::Matrix4d g = generator_matrix(rates);
  auto rhs = [&g](const State& x, State& dxdt, double /*t*/) {
    Eigen::Map<Eigen::Vector4d>(dxdt.data()) = g * Eigen::Map<const Eigen::Vector4d>(x.data());
  };

  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.populations.reserve(times.size());
  auto observer = [&traj](const State& x, double /*t*/) {
    Eigen::Vector4d r = Eigen::Map<const Eigen::Vector4d>(x.data());
    r /= r.sum();
    traj.populations.push_back(finish(r));
  };

  State x;
  Eigen::Map<Eigen::Vector4d>(x.data()) = r_init.vector();
  if (rates.largest() == 0.0) {
    for (std::size_t i = 0; i < times.size(); ++i) observer(x, times[i]);
    return traj;
  }

  // Start the clock at t = 0 so the first sample also gets integrated.
  std::vector<double> grid;
  grid.reserve(times.size() + 1);
  if (times.front() > 0) grid.push_back(0.0);
  grid.insert(grid.end(), times.begin(), times.end());
  const bool skip_first = times.front() > 0;
  bool skipped = false;
  auto filtered = [&](const State& s, double t) {
    if (skip_first && !skipped) {
      skipped = true;
      return;
    }
    observer(s, t);
  };

  auto stepper = odeint::make_controlled(kAbsTolerance, kRelTolerance,
                                         odeint::runge_kutta_dopri5<State>());
  const double dt0 = 0.01 / rates.largest();
  try {
    odeint::integrate_times(stepper, rhs, x, grid.begin(), grid.end(), dt0, filtered,
                            odeint::max_step_checker(1'000'000));
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("evolve_numeric: integration failed: ") + e.what());
  }
  return traj;
}

AnalyticPopulations evolve_analytic(const PopulationVector& r_init, const RateCoefficients& rates,
                                    double t) {
  if (!(t >= 0)) throw std::domain_error("evolve_analytic: t must be non-negative");
  if (!rates.valid()) throw std::domain_error("evolve_analytic: invalid rates");
  if (t == 0.0 || rates.largest() == 0.0) return {r_init, false};
  if (closed_form_degenerate(rates)) {
    const double grid[] = {t};
    return {evolve_numeric(r_init, rates, grid).populations.front(), true};
  }
  return {finish(closed_form_populations<double>(r_init.vector(), rates, t)), false};
}

Trajectory evolve_analytic(const PopulationVector& r_init, const RateCoefficients& rates,
                           std::span<const double> times) {
  check_times(times);
  if (closed_form_degenerate(rates) && rates.largest() > 0.0)
    return evolve_numeric(r_init, rates, times);
  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  for (double t : times) traj.populations.push_back(evolve_analytic(r_init, rates, t).populations);
  return traj;
}

PopulationVector default_initial_populations() { return {0.836, 0.022, 0.141, 0.001}; }

PopulationVector dyad_initial_populations() { return {0.0, 1.0, 0.0, 0.0}; }

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t_s,r3,r2,r1,r0\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& p = traj.populations[i];
    os << traj.times[i] << ',' << p.r3() << ',' << p.r2() << ',' << p.r1() << ',' << p.r0()
       << '\n';
  }
  os.precision(old);
}

}  // namespace triad
