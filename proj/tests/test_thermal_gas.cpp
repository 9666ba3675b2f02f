#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "support/oracles.hpp"
#include "triad/thermal_gas.hpp"

using namespace triad;
using doctest::Approx;

namespace {

ThermalCloud cloud_at(double power, int n = 3) {
  return thermal_cloud(trap_state(TrapConfig{}, power), n);
}

ThermalCloud random_cloud(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> temp(5e-6, 300e-6);
  std::uniform_real_distribution<double> perp(2e5, 3e6);
  std::uniform_real_distribution<double> aspect(0.05, 0.9);
  std::uniform_int_distribution<int> atoms(1, 3);
  const double w = perp(rng);
  return ThermalCloud{atoms(rng), temp(rng), Eigen::Vector3d(w, w, w * aspect(rng))};
}

// Brute-force 3D integral of n^j over +-8 thermal widths.
double brute_force_power_integral(const ThermalCloud& c, int j) {
  const Eigen::Vector3d half(8 * thermal_width(c, 0), 8 * thermal_width(c, 1),
                             8 * thermal_width(c, 2));
  return oracle::integrate_box(
      [&](const Eigen::Vector3d& r) { return std::pow(density_at(c, r), j); }, half, 8, 16);
}

}  // namespace

TEST_CASE("peak density at the reference powers") {
  // Values from the high-precision oracle in oracles/theory_values.py.
  CHECK(peak_density(cloud_at(0.110)) == Approx(9.5843411576692294e19).epsilon(1e-12));
  CHECK(peak_density(cloud_at(0.140)) == Approx(1.1484544557527766e20).epsilon(1e-12));
  CHECK(peak_density(cloud_at(0.200)) == Approx(1.5006874376587628e20).epsilon(1e-12));
  CHECK(peak_density(cloud_at(0.110)) * 1e-6 == Approx(0.96e14).epsilon(0.01));
  CHECK(peak_density(cloud_at(0.200)) * 1e-6 == Approx(1.50e14).epsilon(0.01));
}

TEST_CASE("peak density is linear in N and scales as P^(3/4)") {
  CHECK(peak_density(cloud_at(0.110, 6)) == Approx(2 * peak_density(cloud_at(0.110, 3))));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> power(0.01, 0.5);
  for (int i = 0; i < 20; ++i) {
    const double p1 = power(rng), p2 = power(rng);
    CHECK(peak_density(cloud_at(p1)) / peak_density(cloud_at(p2)) ==
          Approx(std::pow(p1 / p2, 0.75)).epsilon(1e-10));
  }
}

TEST_CASE("density profile") {
  const ThermalCloud c = cloud_at(0.110);
  CHECK(density_at(c, Eigen::Vector3d::Zero()) == peak_density(c));
  // m w^2 x^2 / 2 = k_B T.
  const double x = std::sqrt(2 * kRb85.k_B * c.temperature /
                             (kRb85.atom_mass * c.frequencies.x() * c.frequencies.x()));
  CHECK(density_at(c, Eigen::Vector3d(x, 0, 0)) ==
        Approx(peak_density(c) / std::exp(1.0)).epsilon(1e-13));
  CHECK(brute_force_power_integral(c, 1) == Approx(3.0).epsilon(1e-9));
}

TEST_CASE("density power integrals") {
  const ThermalCloud c = cloud_at(0.110);
  CHECK(density_power_integral(c, 1) == 3.0);
  CHECK(density_power_integral(c, 3) == Approx(5.3035162147193209e39).epsilon(1e-12));
  CHECK(4.0 / 3.0 * density_power_integral(c, 3) == Approx(7.07e39).epsilon(1e-3));
  CHECK_THROWS_AS(density_power_integral(c, 0), std::domain_error);
  CHECK_THROWS_AS(density_power_integral(c, 4), std::domain_error);
}

TEST_CASE("closed-form integrals match brute-force quadrature on random clouds") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const ThermalCloud c = random_cloud(rng);
    for (int j = 1; j <= 3; ++j) {
      const double closed = density_power_integral(c, j);
      CHECK(oracle::rel_diff(closed, brute_force_power_integral(c, j)) < 1e-6);
      CHECK(oracle::rel_diff(closed, density_power_integral_numeric(c, j)) < 1e-9);
    }
  }
}

TEST_CASE("linear density") {
  const ThermalCloud c = cloud_at(0.110);
  CHECK(peak_linear_density(c) == Approx(2827752.1379343853).epsilon(1e-12));
  CHECK(linear_density_at(c, 0.0) == Approx(peak_linear_density(c)).epsilon(1e-15));
  const double sz = thermal_width(c, 2);
  CHECK(oracle::integrate([&](double z) { return linear_density_at(c, z); }, -10 * sz, 10 * sz) ==
        Approx(3.0).epsilon(1e-9));
  CHECK(linear_density_at(c, 60 * sz) == 0.0);

  ThermalCloud asym = c;
  asym.frequencies.y() *= 1.1;
  CHECK_THROWS_AS(peak_linear_density(asym), std::domain_error);
}

TEST_CASE("cloud validation") {
  ThermalCloud c = cloud_at(0.110);
  CHECK_NOTHROW(c.validate());
  c.temperature = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = cloud_at(0.110);
  c.atom_count = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
