#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "triad/trap.hpp"

using namespace triad;
using doctest::Approx;

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

TEST_CASE("frequencies follow square-root power scaling") {
  const TrapConfig cfg;
  const Eigen::Vector3d w110 = frequencies_at_power(cfg, 0.110);
  CHECK(w110.x() == Approx(kTwoPi * 210e3).epsilon(1e-14));
  CHECK(w110.y() == Approx(kTwoPi * 210e3).epsilon(1e-14));
  CHECK(w110.z() == Approx(kTwoPi * 34e3).epsilon(1e-14));

  const Eigen::Vector3d w440 = frequencies_at_power(cfg, 0.440);
  CHECK(w440.x() == Approx(kTwoPi * 420e3).epsilon(1e-13));
  CHECK(w440.z() == Approx(kTwoPi * 68e3).epsilon(1e-13));

  const Eigen::Vector3d w200 = frequencies_at_power(cfg, 0.200);
  CHECK(w200.x() / kTwoPi == Approx(283.2e3).epsilon(1e-3));
  CHECK(w200.z() / kTwoPi == Approx(45.85e3).epsilon(1e-3));

  CHECK_THROWS_AS(frequencies_at_power(cfg, 0.0), std::domain_error);
  CHECK_THROWS_AS(frequencies_at_power(cfg, -1.0), std::domain_error);
}

TEST_CASE("temperature scaling") {
  const TrapConfig cfg;
  CHECK(temperature_at_power(cfg, 0.005) == Approx(17.8e-6).epsilon(1e-14));
  CHECK(temperature_at_power(cfg, 0.020) == Approx(35.6e-6).epsilon(1e-14));
  CHECK(temperature_at_power(cfg, 0.110) == Approx(83.5e-6).epsilon(1e-3));
  CHECK_THROWS_AS(temperature_at_power(cfg, 0.0), std::domain_error);
}

TEST_CASE("thermal ratio") {
  TrapConfig cfg;
  CHECK(thermal_ratio(cfg) == Approx(51.165789430508831).epsilon(1e-12));

  // Independent of the power at which it is evaluated.
  for (double p : {0.110, 0.200, 0.017}) {
    const double r = kRb85.k_B * temperature_at_power(cfg, p) /
                     (kRb85.hbar * frequencies_at_power(cfg, p).z());
    CHECK(r == Approx(thermal_ratio(cfg)).epsilon(1e-12));
  }

  const double base = thermal_ratio(cfg);
  cfg.ref_temperature *= 2.0;
  CHECK(thermal_ratio(cfg) == Approx(2.0 * base).epsilon(1e-14));
}

TEST_CASE("config validation") {
  TrapConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  TrapConfig asym = cfg;
  asym.ref_frequencies.y() = 200e3;
  CHECK_THROWS_AS(asym.validate(), std::invalid_argument);

  TrapConfig prolate = cfg;
  prolate.ref_frequencies.z() = 300e3;
  CHECK_THROWS_AS(prolate.validate(), std::invalid_argument);

  TrapConfig cold = cfg;
  cold.ref_temperature = 0.0;
  CHECK_THROWS_AS(cold.validate(), std::invalid_argument);
}

TEST_CASE("trap state and transverse length") {
  const TrapConfig cfg;
  const TrapState s = trap_state(cfg, 0.110);
  CHECK(s.l_perp == std::sqrt(kRb85.hbar / (kRb85.atom_mass * s.omega_perp())));
  CHECK(s.l_perp == Approx(2.3808385871154633e-08).epsilon(1e-12));
  CHECK(trap_state(cfg, 0.200).l_perp == Approx(2.050315170339219e-08).epsilon(1e-12));
}

TEST_CASE("power-law properties over random powers") {
  const TrapConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> power(1e-3, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double p1 = power(rng), p2 = power(rng);
    const Eigen::Vector3d ratio =
        frequencies_at_power(cfg, p1).cwiseQuotient(frequencies_at_power(cfg, p2));
    for (int k = 0; k < 3; ++k) CHECK(ratio[k] == Approx(std::sqrt(p1 / p2)).epsilon(1e-12));
    CHECK(trap_state(cfg, p1).l_perp / trap_state(cfg, p2).l_perp ==
          Approx(std::pow(p1 / p2, -0.25)).epsilon(1e-12));
  }
}
