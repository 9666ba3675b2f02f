#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "support/oracles.hpp"
#include "triad/dynamics.hpp"

using namespace triad;
using doctest::Approx;

namespace {

RateCoefficients random_rates(std::mt19937_64& rng, bool with_gamma1 = true) {
  std::uniform_real_distribution<double> log_rate(-2.0, 1.0);
  auto draw = [&] { return std::pow(10.0, log_rate(rng)); };
  RateCoefficients r{with_gamma1 ? draw() : 0.0, draw(), draw(), draw()};
  return r;
}

std::vector<double> grid(double t_max, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = t_max * i / (n - 1);
  return t;
}

double sup_norm(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst,
                     (a.populations[i].vector() - b.populations[i].vector()).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("generator matrix") {
  CHECK(generator_matrix(RateCoefficients{}).isZero(0));

  const double g = 0.7, gamma = 0.3;
  const Eigen::Matrix4d m = generator_matrix(RateCoefficients{0, gamma, gamma, g});
  CHECK(m(2, 0) == Approx(3 * gamma));
  CHECK(m(3, 0) == Approx(g));

  const Eigen::Matrix4d full = generator_matrix(RateCoefficients{0.1, 0.2, 0.3, 0.4});
  Eigen::Vector4d diag(-(0.4 + 0.9 + 0.3), -(0.2 + 0.2), -0.1, 0.0);
  CHECK((full.diagonal() - diag).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(full.isLowerTriangular(0));

  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i)
    CHECK(generator_matrix(random_rates(rng)).colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("initial populations") {
  const PopulationVector r = default_initial_populations();
  CHECK(r.sum() == Approx(1.0).epsilon(1e-15));
  CHECK(r.r3() == 0.836);
  CHECK(r.atoms(3) == 0.836);
  CHECK(r.atoms(0) == 0.001);
  const PopulationVector d = dyad_initial_populations();
  CHECK(d.r3() == 0.0);
  CHECK(d.r2() == 1.0);
  CHECK(r.by_atom_count()[3] == 0.836);
  CHECK(PopulationVector::from_atom_counts(r.by_atom_count()).vector() == r.vector());
}

TEST_CASE("analytic solution: special cases") {
  const PopulationVector r0 = default_initial_populations();
  const RateCoefficients rates{0.2, 0.3, 0.4, 0.5};
  CHECK(evolve_analytic(r0, rates, 0.0).populations.vector() == r0.vector());

  // Pure three-body channel.
  const RateCoefficients g3_only{0, 0, 0, 0.8};
  for (double t : {0.1, 1.0, 4.0}) {
    const auto res = evolve_analytic(r0, g3_only, t);
    const double e = std::exp(-0.8 * t);
    CHECK(res.populations.r3() == Approx(0.836 * e).epsilon(1e-9));
    CHECK(res.populations.r2() == Approx(0.022).epsilon(1e-9));
    CHECK(res.populations.r1() == Approx(0.141).epsilon(1e-9));
    CHECK(res.populations.r0() == Approx(0.001 + 0.836 * (1 - e)).epsilon(1e-9));
  }

  // Gamma1 = 0: closed form for r3 and r1 against both the formula and the
  // integrator.
  const RateCoefficients no_g1{0, 0.3, 0.2, 0.5};
  const double lam = 0.5 + 3 * 0.2;
  for (double t : {0.3, 2.0, 7.0}) {
    const auto res = evolve_analytic(r0, no_g1, t).populations;
    CHECK(res.r3() == Approx(0.836 * std::exp(-lam * t)).epsilon(1e-12));
    CHECK(res.r1() ==
          Approx(0.141 + 0.6 / lam * 0.836 * (1 - std::exp(-lam * t))).epsilon(1e-12));
    const double ts[] = {t};
    const auto num = evolve_numeric(r0, no_g1, ts).populations.front();
    CHECK((num.vector() - res.vector()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("closed form agrees with matrix exponential and the integrator") {
  std::mt19937_64 rng(42);
  const PopulationVector r0 = default_initial_populations();
  int checked = 0;
  while (checked < 100) {
    const RateCoefficients rates = random_rates(rng, checked % 2 == 0);
    if (closed_form_degenerate(rates)) continue;
    ++checked;
    double min_rate = rates.largest();
    for (double g : {rates.gamma1, rates.gamma2, rates.gamma2_tilde, rates.gamma3})
      if (g > 0) min_rate = std::min(min_rate, g);
    const auto times = grid(5.0 / min_rate, 41);
    const Trajectory a = evolve_analytic(r0, rates, times);
    const Trajectory n = evolve_numeric(r0, rates, times);
    CHECK(sup_norm(a, n) < 1e-8);
    const Eigen::Matrix4d g = generator_matrix(rates);
    for (std::size_t i = 0; i < times.size(); i += 5) {
      const Eigen::Vector4d e = oracle::propagate(g, r0.vector(), times[i]);
      CHECK((e - a.populations[i].vector()).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("degenerate rates route to the integrator") {
  const PopulationVector r0 = default_initial_populations();
  // gamma2 == gamma3 + 3 gamma2_tilde with gamma1 = 0 makes d32 vanish.
  const RateCoefficients coincident{0.0, 1.1, 0.2, 0.5};
  CHECK(closed_form_degenerate(coincident));
  const auto res = evolve_analytic(r0, coincident, 1.3);
  CHECK(res.used_numeric);
  const Eigen::Vector4d e = oracle::propagate(generator_matrix(coincident), r0.vector(), 1.3);
  CHECK((e - res.populations.vector()).cwiseAbs().maxCoeff() < 1e-8);

  const RateCoefficients pair_only{0, 0.4, 0, 0};
  CHECK(closed_form_degenerate(pair_only));
  CHECK(evolve_analytic(r0, pair_only, 2.0).populations.r2() ==
        Approx(0.022 * std::exp(-0.8)).epsilon(1e-8));

  const RateCoefficients generic{0.1, 0.3, 0.2, 0.5};
  CHECK_FALSE(closed_form_degenerate(generic));
  CHECK_FALSE(evolve_analytic(r0, generic, 1.0).used_numeric);
}

TEST_CASE("conservation, positivity and monotone r3") {
  std::mt19937_64 rng(8);
  const PopulationVector r0 = default_initial_populations();
  for (int i = 0; i < 30; ++i) {
    const RateCoefficients rates = random_rates(rng, i % 3 != 0);
    const auto times = grid(20.0, 60);
    // Once r3 has decayed the explicit integrator only tracks it to its
    // absolute tolerance.
    const std::pair<Trajectory, double> paths[] = {{evolve_analytic(r0, rates, times), 0.0},
                                                   {evolve_numeric(r0, rates, times), 1e-12}};
    for (const auto& [traj, slack] : paths) {
      for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& p = traj.populations[k];
        CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
        CHECK(p.vector().minCoeff() >= -1e-12);
        if (k > 0) CHECK(p.r3() <= traj.populations[k - 1].r3() + slack);
      }
    }
  }
}

TEST_CASE("semigroup property") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> time(0.0, 3.0);
  const PopulationVector r0 = default_initial_populations();
  for (int i = 0; i < 50; ++i) {
    const RateCoefficients rates = random_rates(rng);
    if (closed_form_degenerate(rates)) continue;
    const double t1 = time(rng), t2 = time(rng);
    const auto direct = evolve_analytic(r0, rates, t1 + t2).populations;
    const auto mid = evolve_analytic(r0, rates, t1).populations;
    const auto composed = evolve_analytic(mid, rates, t2).populations;
    CHECK((direct.vector() - composed.vector()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("long-time limits") {
  const PopulationVector r0 = default_initial_populations();
  const RateCoefficients with_g1{0.3, 0.5, 0.2, 0.7};
  const auto late = evolve_analytic(r0, with_g1, 200.0).populations;
  CHECK(late.r0() == Approx(1.0).epsilon(1e-12));

  const RateCoefficients no_g1{0.0, 0.5, 0.2, 0.7};
  const auto end = evolve_analytic(r0, no_g1, 200.0).populations;
  CHECK(end.r1() == Approx(0.141 + 3 * 0.2 * 0.836 / (0.7 + 0.6)).epsilon(1e-12));
}

TEST_CASE("closed form is scalar generic") {
  const BasicRateCoefficients<long double> r{0.1L, 0.3L, 0.2L, 0.5L};
  const Eigen::Matrix<long double, 4, 1> init(0.836L, 0.022L, 0.141L, 0.001L);
  const auto ld = closed_form_populations<long double>(init, r, 1.7L);
  const auto d = closed_form_populations<double>(init.cast<double>(), r.cast<double>(), 1.7);
  CHECK((ld.cast<double>() - d).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("input validation") {
  const PopulationVector r0 = default_initial_populations();
  const RateCoefficients rates{0.1, 0.3, 0.2, 0.5};
  CHECK_THROWS_AS(evolve_analytic(r0, rates, -1.0), std::domain_error);
  CHECK_THROWS_AS(evolve_analytic(r0, RateCoefficients{-1, 0, 0, 0}, 1.0), std::domain_error);
  const double bad[] = {1.0, 0.5};
  CHECK_THROWS_AS(evolve_numeric(r0, rates, bad), std::domain_error);
}

TEST_CASE("trajectory csv") {
  const double times[] = {0.0, 1.0};
  const Trajectory traj = evolve_analytic(default_initial_populations(),
                                          RateCoefficients{0, 0.3, 0.3, 0.5}, times);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  const std::string text = os.str();
  CHECK(text.rfind("t_s,r3,r2,r1,r0\n", 0) == 0);
  CHECK(text.find("\n0,0.83599999999999997,") != std::string::npos);
}
