#include "triad/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace triad {

void ExperimentDesign::validate() const {
  if (wait_times.empty()) throw std::invalid_argument("design: no wait times");
  if (!(wait_times.front() >= 0)) throw std::invalid_argument("design: negative wait time");
  for (std::size_t i = 1; i < wait_times.size(); ++i)
    if (!(wait_times[i] > wait_times[i - 1]))
      throw std::invalid_argument("design: wait times must be strictly increasing");
  if (shots_per_time < 1) throw std::invalid_argument("design: shots_per_time must be >= 1");
  if (!(power > 0)) throw std::invalid_argument("design: power must be positive");
  initial_populations.validate();
}

double ReadoutModel::variance(int atoms) const {
  if (family == ReadoutFamily::Poisson) return mean(atoms);
  return variance_background + atoms * variance_per_atom;
}

void ReadoutModel::validate() const {
  if (!(mean_per_atom > 0)) throw std::invalid_argument("readout: mean_per_atom must be > 0");
  if (!(mean_background >= 0)) throw std::invalid_argument("readout: negative background");
  if (family == ReadoutFamily::Poisson && !(mean_background > 0))
    throw std::invalid_argument("readout: Poisson background mean must be > 0");
  if (family == ReadoutFamily::Gaussian &&
      !(variance_background > 0 && variance_per_atom >= 0))
    throw std::invalid_argument("readout: Gaussian variances must be positive");
}

void ReadoutTemplates::validate(double tol) const {
  if (pmf.cols() != 4 || pmf.rows() < 1)
    throw std::invalid_argument("templates: need a bins x 4 matrix");
  if ((pmf.array() < 0).any() || !pmf.allFinite())
    throw std::invalid_argument("templates: probabilities must be finite and non-negative");
  for (int k = 0; k < 4; ++k)
    if (std::abs(pmf.col(k).sum() - 1.0) > tol)
      throw std::invalid_argument("templates: column " + std::to_string(k) +
                                  " is not normalised");
}

ReadoutTemplates readout_templates(const ReadoutModel& readout, Eigen::Index min_bins) {
  readout.validate();
  const double top_mean = readout.mean(3);
  const double top_sd = std::sqrt(readout.variance(3));
  const auto bulk = Eigen::Index(std::ceil(top_mean + 12.0 * top_sd + 20.0));
  const Eigen::Index bins = std::max(bulk, min_bins);

  ReadoutTemplates t{Eigen::MatrixXd::Zero(bins, 4)};
  for (int k = 0; k < 4; ++k) {
    const double mu = readout.mean(k);
    if (readout.family == ReadoutFamily::Poisson) {
      const boost::math::poisson_distribution<double> dist(mu);
      for (Eigen::Index c = 0; c + 1 < bins; ++c) t.pmf(c, k) = boost::math::pdf(dist, double(c));
      t.pmf(bins - 1, k) = boost::math::cdf(boost::math::complement(dist, double(bins - 2)));
    } else {
      // Rounded normal; everything below 0.5 lands in bin 0.
      const boost::math::normal_distribution<double> dist(mu, std::sqrt(readout.variance(k)));
      double below = 0.0;
      for (Eigen::Index c = 0; c + 1 < bins; ++c) {
        const double upto = boost::math::cdf(dist, c + 0.5);
        t.pmf(c, k) = upto - below;
        below = upto;
      }
      t.pmf(bins - 1, k) = boost::math::cdf(boost::math::complement(dist, bins - 1.5));
    }
  }
  return t;
}

int simulate_shot(const RateCoefficients& rates, int n_initial, double t, RandomStream& stream) {
  if (n_initial < 0 || n_initial > 3) throw std::domain_error("simulate_shot: n must be 0..3");
  if (!(t >= 0)) throw std::domain_error("simulate_shot: t must be non-negative");
  const double g1 = rates.gamma1;
  int n = n_initial;
  double clock = 0.0;
  while (n > 0) {
    // Outgoing channels (rate, atoms left) of the current state.
    double hazard[3] = {0, 0, 0};
    int target[3] = {0, 0, 0};
    int channels = 0;
    auto add = [&](double rate, int to) {
      hazard[channels] = rate;
      target[channels] = to;
      ++channels;
    };
    if (n == 3) {
      add(rates.gamma3, 0);
      add(3.0 * rates.gamma2_tilde, 1);
      add(3.0 * g1, 2);
    } else if (n == 2) {
      add(rates.gamma2, 0);
      add(2.0 * g1, 1);
    } else {
      add(g1, 0);
    }
    double total = 0.0;
    for (int c = 0; c < channels; ++c) total += hazard[c];
    if (total <= 0.0) break;

    clock += boost::random::exponential_distribution<double>(total)(stream);
    if (clock > t) break;

    const double pick = stream.uniform() * total;
    double acc = 0.0;
    int next = -1;
    for (int c = 0; c < channels; ++c)
      if (hazard[c] > 0.0) next = target[c];  // fallback against rounding at the top
    for (int c = 0; c < channels; ++c) {
      acc += hazard[c];
      if (pick < acc && hazard[c] > 0.0) {
        next = target[c];
        break;
      }
    }
    n = next;
  }
  return n;
}

int sample_photons(const ReadoutModel& readout, int atom_count, RandomStream& stream) {
  if (atom_count < 0 || atom_count > 3) throw std::domain_error("sample_photons: atoms must be 0..3");
  const double mu = readout.mean(atom_count);
  if (readout.family == ReadoutFamily::Poisson)
    return boost::random::poisson_distribution<int, double>(mu)(stream);
  const double x =
      boost::random::normal_distribution<double>(mu, std::sqrt(readout.variance(atom_count)))(
          stream);
  return int(std::max(0.0, std::round(x)));
}

int sample_initial_atoms(const PopulationVector& initial, RandomStream& stream) {
  const double u = stream.uniform();
  double acc = 0.0;
  for (int k = 3; k > 0; --k) {
    acc += initial.atoms(k);
    if (u < acc) return k;
  }
  return 0;
}

ShotDataset simulate_dataset(const ExperimentDesign& design, const RateCoefficients& rates,
                             const ReadoutModel& readout, std::uint64_t master_seed) {
  design.validate();
  readout.validate();
  if (!rates.valid()) throw std::invalid_argument("simulate_dataset: invalid rates");

  ShotDataset ds;
  ds.seed = master_seed;
  ds.design = design;
  ds.readout = readout;
  ds.true_rates = rates;
  ds.photon_counts.resize(design.wait_times.size());
  for (std::size_t i = 0; i < design.wait_times.size(); ++i) {
    auto& row = ds.photon_counts[i];
    row.resize(std::size_t(design.shots_per_time));
    for (int j = 0; j < design.shots_per_time; ++j) {
      RandomStream stream = RandomStream::for_shot(master_seed, std::uint32_t(i), std::uint32_t(j));
      const int n0 = sample_initial_atoms(design.initial_populations, stream);
      const int n = simulate_shot(rates, n0, design.wait_times[i], stream);
      row[std::size_t(j)] = sample_photons(readout, n, stream);
    }
  }
  return ds;
}

bool ShotDataset::operator==(const ShotDataset& o) const {
  auto rates_eq = [](const std::optional<RateCoefficients>& a,
                     const std::optional<RateCoefficients>& b) {
    return a.has_value() == b.has_value() && (!a || *a == *b);
  };
  return seed == o.seed && design.wait_times == o.design.wait_times &&
         design.shots_per_time == o.design.shots_per_time &&
         design.initial_populations.vector() == o.design.initial_populations.vector() &&
         design.power == o.design.power && readout.family == o.readout.family &&
         readout.mean_background == o.readout.mean_background &&
         readout.mean_per_atom == o.readout.mean_per_atom &&
         readout.variance_background == o.readout.variance_background &&
         readout.variance_per_atom == o.readout.variance_per_atom &&
         rates_eq(true_rates, o.true_rates) && photon_counts == o.photon_counts;
}

}  // namespace triad
