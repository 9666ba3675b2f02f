#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "triad/random.hpp"
#include "triad/rates.hpp"

namespace triad {

struct ExperimentDesign {
  std::vector<double> wait_times;  // s, non-negative, strictly increasing
  int shots_per_time = 600;
  PopulationVector initial_populations{0.836, 0.022, 0.141, 0.001};
  double power = 0.110;  // W

  void validate() const;
};

enum class ReadoutFamily { Poisson, Gaussian };

/// Photon-count distribution of the single-photon counter for k atoms.
///
/// Means are linear in k. The Gaussian family draws a rounded normal variate
/// clamped at zero, with variance variance_background + k variance_per_atom.
struct ReadoutModel {
  ReadoutFamily family = ReadoutFamily::Poisson;
  double mean_background = 10.0;
  double mean_per_atom = 40.0;
  double variance_background = 10.0;
  double variance_per_atom = 40.0;

  double mean(int atoms) const { return mean_background + atoms * mean_per_atom; }
  double variance(int atoms) const;
  void validate() const;
};

/// Per-atom-count photon distributions on bins 0..bins()-1; the last bin
/// collects the upper tail. Column k is the pmf for k atoms.
struct ReadoutTemplates {
  Eigen::MatrixXd pmf;  // bins x 4

  Eigen::Index bins() const { return pmf.rows(); }
  void validate(double tol = 1e-9) const;
};

/// Model templates covering at least `min_bins` bins and the bulk of the k = 3
/// distribution.
ReadoutTemplates readout_templates(const ReadoutModel& readout, Eigen::Index min_bins = 0);

/// Surviving atom count after holding `n_initial` atoms for time t under the
/// jump process equivalent to the rate equations.
int simulate_shot(const RateCoefficients& rates, int n_initial, double t, RandomStream& stream);

int sample_photons(const ReadoutModel& readout, int atom_count, RandomStream& stream);

/// Draws an initial atom number from the populations.
int sample_initial_atoms(const PopulationVector& initial, RandomStream& stream);

struct ShotDataset {
  std::uint64_t seed = 0;
  ExperimentDesign design;
  ReadoutModel readout;
  std::optional<RateCoefficients> true_rates;
  /// photon_counts[i][j]: shot j at design.wait_times[i].
  std::vector<std::vector<int>> photon_counts;

  bool operator==(const ShotDataset&) const;
};

/// Shot (i, j) uses RandomStream::for_shot(seed, i, j); the result does not
/// depend on generation order.
ShotDataset simulate_dataset(const ExperimentDesign& design, const RateCoefficients& rates,
                             const ReadoutModel& readout, std::uint64_t master_seed);

}  // namespace triad
