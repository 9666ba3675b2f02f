#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "triad/rates.hpp"
#include "triad/stochastic.hpp"

namespace triad {

/// Photon-count histogram: counts[c] shots recorded c photons.
struct PhotonHistogram {
  Eigen::VectorXd counts;

  double total() const { return counts.sum(); }

  /// Bins photon counts into `bins` bins; larger counts land in the last bin.
  static PhotonHistogram from_counts(std::span<const int> photons, Eigen::Index bins);
};

enum class MixtureObjective {
  MaximumLikelihood,  ///< multinomial likelihood (default)
  LeastSquares,       ///< squared error of normalised histogram
};

/// Atom-number probabilities behind one photon histogram, indexed by atom
/// count 0..3.
struct OccupancyEstimate {
  Eigen::Vector4d weights = Eigen::Vector4d::Zero();
  Eigen::Vector4d standard_errors = Eigen::Vector4d::Zero();
  /// Full covariance of the weights (rank <= 3 on the simplex). Absent when
  /// the estimate carries no uncertainty information.
  std::optional<Eigen::Matrix4d> covariance;
  double shots = 0.0;
  /// Templates were identical or the information matrix was singular.
  bool ill_conditioned = false;
  /// Groups of identical templates; the merged weight sits on the first member.
  std::vector<std::vector<int>> merged_groups;

  PopulationVector populations() const { return PopulationVector::from_atom_counts(weights); }
};

OccupancyEstimate decompose_histogram(const PhotonHistogram& hist,
                                      const ReadoutTemplates& templates,
                                      MixtureObjective objective = MixtureObjective::MaximumLikelihood);

struct TimedOccupancy {
  double time;  // s
  OccupancyEstimate estimate;
};

struct FitOptions {
  bool fix_gamma1 = false;  ///< hold gamma1 at zero
  bool tie_gamma2 = false;  ///< gamma2_tilde == gamma2
  std::optional<PopulationVector> fixed_initials;
  /// Upper end of the rate search box; the start grid spans [1e-2, 1e2].
  double max_rate = 1e4;
};

enum class RateParam { Gamma1 = 0, Gamma2 = 1, Gamma2Tilde = 2, Gamma3 = 3 };

struct Interval {
  double lower;
  double upper;
};

struct RateFit {
  RateCoefficients rates;
  PopulationVector fitted_initials;
  /// Norm of the whitened residual vector.
  double residual_norm = 0.0;
  std::size_t residual_count = 0;
  std::size_t free_parameters = 0;
  /// Standard errors in RateParam order; zero for fixed parameters.
  std::array<double, 4> rate_errors{};
  /// 95% intervals in RateParam order.
  std::array<Interval, 4> rate_intervals{};
  /// Standard errors of r3, r2, r1, r0 at t = 0.
  std::array<double, 4> initial_errors{};
  /// Fixed-parameter mask in RateParam order.
  std::array<bool, 4> fixed{};
  /// False where the data carry no information about the rate.
  std::array<bool, 4> identifiable{true, true, true, true};
  FitOptions options;
  int starts_tried = 0;
  int starts_converged = 0;

  double rate(RateParam p) const;
};

/// Weighted least squares of the rate-equation solution against the series,
/// over the rates and the t = 0 populations. Deterministic multi-start.
RateFit fit_rates(std::span<const TimedOccupancy> series, const FitOptions& options = {});

struct ScalingPoint {
  double omega_perp;  // rad/s
  double gamma2;      // s^-1
  double sigma;       // s^-1
};

struct ScalingCandidate {
  int m;
  double exponent;
  double amplitude;  // s^-1 (rad/s)^-exponent
  double rss;        // weighted residual sum of squares
  double aic;
};

struct ScalingFit {
  int selected_m;
  double amplitude;
  std::vector<ScalingCandidate> candidates;

  const ScalingCandidate& selected() const;
};

/// For each m, the closed-form weighted fit of A in gamma2 = A omega^(2m+3/2);
/// selects the smallest weighted residual sum.
ScalingFit fit_scaling(std::span<const ScalingPoint> points,
                       std::span<const int> m_candidates = std::array{0, 1, 2});

/// "3/2", "7/2", "11/2".
std::string exponent_label(int m);

}  // namespace triad
