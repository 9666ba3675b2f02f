#pragma once

#include <cmath>
#include <initializer_list>

#include <Eigen/Core>

namespace triad {

/// Linear loss rates of the four-state model (s^-1).
///
/// `gamma2_tilde` is the pair-loss rate acting on the three-atom state; it
/// coincides with `gamma2` for an uncorrelated thermal gas.
template <typename Scalar>
struct BasicRateCoefficients {
  Scalar gamma1{0};
  Scalar gamma2{0};
  Scalar gamma2_tilde{0};
  Scalar gamma3{0};

  Scalar largest() const {
    using std::max;
    return max(max(gamma1, gamma2), max(gamma2_tilde, gamma3));
  }

  bool valid() const {
    using std::isfinite;
    for (Scalar g : {gamma1, gamma2, gamma2_tilde, gamma3})
      if (!(g >= Scalar(0)) || !isfinite(g)) return false;
    return true;
  }

  template <typename NewScalar>
  BasicRateCoefficients<NewScalar> cast() const {
    return {NewScalar(gamma1), NewScalar(gamma2), NewScalar(gamma2_tilde), NewScalar(gamma3)};
  }

  bool operator==(const BasicRateCoefficients&) const = default;
};

using RateCoefficients = BasicRateCoefficients<double>;

/// Probabilities of observing 3, 2, 1, 0 atoms, stored in that order.
///
/// The (r3, r2, r1, r0) order matches the generator matrix; use the named
/// accessors or `by_atom_count` at boundaries that index by atom number.
class PopulationVector {
 public:
  PopulationVector() = default;
  PopulationVector(double r3, double r2, double r1, double r0) : v_(r3, r2, r1, r0) {}
  explicit PopulationVector(const Eigen::Vector4d& state_order) : v_(state_order) {}

  static PopulationVector from_atom_counts(const Eigen::Vector4d& p) {
    return PopulationVector(p[3], p[2], p[1], p[0]);
  }

  double r3() const { return v_[0]; }
  double r2() const { return v_[1]; }
  double r1() const { return v_[2]; }
  double r0() const { return v_[3]; }

  /// Probability of `k` atoms, k in 0..3.
  double atoms(int k) const { return v_[3 - k]; }

  const Eigen::Vector4d& vector() const { return v_; }
  Eigen::Vector4d by_atom_count() const { return v_.reverse(); }

  double sum() const { return v_.sum(); }

  /// Components in [0, 1] and summing to 1 within `tol`.
  bool valid(double tol = 1e-9) const;

  /// Throws std::invalid_argument when !valid(tol).
  void validate(double tol = 1e-9) const;

  /// Zeroes components in [-tol, 0).
  PopulationVector clamped(double tol = 1e-12) const;

 private:
  Eigen::Vector4d v_ = Eigen::Vector4d::Zero();
};

}  // namespace triad
