#include "triad/rates.hpp"

#include <stdexcept>
#include <string>

namespace triad {

bool PopulationVector::valid(double tol) const {
  if (!v_.allFinite()) return false;
  if ((v_.array() < -tol).any() || (v_.array() > 1.0 + tol).any()) return false;
  return std::abs(v_.sum() - 1.0) <= tol;
}

void PopulationVector::validate(double tol) const {
  if (!valid(tol))
    throw std::invalid_argument("population vector must lie on the probability simplex (sum " +
                                std::to_string(v_.sum()) + ")");
}

PopulationVector PopulationVector::clamped(double tol) const {
  Eigen::Vector4d c = v_;
  for (auto& x : c)
    if (x < 0.0 && x >= -tol) x = 0.0;
  return PopulationVector(c);
}

}  // namespace triad
