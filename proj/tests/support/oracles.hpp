#pragma once

// Reference implementations used only by the tests. They deliberately avoid
// the library's own quadrature and closed forms.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;

  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

/// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int panels = 64, int order = 20) {
  static thread_local GaussLegendre gl(20);
  if (static_cast<int>(gl.x.size()) != order) gl = GaussLegendre(order);
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < order; ++i) sum += gl.w[i] * f(mid + 0.5 * h * gl.x[i]);
  }
  return 0.5 * h * sum;
}

/// Tensor-product Gauss-Legendre over the box |r_i| <= half_width[i].
inline double integrate_box(const std::function<double(const Eigen::Vector3d&)>& f,
                            const Eigen::Vector3d& half_width, int panels = 16, int order = 16) {
  GaussLegendre gl(order);
  std::vector<double> nodes[3], weights[3];
  for (int axis = 0; axis < 3; ++axis) {
    const double a = -half_width[axis];
    const double h = 2.0 * half_width[axis] / panels;
    for (int p = 0; p < panels; ++p)
      for (int i = 0; i < order; ++i) {
        nodes[axis].push_back(a + (p + 0.5) * h + 0.5 * h * gl.x[i]);
        weights[axis].push_back(0.5 * h * gl.w[i]);
      }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes[0].size(); ++i)
    for (std::size_t j = 0; j < nodes[1].size(); ++j)
      for (std::size_t k = 0; k < nodes[2].size(); ++k)
        sum += weights[0][i] * weights[1][j] * weights[2][k] *
               f(Eigen::Vector3d(nodes[0][i], nodes[1][j], nodes[2][k]));
  return sum;
}

/// exp(G t) r by Pade scaling-and-squaring.
inline Eigen::Vector4d propagate(const Eigen::Matrix4d& generator, const Eigen::Vector4d& r,
                                 double t) {
  const Eigen::Matrix4d gt = generator * t;
  const Eigen::Matrix4d e = gt.exp();
  return e * r;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace oracle
