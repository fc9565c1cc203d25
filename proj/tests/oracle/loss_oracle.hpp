#pragma once

// Brute-force reference for the trajectory loss: explicit loops, matrix
// logarithm from Eigen's MatrixFunctions rather than the closed form.

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

struct Sphere {
  Eigen::Vector3d c;
  double r;
};

inline double rotational_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d rel = a.transpose() * b;
  const Eigen::Matrix3d lg = rel.log();
  double fro = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fro += lg(i, j) * lg(i, j);
  return std::sqrt(fro) / std::sqrt(2.0);
}

inline double proximity(const std::vector<Eigen::Vector3d>& pts, const std::vector<Sphere>& obs) {
  double nu = 0.0;
  for (const auto& o : obs) {
    double s = 0.0;
    for (const auto& p : pts) {
      const double dx = p(0) - o.c(0), dy = p(1) - o.c(1), dz = p(2) - o.c(2);
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      s += std::max(1.0 - d / o.r, 0.0);
    }
    nu += s / static_cast<double>(pts.size());
  }
  return nu;
}

inline double total_loss(const std::vector<Eigen::Vector3d>& pts, const std::vector<Eigen::Matrix3d>& rots,
                         const std::vector<Sphere>& obs, const Eigen::Matrix3d& q, double mu, double lambda) {
  const double nu = proximity(pts, obs);
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const Eigen::Vector3d dp = pts[j + 1] - pts[j];
    double quad = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) quad += dp(a) * q(a, b) * dp(b);
    const double dr = rotational_distance(rots[j], rots[j + 1]);
    sum += (quad + mu * dr * dr) * (1.0 + lambda * nu);
  }
  return sum;
}

}  // namespace oracle
