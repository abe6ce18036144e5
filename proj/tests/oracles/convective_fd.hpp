#pragma once

// Convective block rebuilt from the bracketed velocity terms of the
// heat-flux law: for a linear velocity field v(x) = e_k (xi . x) the
// gradient is taken by central differences and pushed through
//   -1/2 (G - G^T) q + lambda/2 (G + G^T) q + nu tr(G) q,  G_ij = d_j v_i.
// Column k of the result is the coefficient of v_k.

#include <Eigen/Dense>

namespace oracle {

inline Eigen::Matrix3d velocity_gradient_fd(const Eigen::Vector3d& xi, int k, double h = 1e-3) {
  auto v = [&](const Eigen::Vector3d& x) { return Eigen::Vector3d(Eigen::Vector3d::Unit(k) * xi.dot(x)); };
  const Eigen::Vector3d x0(0.3, -0.7, 1.1);
  Eigen::Matrix3d g;
  for (int j = 0; j < 3; ++j) {
    const Eigen::Vector3d dx = h * Eigen::Vector3d::Unit(j);
    g.col(j) = (v(x0 + dx) - v(x0 - dx)) / (2 * h);
  }
  return g;
}

inline Eigen::Vector3d bracket_terms(const Eigen::Matrix3d& g, const Eigen::Vector3d& q, double lambda,
                                     double nu) {
  return -0.5 * (g - g.transpose()) * q + 0.5 * lambda * (g + g.transpose()) * q + nu * g.trace() * q;
}

inline Eigen::Matrix3d convective_block_fd(const Eigen::Vector3d& xi, const Eigen::Vector3d& q,
                                           double lambda, double nu) {
  Eigen::Matrix3d out;
  for (int k = 0; k < 3; ++k) out.col(k) = bracket_terms(velocity_gradient_fd(xi, k), q, lambda, nu);
  return out;
}

}  // namespace oracle
