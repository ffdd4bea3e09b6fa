#pragma once

#include <random>

#include <Eigen/Dense>

#include "cocyclelab/flag_geometry.hpp"
#include "cocyclelab/signature.hpp"

namespace cocyclelab {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd random_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = normal(rng);
  return M;
}

inline Eigen::MatrixXcd random_gaussian_complex(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = {normal(rng), normal(rng)};
  return M;
}

/// Haar-ish random rotation via QR of a Gaussian with positive R diagonal.
inline Eigen::MatrixXd random_orthogonal(int m, Rng& rng) {
  const Eigen::MatrixXd G = random_gaussian(m, m, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

/// Product of Givens rotations in random planes, each with angle bounded by
/// max_angle; stays close to the identity for small angles.
inline Eigen::MatrixXd random_small_rotation(int m, double max_angle, Rng& rng) {
  std::uniform_real_distribution<double> unif(-max_angle, max_angle);
  std::uniform_int_distribution<int> pick(0, m - 1);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(m, m);
  const int planes = m;  // a few planes give a generic small rotation
  for (int t = 0; t < planes; ++t) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    const double th = unif(rng);
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(m, m);
    G(i, i) = std::cos(th);
    G(j, j) = std::cos(th);
    G(i, j) = -std::sin(th);
    G(j, i) = std::sin(th);
    Q = G * Q;
  }
  return Q;
}

/// Haar-distributed random flag of the given signature.
inline Flag random_flag(const Signature& tau, Rng& rng) {
  const Eigen::MatrixXd Q = random_orthogonal(tau.ambient_dim(), rng);
  return Flag{tau, Q.leftCols(tau.top())};
}

inline double random_uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  return unif(rng);
}

}  // namespace cocyclelab
