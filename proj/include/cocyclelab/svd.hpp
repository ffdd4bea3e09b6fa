#pragma once

#include <Eigen/Dense>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

// Tolerances shared across the dense kernel.  The SVD is a one-sided Jacobi
// iteration with cyclic sweeps; tol_svd is the relative off-diagonal target
// and max_sweeps the cutoff before NonConvergence.
inline constexpr double kTolSvd = 1e-13;
inline constexpr int kMaxSweeps = 30;
inline constexpr double kTolInv = 1e-12;
inline constexpr double kTolGapDefault = 1e-8;
inline constexpr double kTolOrth = 1e-10;

/// Full SVD g = U * diag(S) * V^T with S descending and a deterministic sign
/// convention: the first entry of each right singular vector whose magnitude
/// exceeds kTolSvd is made positive, with the left vector flipped to match.
struct SvdResult {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd V;
};

/// Complex variant, g = U * diag(S) * V^H.
struct SvdResultC {
  Eigen::MatrixXcd U;
  Eigen::VectorXd S;
  Eigen::MatrixXcd V;
};

SvdResult svd_full(const Eigen::Ref<const Eigen::MatrixXd>& g);
SvdResultC svd_full(const Eigen::Ref<const Eigen::MatrixXcd>& g);

/// Singular values only, descending.
Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& g);
Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXcd>& g);

/// Operator (spectral) norm.
double operator_norm(const Eigen::Ref<const Eigen::MatrixXd>& g);
double operator_norm(const Eigen::Ref<const Eigen::MatrixXcd>& g);

/// True when s_m(g) > tol_inv * s_1(g).
bool numerically_invertible(const Eigen::Ref<const Eigen::MatrixXd>& g,
                            double tol_inv = kTolInv);

}  // namespace cocyclelab
