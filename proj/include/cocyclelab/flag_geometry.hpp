#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cocyclelab/matrix_core.hpp"
#include "cocyclelab/signature.hpp"

namespace cocyclelab {

/// Point of the Grassmannian Gr(m, k): an m x k column-orthonormal basis.
struct Subspace {
  Eigen::MatrixXd basis;

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }
};

/// Validates orthonormality (tol_orth) and wraps the basis.
Subspace make_subspace(const Eigen::Ref<const Eigen::MatrixXd>& basis);

/// Orthonormalizes an arbitrary full-rank spanning set first.
Subspace subspace_from_span(const Eigen::Ref<const Eigen::MatrixXd>& span);

/// Nested flag F_1 c ... c F_k with dim F_j = tau_j, stored as one
/// m x tau_k orthonormal frame whose first tau_j columns span F_j.
struct Flag {
  Signature tau;
  Eigen::MatrixXd frame;

  Subspace level(int j) const {
    return Subspace{frame.leftCols(tau.position(j))};
  }
};

Flag make_flag(const Signature& tau, const Eigen::Ref<const Eigen::MatrixXd>& frame);

// ---------------------------------------------------------------------------
// Metrics.  The projective metric is normalized to diameter one, so on every
// Grassmannian level  alpha = cos(pi/2 * d)  and  d = (2/pi) * arccos(alpha).
// Flag distance is the max over levels; flag correlation the min.
// ---------------------------------------------------------------------------

/// |det(B_U^T B_V)|, clamped to [0,1].
double grassmann_correlation(const Subspace& U, const Subspace& V);

/// (2/pi) * arccos of the correlation; takes values in [0,1].
double grassmann_distance(const Subspace& U, const Subspace& V);

struct FlagMetrics {
  double d;      // max_j d(F_j, G_j)
  double alpha;  // min_j alpha(F_j, G_j)
  double angle;  // (pi/2) * d
};

FlagMetrics flag_metrics(const Flag& F, const Flag& G);
double flag_distance(const Flag& F, const Flag& G);
double flag_correlation(const Flag& F, const Flag& G);

/// Distance from G to the orthogonal flag hyperplane of F, computed level by
/// level with the complementarity identity d(G_j, Sigma(F_j)) = 1 - d(F_j, G_j);
/// satisfies alpha(F, G) = sin(pi/2 * result).
double critical_distance(const Flag& F, const Flag& G);

// ---------------------------------------------------------------------------
// Most expanding flags and the flag action.
// ---------------------------------------------------------------------------

struct ExpandingFlags {
  Flag vminus;  // spans of leading right singular vectors
  Flag vplus;   // spans of leading left singular vectors
};

/// Requires a tau-gap pattern at tol_gap (throws NoGap otherwise).
ExpandingFlags most_expanding_flags(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                    const Signature& tau,
                                    double tol_gap = kTolGapDefault);

/// phi_g(F): applies g to the nested frame and re-orthonormalizes level by
/// level (modified Gram-Schmidt with one re-pass).
Flag flag_action(const Eigen::Ref<const Eigen::MatrixXd>& g, const Flag& F);

/// W (-) V := W `intersect` V^perp for V c W (throws NotNested otherwise);
/// result has dim W - dim V.
Subspace ominus(const Subspace& V, const Subspace& W);

// ---------------------------------------------------------------------------
// Expansivity factors for a pair of matrices with tau-gap patterns:
//   alpha_tau(g, g') = alpha(v+_tau(g), v-_tau(g'))
//   beta_tau(g, g')  = sqrt(sigma_tau(g)^2 (+) alpha^2 (+) sigma_tau(g')^2)
// with the per-level variants alpha_{tau_j}, beta_{tau_j} alongside.
// ---------------------------------------------------------------------------

struct ExpansivityFactors {
  double alpha;  // flag-level correlation (min over positions)
  double beta;
  std::vector<double> alpha_at;  // per position tau_j
  std::vector<double> beta_at;
};

ExpansivityFactors expansivity_factors(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                       const Eigen::Ref<const Eigen::MatrixXd>& gp,
                                       const Signature& tau,
                                       double tol_gap = kTolGapDefault);

/// Operator norm of pi_v - pi_u for unit vectors; equals |sin angle(u,v)|.
double projection_difference_norm(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  const Eigen::Ref<const Eigen::VectorXd>& v);

// ---------------------------------------------------------------------------
// Recovering subspaces from wedge vectors.  The top singular vector w of a
// rescaled wedge_j product is (numerically) a decomposable j-vector; the
// spanned subspace is the kernel of u -> u ^ w.  This stays accurate at
// scales where the product matrix itself cannot resolve the small singular
// values.
// ---------------------------------------------------------------------------

/// Orthonormal basis (m x level) of the subspace carried by a unit
/// decomposable wedge vector over combinations_colex(m, level).
Eigen::MatrixXd subspace_from_wedge(const Eigen::Ref<const Eigen::VectorXd>& w, int m,
                                    int level);

/// Nested orthonormal frame through per-position level bases (each m x tau_j,
/// nearly nested); earlier levels are kept and later ones contribute their
/// orthogonal complement.
Flag flag_from_level_bases(const Signature& tau,
                           const std::vector<Eigen::MatrixXd>& level_bases);

}  // namespace cocyclelab
