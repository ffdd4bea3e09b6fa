#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cocyclelab/signature.hpp"
#include "cocyclelab/svd.hpp"

namespace cocyclelab {

// ---------------------------------------------------------------------------
// Singular value formulas.  Every formula used here is a product/ratio of the
// top products p_j(g) = s_1(g)...s_j(g) = |wedge_j g|, so each one carries an
// integer coefficient vector over (log p_1, ..., log p_m):
//   s_j      = p_j / p_{j-1}
//   pi_{t,j} = p_{t_j} / p_{t_{j-1}}
//   rho_q    = s_q / s_{q+1} = p_q^2 / (p_{q-1} p_{q+1}),  sigma_q = 1/rho_q
// ---------------------------------------------------------------------------

struct SingularValue {
  int j;  // 1..m
};
struct TopProduct {
  int j;  // p_j, 1..m
};
struct BlockProduct {
  Signature tau;
  int j;  // pi_{tau,j}, 1..k
};
struct RatioRho {
  int position;  // rho at position q: s_q / s_{q+1}, 1..m-1
};
struct RatioSigma {
  int position;  // sigma at position q: s_{q+1} / s_q
};

using SvFormula = std::variant<SingularValue, TopProduct, BlockProduct, RatioRho, RatioSigma>;

/// Coefficients c_1..c_m with log s(g) = sum_j c_j log p_j(g).
std::vector<int> svf_log_coeffs(const SvFormula& f, int m);

/// log s(g) from precomputed log p_j values (index 0 holds log p_1).
double eval_svf_log(const SvFormula& f, const Eigen::VectorXd& logp);

/// Evaluates the formula on a matrix through its SVD.  Ratio formulas need a
/// numerically invertible input (throws SingularInput otherwise).
double eval_svf(const SvFormula& f, const Eigen::Ref<const Eigen::MatrixXd>& g);

/// Short parseable name, e.g. "s1", "p2", "pi1", "rho3", "sigma1".
std::string svf_name(const SvFormula& f);

// ---------------------------------------------------------------------------
// Exterior powers.
// ---------------------------------------------------------------------------

/// Index sets {0 <= i_1 < ... < i_j < m} in colexicographic order (compared
/// from the largest element down).  This fixed order makes the minor layout
/// of exterior_power bit-stable.
std::vector<std::vector<int>> combinations_colex(int m, int j);

/// j-th exterior power: entry (I, J) is the minor det g(I, J), index sets in
/// colexicographic order.  Result has dimension C(m, j).
Eigen::MatrixXd exterior_power(const Eigen::Ref<const Eigen::MatrixXd>& g, int j);
Eigen::MatrixXcd exterior_power(const Eigen::Ref<const Eigen::MatrixXcd>& g, int j);

/// u ^ w for w expressed over combinations_colex(m, j); result over
/// combinations_colex(m, j + 1).
Eigen::VectorXd wedge_vector_insert(const Eigen::Ref<const Eigen::VectorXd>& u,
                                    const Eigen::Ref<const Eigen::VectorXd>& w, int m,
                                    int j);

// ---------------------------------------------------------------------------
// Gap reports.
// ---------------------------------------------------------------------------

struct GapReport {
  double rho_min = 0.0;    // min_j rho_{tau_j}(g)
  double sigma_max = 0.0;  // max_j sigma_{tau_j}(g), = 1 / rho_min
  std::vector<double> rho;  // per position
  bool has_gap = false;    // every rho_{tau_j} > 1 + tol_gap
  double tol_gap = kTolGapDefault;
};

GapReport gap_report(const Eigen::Ref<const Eigen::MatrixXd>& g, const Signature& tau,
                     double tol_gap = kTolGapDefault);

/// Gap report from a (descending) vector of log singular values; used when
/// the matrix itself only exists in rescaled form.
GapReport gap_report_from_logs(const Eigen::VectorXd& log_s, const Signature& tau,
                               double tol_gap = kTolGapDefault);

// ---------------------------------------------------------------------------
// Realification and the exotic operation.
// ---------------------------------------------------------------------------

/// GL(m,C) -> GL(2m,R): each entry a+ib becomes [[a,-b],[b,a]].  Singular
/// values are duplicated: s_{2i-1} = s_{2i} = s_i(g).
Eigen::MatrixXd realify(const Eigen::Ref<const Eigen::MatrixXcd>& g);

/// a (+) b := a + b - a b on [0,1]; x -> 1-x is an isomorphism onto ([0,1],*).
double oplus(double a, double b);

}  // namespace cocyclelab
