#include "cocyclelab/flag_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cocyclelab {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_orthonormal(const Eigen::MatrixXd& B, const char* what) {
  if (B.cols() > B.rows()) throw DimMismatch(std::string(what) + ": more columns than rows");
  const Eigen::MatrixXd G = B.transpose() * B;
  const double err = (G - Eigen::MatrixXd::Identity(B.cols(), B.cols())).norm();
  if (err > kTolOrth * std::max<double>(1.0, std::sqrt(double(B.cols()))))
    throw DomainError(std::string(what) + ": basis not orthonormal");
}

// Modified Gram-Schmidt with one re-pass; keeps the span of every prefix.
Eigen::MatrixXd mgs(const Eigen::MatrixXd& M) {
  Eigen::MatrixXd Q = M;
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
    const double n = Q.col(j).norm();
    if (n < 1e-300) throw SingularInput("orthonormalization: rank deficient input");
    Q.col(j) /= n;
  }
  return Q;
}

}  // namespace

Subspace make_subspace(const Eigen::Ref<const Eigen::MatrixXd>& basis) {
  Eigen::MatrixXd B = basis;
  check_orthonormal(B, "make_subspace");
  return Subspace{std::move(B)};
}

Subspace subspace_from_span(const Eigen::Ref<const Eigen::MatrixXd>& span) {
  return Subspace{mgs(span)};
}

Flag make_flag(const Signature& tau, const Eigen::Ref<const Eigen::MatrixXd>& frame) {
  if (frame.rows() != tau.ambient_dim() || frame.cols() != tau.top())
    throw SignatureMismatch("make_flag: frame shape does not match signature");
  Eigen::MatrixXd F = frame;
  check_orthonormal(F, "make_flag");
  return Flag{tau, std::move(F)};
}

namespace {

// Correlation and normalized distance in one pass.  Away from coincidence
// the Gram determinant is accurate; near alpha = 1 the arccos would lose
// every digit, so there the complement residual C = V - U (U^T V) supplies
// the principal-angle sines (accurate near zero), the deficit q = 1 - alpha
// accumulates through 1 - prod cos = (+) of the per-angle deficits, and the
// angle follows from arccos(1 - q) = 2 asin(sqrt(q / 2)).
struct Correlation {
  double alpha;
  double distance;
};

Correlation correlation_impl(const Subspace& U, const Subspace& V) {
  if (U.dim() != V.dim()) throw DimMismatch("grassmann correlation: dim mismatch");
  if (U.ambient_dim() != V.ambient_dim())
    throw DimMismatch("grassmann correlation: ambient mismatch");
  if (U.dim() == 0) return {1.0, 0.0};
  const Eigen::MatrixXd M = U.basis.transpose() * V.basis;
  const double det = std::clamp(std::abs(M.determinant()), 0.0, 1.0);
  if (det < 0.9) return {det, (2.0 / kPi) * std::acos(det)};

  const Eigen::MatrixXd C = V.basis - U.basis * M;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(U.ambient_dim(), U.ambient_dim());
  P.leftCols(C.cols()) = C;
  const Eigen::VectorXd sines = singular_values(P);
  double q = 0.0;  // 1 - prod cos(theta_i)
  for (Eigen::Index i = 0; i < V.dim(); ++i) {
    const double s = std::min(1.0, sines(i));
    const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
    const double deficit = s * s / (1.0 + c);
    q = q + deficit - q * deficit;
  }
  q = std::clamp(q, 0.0, 1.0);
  const double angle = 2.0 * std::asin(std::sqrt(q / 2.0));
  return {1.0 - q, (2.0 / kPi) * angle};
}

}  // namespace

double grassmann_correlation(const Subspace& U, const Subspace& V) {
  return correlation_impl(U, V).alpha;
}

double grassmann_distance(const Subspace& U, const Subspace& V) {
  return correlation_impl(U, V).distance;
}

FlagMetrics flag_metrics(const Flag& F, const Flag& G) {
  if (F.tau != G.tau) throw SignatureMismatch("flag_metrics: signature mismatch");
  double d = 0.0, alpha = 1.0;
  for (int j = 1; j <= F.tau.k(); ++j) {
    const Correlation c = correlation_impl(F.level(j), G.level(j));
    d = std::max(d, c.distance);
    alpha = std::min(alpha, c.alpha);
  }
  return FlagMetrics{d, alpha, (kPi / 2.0) * d};
}

double flag_distance(const Flag& F, const Flag& G) { return flag_metrics(F, G).d; }
double flag_correlation(const Flag& F, const Flag& G) { return flag_metrics(F, G).alpha; }

double critical_distance(const Flag& F, const Flag& G) {
  if (F.tau != G.tau) throw SignatureMismatch("critical_distance: signature mismatch");
  double dmin = 1.0;
  for (int j = 1; j <= F.tau.k(); ++j)
    dmin = std::min(dmin, 1.0 - grassmann_distance(F.level(j), G.level(j)));
  return dmin;
}

ExpandingFlags most_expanding_flags(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                    const Signature& tau, double tol_gap) {
  const GapReport rep = gap_report(g, tau, tol_gap);
  if (!rep.has_gap)
    throw NoGap("most_expanding_flags: no tau-gap pattern at tol_gap");
  const SvdResult svd = svd_full(g);
  const int w = tau.top();
  return ExpandingFlags{Flag{tau, svd.V.leftCols(w)}, Flag{tau, svd.U.leftCols(w)}};
}

Flag flag_action(const Eigen::Ref<const Eigen::MatrixXd>& g, const Flag& F) {
  if (g.rows() != F.tau.ambient_dim() || g.cols() != g.rows())
    throw DimMismatch("flag_action: matrix shape mismatch");
  if (!numerically_invertible(g)) throw SingularInput("flag_action: singular matrix");
  return Flag{F.tau, mgs(g * F.frame)};
}

Subspace ominus(const Subspace& V, const Subspace& W) {
  if (V.ambient_dim() != W.ambient_dim()) throw DimMismatch("ominus: ambient mismatch");
  if (V.dim() > W.dim()) throw NotNested("ominus: dim V exceeds dim W");
  // Nesting check: every basis vector of V must lie in span W.
  const Eigen::MatrixXd resid =
      V.basis - W.basis * (W.basis.transpose() * V.basis);
  if (V.dim() > 0 && resid.colwise().norm().maxCoeff() > 1e-8)
    throw NotNested("ominus: V is not contained in W");

  const int out_dim = W.dim() - V.dim();
  if (out_dim == 0) return Subspace{Eigen::MatrixXd(V.ambient_dim(), 0)};

  // Project W's basis onto V-perp; the nonzero left singular vectors of the
  // result span W `intersect` V^perp.
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(V.ambient_dim(), V.ambient_dim());
  C.leftCols(W.dim()) = W.basis;
  if (V.dim() > 0)
    C.leftCols(W.dim()) -= V.basis * (V.basis.transpose() * W.basis);
  const SvdResult svd = svd_full(C);
  return Subspace{svd.U.leftCols(out_dim)};
}

ExpansivityFactors expansivity_factors(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                       const Eigen::Ref<const Eigen::MatrixXd>& gp,
                                       const Signature& tau, double tol_gap) {
  const GapReport rg = gap_report(g, tau, tol_gap);
  if (!rg.has_gap) throw NoGap("expansivity_factors: g lacks the tau-gap");
  const GapReport rp = gap_report(gp, tau, tol_gap);
  if (!rp.has_gap) throw NoGap("expansivity_factors: g' lacks the tau-gap");

  const SvdResult sg = svd_full(g);
  const SvdResult sp = svd_full(gp);

  ExpansivityFactors out;
  out.alpha_at.reserve(static_cast<size_t>(tau.k()));
  out.beta_at.reserve(static_cast<size_t>(tau.k()));
  double alpha_min = 1.0;
  for (int j = 1; j <= tau.k(); ++j) {
    const int q = tau.position(j);
    const Subspace plus{sg.U.leftCols(q)};
    const Subspace minus{sp.V.leftCols(q)};
    const double a = grassmann_correlation(plus, minus);
    const double sigma_g = 1.0 / rg.rho[static_cast<size_t>(j) - 1];
    const double sigma_p = 1.0 / rp.rho[static_cast<size_t>(j) - 1];
    const double b = std::sqrt(oplus(oplus(sigma_g * sigma_g, a * a), sigma_p * sigma_p));
    out.alpha_at.push_back(a);
    out.beta_at.push_back(b);
    alpha_min = std::min(alpha_min, a);
  }
  out.alpha = alpha_min;
  const double sg2 = rg.sigma_max * rg.sigma_max;
  const double sp2 = rp.sigma_max * rp.sigma_max;
  out.beta = std::sqrt(oplus(oplus(sg2, alpha_min * alpha_min), sp2));
  return out;
}

double projection_difference_norm(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) throw DimMismatch("projection_difference_norm: size mismatch");
  if (std::abs(u.norm() - 1.0) > 1e-12 || std::abs(v.norm() - 1.0) > 1e-12)
    throw NotUnit("projection_difference_norm: inputs must be unit vectors");
  const Eigen::MatrixXd diff = v * v.transpose() - u * u.transpose();
  return operator_norm(diff);
}

Eigen::MatrixXd subspace_from_wedge(const Eigen::Ref<const Eigen::VectorXd>& w, int m,
                                    int level) {
  if (level < 1 || level >= m)
    throw DomainError("subspace_from_wedge: level must lie in [1, m)");
  if (level == 1) {
    if (w.size() != m) throw DimMismatch("subspace_from_wedge: level-1 vector size");
    return w / w.norm();
  }
  Eigen::MatrixXd T(static_cast<Eigen::Index>(combinations_colex(m, level + 1).size()), m);
  for (int i = 0; i < m; ++i)
    T.col(i) = wedge_vector_insert(Eigen::VectorXd::Unit(m, i), w, m, level);
  // Kernel of u -> u ^ w via the small symmetric Gram matrix.
  const Eigen::MatrixXd G = T.transpose() * T;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  return eig.eigenvectors().leftCols(level);  // ascending eigenvalues
}

Flag flag_from_level_bases(const Signature& tau,
                           const std::vector<Eigen::MatrixXd>& level_bases) {
  const int m = tau.ambient_dim();
  if (level_bases.size() != static_cast<size_t>(tau.k()))
    throw SignatureMismatch("flag_from_level_bases: one basis per position needed");
  Eigen::MatrixXd frame(m, tau.top());
  int filled = 0;
  for (int j = 1; j <= tau.k(); ++j) {
    const Eigen::MatrixXd& B = level_bases[static_cast<size_t>(j) - 1];
    if (B.rows() != m || B.cols() != tau.position(j))
      throw DimMismatch("flag_from_level_bases: basis shape mismatch");
    const int want = tau.position(j) - filled;
    Eigen::MatrixXd C = B;
    if (filled > 0) {
      const auto prev = frame.leftCols(filled);
      C -= prev * (prev.transpose() * B);
    }
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
    P.leftCols(C.cols()) = C;
    const SvdResult svd = svd_full(P);
    frame.middleCols(filled, want) = svd.U.leftCols(want);
    filled += want;
  }
  // One orthonormalization pass cleans up round-off across levels.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, tau.top());
  const Eigen::MatrixXd R = qr.matrixQR().topRows(tau.top()).triangularView<Eigen::Upper>();
  for (int c = 0; c < tau.top(); ++c)
    if (R(c, c) < 0) Q.col(c) = -Q.col(c);
  return Flag{tau, Q};
}

}  // namespace cocyclelab
