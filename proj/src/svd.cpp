#include "cocyclelab/svd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace cocyclelab {

namespace {

// One-sided Jacobi: orthogonalize the columns of W by plane rotations,
// accumulating them into V.  On exit W = U * diag(S) and g = W * V^H.
// The rotation for a column pair (i, j) diagonalizes the 2x2 Gram block
//   [ a   c ]      a = |w_i|^2,  b = |w_j|^2,  c = <w_i, w_j>.
//   [ c*  b ]
template <typename Scalar>
bool jacobi_sweeps(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& W,
                   Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& V) {
  using std::abs;
  const Eigen::Index n = W.cols();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double a = W.col(i).squaredNorm();
        const double b = W.col(j).squaredNorm();
        const Scalar c = W.col(i).dot(W.col(j));  // conjugated in the complex case
        const double cabs = abs(c);
        // Product of square roots so the threshold survives severe
        // underflow in the smaller column.
        if (cabs == 0.0 || cabs <= kTolSvd * std::sqrt(a) * std::sqrt(b)) continue;
        // Unit phase of the off-diagonal entry; 1 in the real case.
        const Scalar phase = c / Scalar(cabs);
        const double zeta = (b - a) / (2.0 * cabs);
        const double t = std::isfinite(zeta)
                             ? ((zeta >= 0.0) ? 1.0 : -1.0) /
                                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta))
                             : 0.0;
        if (t == 0.0) continue;  // rotation indistinguishable from identity
        rotated = true;
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        // Columns (i, j) <- (i, j) * [[cs, phase*sn], [-conj(phase)*sn, cs]]
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> wi = W.col(i);
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> wj = W.col(j);
        using Eigen::numext::conj;
        W.col(i) = cs * wi - conj(phase) * sn * wj;
        W.col(j) = phase * sn * wi + cs * wj;
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vi = V.col(i);
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vj = V.col(j);
        V.col(i) = cs * vi - conj(phase) * sn * vj;
        V.col(j) = phase * sn * vi + cs * vj;
      }
    }
    if (!rotated) return true;
  }
  return false;
}

template <typename Scalar>
void decompose(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& g,
               Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& U,
               Eigen::VectorXd& S,
               Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& V) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = g.cols();
  if (g.rows() != n) throw DimMismatch("svd_full: matrix must be square");
  if (!g.allFinite()) throw DomainError("svd_full: entries must be finite");

  Mat W = g;
  Mat Vacc = Mat::Identity(n, n);
  if (!jacobi_sweeps(W, Vacc))
    throw NonConvergence("svd_full: Jacobi sweeps did not converge");

  S.resize(n);
  U.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) S(j) = W.col(j).norm();

  // Descending order, stable on ties.
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return S(a) > S(b); });

  Mat Wsorted(n, n), Vsorted(n, n);
  Eigen::VectorXd Ssorted(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Wsorted.col(j) = W.col(order[static_cast<size_t>(j)]);
    Vsorted.col(j) = Vacc.col(order[static_cast<size_t>(j)]);
    Ssorted(j) = S(order[static_cast<size_t>(j)]);
  }

  const double scale = Ssorted(0);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (Ssorted(j) > scale * 1e-290 && Ssorted(j) > 0.0) {
      U.col(j) = Wsorted.col(j) / Ssorted(j);
    } else {
      // Rank-deficient tail: complete U to an orthonormal basis.
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cand;
      for (Eigen::Index e = 0; e < n; ++e) {
        cand = Mat::Identity(n, n).col(e);
        for (Eigen::Index p = 0; p < j; ++p) cand -= U.col(p).dot(cand) * U.col(p);
        if (cand.norm() > 0.5) break;
      }
      U.col(j) = cand / cand.norm();
    }
  }

  // Sign convention: first entry of each right singular vector with
  // magnitude above kTolSvd made positive (real positive in the complex
  // case), left vector adjusted so g = U S V^H is preserved.
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar pivot = Scalar(0);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(Vsorted(i, j)) > kTolSvd) {
        pivot = Vsorted(i, j);
        break;
      }
    }
    if (pivot != Scalar(0)) {
      const Scalar u = pivot / Scalar(std::abs(pivot));
      Vsorted.col(j) *= Eigen::numext::conj(u);
      U.col(j) *= Eigen::numext::conj(u);
    }
  }

  S = Ssorted;
  V = Vsorted;
}

}  // namespace

SvdResult svd_full(const Eigen::Ref<const Eigen::MatrixXd>& g) {
  SvdResult r;
  Eigen::MatrixXd G = g;
  decompose<double>(G, r.U, r.S, r.V);
  return r;
}

SvdResultC svd_full(const Eigen::Ref<const Eigen::MatrixXcd>& g) {
  SvdResultC r;
  Eigen::MatrixXcd G = g;
  decompose<std::complex<double>>(G, r.U, r.S, r.V);
  return r;
}

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& g) {
  return svd_full(g).S;
}

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXcd>& g) {
  return svd_full(g).S;
}

double operator_norm(const Eigen::Ref<const Eigen::MatrixXd>& g) {
  return singular_values(g)(0);
}

double operator_norm(const Eigen::Ref<const Eigen::MatrixXcd>& g) {
  return singular_values(g)(0);
}

bool numerically_invertible(const Eigen::Ref<const Eigen::MatrixXd>& g, double tol_inv) {
  const Eigen::VectorXd s = singular_values(g);
  return s(s.size() - 1) > tol_inv * s(0);
}

}  // namespace cocyclelab
