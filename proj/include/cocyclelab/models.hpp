#pragma once

#include <string>

#include "cocyclelab/cocycle.hpp"

namespace cocyclelab {

// ---------------------------------------------------------------------------
// Complex-valued trig-polynomial cocycles (no conjugate-symmetry constraint);
// used as inputs to realification.
// ---------------------------------------------------------------------------

struct ComplexCocycle {
  TrigPolyMat entries;
  Frequency frequency;
  double r;

  int dim() const { return entries.m; }
  Eigen::MatrixXcd eval(const Eigen::VectorXd& x) const;
};

/// Entrywise realification of the Fourier coefficients: each complex entry
/// f becomes the 2x2 block [[Re f, -Im f], [Im f, Re f]] of real trig
/// polynomials; evaluation commutes with realify() on matrices.
Cocycle realify_cocycle(const ComplexCocycle& A);

// ---------------------------------------------------------------------------
// Weighted band lattice transfer cocycles.  The block three-term recursion
//   W_{n+1} psi_{n+1} = (lambda D_n - R_n - E) psi_n - W_n^T psi_{n-1}
// gives the 2 d_band-dimensional transfer matrix
//   A(x) = [ W(x+omega)^{-1} (lambda D(x) - R(x) - E I)   -W(x+omega)^{-1} W(x)^T ]
//          [ I                                             0                     ]
// so that (psi_{n+1}, psi_n) = A(x + n omega) (psi_n, psi_{n-1}).  W^{-1} of a
// trig polynomial is not one, so the product form is kept as a composite
// evaluator behind the same Cocycle interface.
// ---------------------------------------------------------------------------

struct JacobiData {
  int d_band;      // block size
  TrigPolyMat W;   // invertible on the torus (checked at cocycle build)
  TrigPolyMat R;   // symmetric
  TrigPolyMat D;   // symmetric
  double lambda;   // coupling, > 0
  double E;        // energy
  double r;        // analyticity width
};

Cocycle jacobi_cocycle(const JacobiData& data, const Frequency& omega);

/// SL(2,R) cocycle [[2 lambda cos(2 pi x) - E, -1], [1, 0]].
Cocycle almost_mathieu(double lambda, double E, const Frequency& omega, double r = 0.25);

/// Documented fixtures: "const-diag", "rotation", "diag-dominant-gap",
/// "am-lambda3", "torus2d-demo".  Throws UnknownName otherwise.
Cocycle sample_gallery(const std::string& name);

/// Names accepted by sample_gallery.
std::vector<std::string> gallery_names();

/// Golden mean (sqrt(5) - 1) / 2, the default 1-d gallery frequency.
double golden_mean();

/// JacobiData JSON: the cocycle entry format plus
/// {"d_band", "r", "omega": [...], "lambda", "E", "W": ..., "R": ..., "D": ...}.
std::pair<JacobiData, Frequency> load_jacobi_json(const std::string& text);
std::pair<JacobiData, Frequency> load_jacobi_file(const std::string& path);

}  // namespace cocyclelab
