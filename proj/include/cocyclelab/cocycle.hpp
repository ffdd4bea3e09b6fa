#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cocyclelab/matrix_core.hpp"

namespace cocyclelab {

// ---------------------------------------------------------------------------
// Base dynamics: translation by omega on the d-torus.
// ---------------------------------------------------------------------------

struct Frequency {
  Eigen::VectorXd omega;  // components reduced mod 1 into [0, 1)

  explicit Frequency(Eigen::VectorXd w) : omega(std::move(w)) {
    for (Eigen::Index i = 0; i < omega.size(); ++i)
      omega(i) -= std::floor(omega(i));
  }
  int d() const { return static_cast<int>(omega.size()); }
};

/// Distance from y to the nearest integer.
inline double torus_norm(double y) { return std::abs(y - std::round(y)); }

// ---------------------------------------------------------------------------
// Trigonometric polynomials on T^d with complex coefficients,
//   f(z) = sum_k c_k exp(2 pi i k.z),
// entire in z so the analytic extension to any strip is exact.
// ---------------------------------------------------------------------------

struct TrigTerm {
  Eigen::VectorXi k;
  std::complex<double> coeff;
};

class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(int d) : d_(d) {}

  static TrigPoly constant(int d, std::complex<double> c);

  int d() const { return d_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }

  /// Adds c * exp(2 pi i k.z), merging with an existing term at the same k.
  void add_term(const Eigen::VectorXi& k, std::complex<double> c);

  std::complex<double> eval(const Eigen::VectorXcd& z) const;
  std::complex<double> eval_real(const Eigen::VectorXd& x) const;

  /// Real-valuedness on the real torus: every term k has the conjugate
  /// coefficient at -k (within tol).
  bool conjugate_symmetric(double tol = 1e-14) const;

  /// Real and imaginary parts as real-valued trig polynomials.
  TrigPoly real_part() const;
  TrigPoly imag_part() const;

  TrigPoly operator+(const TrigPoly& o) const;
  TrigPoly operator-(const TrigPoly& o) const;
  TrigPoly operator*(double s) const;

 private:
  int d_ = 1;
  std::vector<TrigTerm> terms_;  // sorted lexicographically by k
};

/// m x m matrix of trig polynomials, row major.
struct TrigPolyMat {
  int m = 0;
  std::vector<TrigPoly> entries;

  const TrigPoly& at(int i, int j) const {
    return entries.at(static_cast<size_t>(i) * static_cast<size_t>(m) +
                      static_cast<size_t>(j));
  }
  TrigPoly& at(int i, int j) {
    return entries.at(static_cast<size_t>(i) * static_cast<size_t>(m) +
                      static_cast<size_t>(j));
  }
  Eigen::MatrixXcd eval(const Eigen::VectorXcd& z) const;
};

// ---------------------------------------------------------------------------
// Cocycles.  A cocycle is an analytic map T^d -> GL(m, R) together with its
// frequency and declared strip width r.  Trig-polynomial cocycles carry
// coefficients; composite evaluators (e.g. transfer matrices containing an
// inverse) expose only pointwise evaluation.
// ---------------------------------------------------------------------------

class CocycleImpl {
 public:
  virtual ~CocycleImpl() = default;
  virtual int dim() const = 0;
  virtual double width() const = 0;
  virtual const Frequency& frequency() const = 0;
  virtual Eigen::MatrixXcd eval_complex(const Eigen::VectorXcd& z) const = 0;
  virtual const TrigPolyMat* coefficients() const { return nullptr; }
  virtual std::string describe() const { return "cocycle"; }
};

class Cocycle {
 public:
  explicit Cocycle(std::shared_ptr<const CocycleImpl> impl) : impl_(std::move(impl)) {}

  int dim() const { return impl_->dim(); }
  int base_dim() const { return impl_->frequency().d(); }
  double width() const { return impl_->width(); }
  const Frequency& frequency() const { return impl_->frequency(); }

  /// Entrywise evaluation inside the strip |Im z| <= r (OutsideStrip beyond).
  Eigen::MatrixXcd eval_complex(const Eigen::VectorXcd& z) const;

  /// Real-torus evaluation; the imaginary residue must be negligible.
  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;

  bool has_coefficients() const { return impl_->coefficients() != nullptr; }
  const TrigPolyMat& coefficients() const;
  std::string describe() const { return impl_->describe(); }

 private:
  std::shared_ptr<const CocycleImpl> impl_;
};

/// Trig-polynomial cocycle; validates conjugate symmetry of every entry.
Cocycle make_trig_cocycle(TrigPolyMat entries, Frequency freq, double r,
                          std::string name = "trig-poly");

/// Constant cocycle A(x) = g.
Cocycle constant_cocycle(const Eigen::Ref<const Eigen::MatrixXd>& g, Frequency freq,
                         double r, std::string name = "constant");

/// A + h * B on coefficients (both must be trig-polynomial, same shape).
Cocycle add_scaled(const Cocycle& A, const Cocycle& B, double h);

/// Strip norm of the coefficient difference, |A - B|_r, by boundary sampling.
double strip_distance(const Cocycle& A, const Cocycle& B, int boundary_samples = 512);

// ---------------------------------------------------------------------------
// Quadrature on the torus: uniform grid, exact (trapezoid = rectangle) for
// periodic analytic integrands.
// ---------------------------------------------------------------------------

struct QuadratureGrid {
  int d = 1;
  int n_per_dim = 4096;

  QuadratureGrid(int dim, int n) : d(dim), n_per_dim(n) {
    if (n < 2) throw DomainError("quadrature grid: N >= 2 required");
    if (dim < 1) throw DomainError("quadrature grid: d >= 1 required");
  }
  static QuadratureGrid standard(int dim) {
    return QuadratureGrid(dim, dim == 1 ? 4096 : 256);
  }

  long total() const {
    long t = 1;
    for (int i = 0; i < d; ++i) t *= n_per_dim;
    return t;
  }
  Eigen::VectorXd node(long idx) const {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) {
      x(i) = static_cast<double>(idx % n_per_dim) / n_per_dim;
      idx /= n_per_dim;
    }
    return x;
  }
};

// ---------------------------------------------------------------------------
// Strip norms and the scaling constant
//   C(A) = m(m+1)/r * ( |log|A|_r| + |log|A^-1|_r| + log(1 + |A|_r) ).
// The norm sup over the strip is attained on the boundary faces
// Im z in {-r, +r}^d, which are sampled on the grid.
// ---------------------------------------------------------------------------

struct StripNorms {
  double norm_A;
  double norm_Ainv;
  double C_A;
  double log_norms_sum() const { return std::log(norm_A) + std::log(norm_Ainv); }
};

StripNorms strip_norms(const Cocycle& A, const QuadratureGrid& grid);

/// Invertibility sweep over the real-torus grid (SingularOnTorus on failure).
void validate_invertible_on_torus(const Cocycle& A, const QuadratureGrid& grid,
                                  double tol_inv = kTolInv);

// ---------------------------------------------------------------------------
// Iterates.  log p_j(A^(n)(x)) is computed by iterating the wedge_j cocycle
// with one scalar rescale per step, so n up to 1e4 cannot overflow and the
// singular value ratios are exact.
// ---------------------------------------------------------------------------

/// log p_j(A^(n)(x)) for a single j.
double iterate_logp(const Cocycle& A, const Eigen::VectorXd& x, int n, int j);

/// log p_j(A^(n)(x)) for all j = 1..m at once (shares the evaluations).
Eigen::VectorXd iterate_logp_all(const Cocycle& A, const Eigen::VectorXd& x, int n);

/// Rescaled wedge_j product matrix together with its accumulated log scale;
/// exposes the singular flags of A^(n)(x) at large n.
struct WedgeIterate {
  Eigen::MatrixXd mat;
  double log_scale;
};
WedgeIterate iterate_wedge(const Cocycle& A, const Eigen::VectorXd& x, int n, int j);

/// One orbit walk producing log p_j for all j plus the rescaled wedge
/// matrices at the requested levels.
struct ProductIterate {
  Eigen::VectorXd logp;              // levels 1..m
  std::vector<WedgeIterate> wedges;  // aligned with keep_levels
};
ProductIterate iterate_product(const Cocycle& A, const Eigen::VectorXd& x, int n,
                               const std::vector<int>& keep_levels);

// ---------------------------------------------------------------------------
// Finite-scale averages and deviation measurements.
// ---------------------------------------------------------------------------

/// (1/n) log s(A^(n)(x)) at every grid node, in node-index order.
Eigen::VectorXd pointwise_log_svf(const Cocycle& A, const SvFormula& s, int n,
                                  const QuadratureGrid& grid);

/// Lambda_s^(n)(A): grid average of (1/n) log s(A^(n)(x)).
double finite_scale_average(const Cocycle& A, const SvFormula& s, int n,
                            const QuadratureGrid& grid);

/// max over grid nodes of |u_n(x + omega) - u_n(x)| for u_n = (1/n) log s.
double almost_invariance(const Cocycle& A, const SvFormula& s, int n,
                         const QuadratureGrid& grid);

struct DeviationReport {
  int n;
  std::string formula;
  double delta;
  double measure;          // fraction of grid nodes deviating by more than delta
  double average;          // Lambda_s^(n)(A)
  double c;                // C(A)^{-2}
  double bound_reference;  // exp(-c delta^3 n); attached, never asserted
};

DeviationReport ldt_deviation(const Cocycle& A, const SvFormula& s, int n, double delta,
                              const QuadratureGrid& grid);

// ---------------------------------------------------------------------------
// Diophantine check.  d = 1 uses the strong condition
//   |k.omega| >= t / (k (log k)^2) for k >= 2;
// d >= 2 uses the standard condition |k.omega| >= t / |k|^{d+1} over the
// sup-norm lattice ball 0 < |k| <= K_max.
// ---------------------------------------------------------------------------

struct DiophantineReport {
  bool holds;
  Eigen::VectorXi worst_k;
  double worst_ratio;  // min over k of |k.omega| / bound(k); holds iff >= 1
};

DiophantineReport diophantine_check(const Frequency& omega, double t, long K_max);

// ---------------------------------------------------------------------------
// Cocycle spec files (JSON):
// { "m", "d", "r", "omega": [..],
//   "entries": [[ {"k": [..], "re": .., "im": ..}, ... ], ...] }  (row major)
// ---------------------------------------------------------------------------

Cocycle load_cocycle_json(const std::string& text);
Cocycle load_cocycle_file(const std::string& path);
std::string cocycle_to_json(const Cocycle& A);

}  // namespace cocyclelab
