#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/flag_geometry.hpp"

namespace cocyclelab {

// ---------------------------------------------------------------------------
// Lyapunov spectrum estimation at finite scales.
// L_j^(n) = Lambda_{p_j}^(n) - Lambda_{p_{j-1}}^(n), with p_0 = 1.
// ---------------------------------------------------------------------------

struct SpectrumEstimate {
  std::vector<int> scales;
  Eigen::MatrixXd lambda_p;      // scale x j: Lambda_{p_j}^(n)
  Eigen::MatrixXd exponents;     // scale x j: L_j^(n)
  Eigen::VectorXd extrapolated;  // L_j at the largest scale
  Eigen::VectorXd uncertainty;   // |L_j^(n_last) - L_j^(n_last/2)|
  int subadditivity_violations = 0;  // pairs of multiple scales with slack 1e-6
};

SpectrumEstimate lyapunov_estimate(const Cocycle& A, const std::vector<int>& scales,
                                   const QuadratureGrid& grid);

/// Gap positions persisting across the last two scales, plus the block sums
/// (including the trailing redundant block up to m).  tau_positions may be
/// empty when no gap exceeds gamma_min.
struct BlockAndGap {
  std::vector<int> tau_positions;
  std::vector<double> blocks;
};

BlockAndGap block_and_gap(const SpectrumEstimate& est, double gamma_min);

// ---------------------------------------------------------------------------
// Oseledets filtration approximation: the field x -> v-_tau(A^(n)(x)).
// Nodes where the product lacks the tau-gap are marked undefined.
// ---------------------------------------------------------------------------

struct FiltrationField {
  Signature tau;
  int n;
  QuadratureGrid grid;
  std::vector<std::optional<Flag>> flags;  // per node, node-index order
  double defined_fraction;
};

FiltrationField oseledets_filtration_grid(const Cocycle& A, const Signature& tau, int n,
                                          const QuadratureGrid& grid,
                                          double tol_gap = kTolGapDefault);

/// Grid average of flag distance where both fields are defined; nodes where
/// either is undefined count at distance 1 (the flag-manifold diameter).
double filtration_distance(const FiltrationField& F1, const FiltrationField& F2);

// ---------------------------------------------------------------------------
// Inductive-step ledger: the scale-to-scale bookkeeping
//   gamma_1 = gamma_0 - 4 eta_0 - 9 delta - C n0/n1,  eta_1 = C n0/n1,
// valid when delta < (gamma_0 - 4 eta_0)/10, 0 < delta_bar < delta,
// n0^{-3/4} <= delta_bar <= c delta^3 / 2 (c = C^{-2}) and
// n1 <= n0 exp(delta_bar n0).
// ---------------------------------------------------------------------------

struct LedgerState {
  double gamma;
  double eta;
  double delta;
  double delta_bar;
  double C;
  double n0;
  double n1;
};

struct LedgerResult {
  double gamma1;
  double eta1;
  bool valid;
  std::vector<std::string> violations;
};

LedgerResult inductive_ledger(const LedgerState& state);

/// Scale schedule n_{k+1} = n_k^2 with delta_k = n_k^{-1/6}; the partial sums
/// stay below 2 / n0^{1/6}.  Computed in log scale so large k cannot overflow.
struct GapSchedule {
  std::vector<double> deltas;
  double sum;
  double bound;  // 2 / n0^{1/6}
};

GapSchedule uniformgaps_schedule(double n0, int terms);

// ---------------------------------------------------------------------------
// Convergence-rate fit: least squares of |Lambda_pi^(n) - Lambda_pi^(n_max)|
// against log n / n (through the origin), plus the same fit against 1/n for
// the functional-form comparison.
// ---------------------------------------------------------------------------

struct RateFit {
  double K;
  double residual;            // rms misfit of the (log n)/n model
  double residual_inverse_n;  // rms misfit of the 1/n model
  double K_envelope;          // max_n deviation * n / log n (minimal envelope)
  double K_envelope_inverse;  // max_n deviation * n
  double max_deviation;
  std::vector<double> deviations;
};

RateFit rate_fit(const Cocycle& A, const SvFormula& pi, const std::vector<int>& scales,
                 const QuadratureGrid& grid);

// ---------------------------------------------------------------------------
// Hoelder probe: fits log |Lambda_pi(B_h) - Lambda_pi(A)| against log h for
// B_h = A + h * direction at a fixed probe scale n_star.
// ---------------------------------------------------------------------------

struct HolderProbe {
  double theta = 0.0;
  double r2 = 0.0;
  bool degenerate = false;  // direction vanishes or all differences are zero
  std::vector<double> dropped_radii;           // points where the gap was lost
  std::vector<std::pair<double, double>> fit_points;  // (log h, log diff)
};

HolderProbe holder_probe(const Cocycle& A, const Signature& tau, const SvFormula& pi,
                         const Cocycle& direction, const std::vector<double>& radii,
                         int n_star, const QuadratureGrid& grid,
                         double gap_threshold = 0.05);

// ---------------------------------------------------------------------------
// Grid-level verification of the average-vs-pointwise gap/angle relations:
// (i)   off the measured delta-deviation set of rho,
//       (1/n) log rho(A^(n)(x)) > Lambda_rho^(n) - delta;
// (ii)  Lambda_rho^(n) >= gbar (1 - |B|) > gbar - C |B| with gbar the
//       pointwise floor off the bad set;
// (iii) off the three measured deviation sets,
//       pi(A^(2n)(x)) / (pi(A^(n)(x)) pi(A^(n)(T^n x))) > e^{-(2 eta + 4 delta) n}.
// ---------------------------------------------------------------------------

struct LemmaCheckItem {
  std::string formula;
  double bad_measure;
  double margin;  // worst slack observed on the good set (>= 0 when it holds)
  bool holds;
};

struct LemmaChecksReport {
  int n;
  double delta;
  std::vector<LemmaCheckItem> pointwise_gap;     // item (i), one per rho
  std::vector<LemmaCheckItem> average_recover;   // item (ii), one per rho
  std::vector<LemmaCheckItem> angle_lower_bound; // item (iii), one per pi
  bool all_hold;
};

LemmaChecksReport lemma_checks(const Cocycle& A, const Signature& tau, int n, double delta,
                               const QuadratureGrid& grid);

}  // namespace cocyclelab
