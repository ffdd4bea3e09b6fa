#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cocyclelab/flag_geometry.hpp"
#include "cocyclelab/random.hpp"
#include "cocyclelab/signature.hpp"

namespace cocyclelab {

/// A matrix kept as value = mat * exp(log_scale); partial products of long
/// chains are stored this way so flags stay computable without overflow.
struct ScaledMatrix {
  Eigen::MatrixXd mat;
  double log_scale = 0.0;
};

/// Chain g_0, ..., g_{n-1} with partial products g^(i) = g_{i-1} ... g_0.
/// Alongside the rescaled base product, every exterior power wedge_j is
/// accumulated with its own scalar rescaling, so log p_j(g^(i)) and all
/// singular value ratios stay exact at scales far below machine epsilon of
/// the monolithic product.
class Chain {
 public:
  Chain(std::vector<Eigen::MatrixXd> links, Signature tau);

  int length() const { return static_cast<int>(links_.size()); }
  int dim() const { return static_cast<int>(links_[0].rows()); }
  const Signature& tau() const { return tau_; }
  const Eigen::MatrixXd& link(int i) const { return links_.at(static_cast<size_t>(i)); }

  /// Rescaled g^(i) for 1 <= i <= n (g^(1) = g_0).
  const ScaledMatrix& partial(int i) const {
    return partials_.at(static_cast<size_t>(i) - 1);
  }

  /// log p_j(g^(i)) for j = 1..m, from the per-level wedge accumulators.
  const Eigen::VectorXd& partial_logp(int i) const {
    return partial_logp_.at(static_cast<size_t>(i) - 1);
  }

  /// log singular values of g^(i), descending.
  Eigen::VectorXd partial_log_singular_values(int i) const;

  /// Level basis (m x level) of the most expanding +/- flag of g^(i),
  /// extracted from the wedge_level accumulator's top singular vectors.
  Eigen::MatrixXd partial_plus_basis(int i, int level) const;
  Eigen::MatrixXd partial_minus_basis(int i, int level) const;

 private:
  std::vector<Eigen::MatrixXd> links_;
  std::vector<ScaledMatrix> partials_;
  std::vector<Eigen::VectorXd> partial_logp_;
  // wedges_[i-1][j-1]: rescaled wedge_j of g^(i) (unit Frobenius norm).
  std::vector<std::vector<Eigen::MatrixXd>> wedges_;
  Signature tau_;
};

// ---------------------------------------------------------------------------
// Avalanche principle measurements.
// ---------------------------------------------------------------------------

struct ApHypotheses {
  double kappa;      // max_i sigma_tau(g_i)
  double epsilon;    // min_{i,j} |w_j(g_i g_{i-1})| / (|w_j g_i| |w_j g_{i-1}|)
  bool admissible;   // kappa <= epsilon^2 / admissibility_ratio
  double admissibility_ratio;
};

/// Sharpest (kappa, epsilon) the chain satisfies.  Throws NoGap (with the
/// offending index) when a link lacks the tau-gap at tol_gap.
ApHypotheses ap_hypotheses(const Chain& c, double tol_gap = kTolGapDefault,
                           double admissibility_ratio = 100.0);

struct ApPiDelta {
  std::string name;   // which tau-s.v.p.
  double delta;       // |log pi(g^(n)) + sum log pi(g_i) - sum log pi(g_i g_{i-1})|
  double normalized;  // delta / (n * kappa / eps^2)
};

struct ApReport {
  ApHypotheses hypotheses;
  double d_plus;         // d(v+(g^(n)), v+(g_{n-1}))
  double d_minus;        // d(v-(g^(n)), v-(g_0))
  double sigma_n;        // sigma_tau(g^(n))
  double log_sigma_n;
  double log_sigma_bound;  // n * log(kappa (1+eps) / eps^2)
  double ratio_d_plus;     // d_plus / (kappa / eps^2)
  double ratio_d_minus;
  std::vector<ApPiDelta> pi_deltas;
};

/// Measures all four conclusion quantities; throws ProductDegenerate if the
/// product loses the tau-gap numerically.
ApReport ap_report(const Chain& c, double tol_gap = kTolGapDefault);

// ---------------------------------------------------------------------------
// Exact sandwiches.
// ---------------------------------------------------------------------------

struct Sandwich {
  double lower;
  double actual;
  double upper;
};

/// pi_{tau,j} chain sandwich: prod alpha_{tau_j}/beta_{tau_{j-1}} <= actual
/// <= prod beta_{tau_j}/alpha_{tau_{j-1}}, with actual =
/// pi(g^(n)) / prod_i pi(g_i) and the convention alpha_0 = beta_0 = 1.
Sandwich svp_sandwich(const Chain& c, int j, double tol_gap = kTolGapDefault);

/// Same at the (1)-gap level with actual = |g^(n)| / prod |g_i|.
Sandwich norm_sandwich(const Chain& c, double tol_gap = kTolGapDefault);

// ---------------------------------------------------------------------------
// Shadowing verification.
// ---------------------------------------------------------------------------

struct ShadowReport {
  // hypothesis measurements
  double max_value_residual;   // max_i d(phi_{g_i}(x_i), y_i)        [item a]
  double min_critical_x;       // min_i d(x_i, Sigma_i)               [item b]
  double min_critical_y;       // min_i d(y_i, Sigma_{i+1})           [item b]
  double max_lipschitz;        // sampled, off B_eps(Sigma_i)         [item c]
  double max_image_spread;     // sampled max d(phi F, y_i)           [item d]
  // conclusions
  double conclusion_distance;  // d(y_{n-1}, phi_{g^(n)}(x_0))
  double conclusion_bound;     // delta / (1 - kappa)
  bool closed;                 // x_0 = y_{n-1}
  double fixed_point_distance;  // d(x_0, x*) when closed
  double fixed_point_bound;     // delta / ((1-kappa)(1-kappa^n))
  int fixed_point_iterations;
  std::vector<double> iterate_gaps;  // successive iterate distances
};

/// Checks hypotheses (a)-(d) of the shadowing lemma on the supplied data
/// (contraction sampled on the complement of the eps-neighborhoods of the
/// critical sets) and reports the conclusion quantities.  Throws
/// HypothesisFailed naming the first violated item.
ShadowReport shadow_verify(const Chain& maps, const std::vector<std::pair<Flag, Flag>>& pairs,
                           double eps, double delta, double kappa, int samples, Rng& rng,
                           double tol_gap = kTolGapDefault);

// ---------------------------------------------------------------------------
// Projective contraction probe.
// ---------------------------------------------------------------------------

struct ContractionProbe {
  double measured_lipschitz;     // max d(phi F, phi G) / d(F, G)
  double measured_image_radius;  // max d(phi F, v+_tau(g))
  double lipschitz_bound;        // kappa (1 + eps) / eps^2
  double image_radius_bound;     // kappa / eps
};

/// Samples flag pairs with correlation >= eps to v-_tau(g); requires
/// sigma_tau(g) < eps^2.  Throws SamplingExhausted if the rejection rate
/// exceeds 99.9%.
ContractionProbe contraction_probe(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                   const Signature& tau, double eps, int samples,
                                   Rng& rng, double tol_gap = kTolGapDefault);

// ---------------------------------------------------------------------------
// Chain generators for experiments: links R_i * D * Q_i^T where D carries the
// gap ratio kappa at every tau position and the rotations are angle-bounded
// so consecutive links stay aligned.
// ---------------------------------------------------------------------------

std::vector<Eigen::MatrixXd> make_admissible_links(int m, const Signature& tau,
                                                   double kappa, int n, double max_angle,
                                                   Rng& rng);

/// Deterministic 2x2 family with alignment angle exactly `angle` between
/// consecutive most-expanding directions, so the measured epsilon is close to
/// cos(angle); used for the kappa-sweep experiments.
std::vector<Eigen::MatrixXd> make_aligned_chain_2d(double kappa, int n, double angle);

}  // namespace cocyclelab
