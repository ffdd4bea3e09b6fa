#include "cocyclelab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "cocyclelab/parallel.hpp"

namespace cocyclelab {

namespace {

// Per-scale Lambda_{p_j}^(n) for all j as one grid pass.
Eigen::VectorXd lambda_p_at_scale(const Cocycle& A, int n, const QuadratureGrid& grid) {
  const int m = A.dim();
  const long total = grid.total();
  Eigen::MatrixXd values(total, m);
  std::exception_ptr error;
  std::mutex error_mutex;
  parallel_for(total, [&](long i) {
    try {
      values.row(i) = iterate_logp_all(A, grid.node(i), n).transpose() / double(n);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(m);
  for (long i = 0; i < total; ++i) avg += values.row(i).transpose();
  return avg / double(total);
}

Eigen::VectorXd exponents_from_lambda(const Eigen::VectorXd& lambda_p) {
  Eigen::VectorXd L(lambda_p.size());
  for (Eigen::Index j = 0; j < lambda_p.size(); ++j)
    L(j) = lambda_p(j) - (j > 0 ? lambda_p(j - 1) : 0.0);
  return L;
}

}  // namespace

SpectrumEstimate lyapunov_estimate(const Cocycle& A, const std::vector<int>& scales,
                                   const QuadratureGrid& grid) {
  if (scales.empty()) throw DomainError("lyapunov_estimate: no scales");
  for (size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1])
      throw DomainError("lyapunov_estimate: scales must be increasing");

  const int m = A.dim();
  SpectrumEstimate est;
  est.scales = scales;
  est.lambda_p.resize(static_cast<Eigen::Index>(scales.size()), m);
  est.exponents.resize(static_cast<Eigen::Index>(scales.size()), m);
  for (size_t s = 0; s < scales.size(); ++s) {
    const Eigen::VectorXd lp = lambda_p_at_scale(A, scales[s], grid);
    est.lambda_p.row(static_cast<Eigen::Index>(s)) = lp.transpose();
    est.exponents.row(static_cast<Eigen::Index>(s)) = exponents_from_lambda(lp).transpose();
  }
  est.extrapolated = est.exponents.row(est.exponents.rows() - 1).transpose();

  const int n_last = scales.back();
  const int n_half = std::max(1, n_last / 2);
  Eigen::VectorXd half_L;
  const auto it = std::find(scales.begin(), scales.end(), n_half);
  if (it != scales.end()) {
    half_L = est.exponents.row(it - scales.begin()).transpose();
  } else {
    half_L = exponents_from_lambda(lambda_p_at_scale(A, n_half, grid));
  }
  est.uncertainty = (est.extrapolated - half_L).cwiseAbs();

  est.subadditivity_violations = 0;
  for (size_t a = 0; a < scales.size(); ++a)
    for (size_t b = a + 1; b < scales.size(); ++b)
      if (scales[b] % scales[a] == 0)
        for (int j = 0; j < m; ++j)
          if (est.lambda_p(static_cast<Eigen::Index>(b), j) >
              est.lambda_p(static_cast<Eigen::Index>(a), j) + 1e-6)
            ++est.subadditivity_violations;
  return est;
}

BlockAndGap block_and_gap(const SpectrumEstimate& est, double gamma_min) {
  if (est.scales.size() < 2)
    throw DomainError("block_and_gap: estimate needs at least two scales");
  const int m = static_cast<int>(est.exponents.cols());
  const Eigen::Index last = est.exponents.rows() - 1;

  BlockAndGap out;
  for (int i = 1; i < m; ++i) {
    const double gap_last = est.exponents(last, i - 1) - est.exponents(last, i);
    const double gap_prev = est.exponents(last - 1, i - 1) - est.exponents(last - 1, i);
    if (gap_last > gamma_min && gap_prev > gamma_min) out.tau_positions.push_back(i);
  }
  int start = 0;
  for (int pos : out.tau_positions) {
    double sum = 0.0;
    for (int j = start; j < pos; ++j) sum += est.extrapolated(j);
    out.blocks.push_back(sum);
    start = pos;
  }
  double tail = 0.0;
  for (int j = start; j < m; ++j) tail += est.extrapolated(j);
  out.blocks.push_back(tail);
  return out;
}

FiltrationField oseledets_filtration_grid(const Cocycle& A, const Signature& tau, int n,
                                          const QuadratureGrid& grid, double tol_gap) {
  if (tau.ambient_dim() != A.dim())
    throw SignatureMismatch("oseledets_filtration_grid: ambient mismatch");
  const int m = A.dim();
  const long total = grid.total();
  FiltrationField field{tau, n, grid, {}, 0.0};
  field.flags.assign(static_cast<size_t>(total), std::nullopt);

  const std::vector<int> keep(tau.positions().begin(), tau.positions().end());
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<char> defined(static_cast<size_t>(total), 0);
  parallel_for(total, [&](long i) {
    try {
      const ProductIterate prod = iterate_product(A, grid.node(i), n, keep);
      const GapReport rep =
          gap_report_from_logs(exponents_from_lambda(prod.logp), tau, tol_gap);
      if (!rep.has_gap) return;  // node stays undefined
      std::vector<Eigen::MatrixXd> bases;
      bases.reserve(keep.size());
      for (size_t l = 0; l < keep.size(); ++l)
        bases.push_back(
            subspace_from_wedge(svd_full(prod.wedges[l].mat).V.col(0), m, keep[l]));
      field.flags[static_cast<size_t>(i)] = flag_from_level_bases(tau, bases);
      defined[static_cast<size_t>(i)] = 1;
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);
  long count = 0;
  for (char c : defined) count += c;
  field.defined_fraction = double(count) / double(total);
  return field;
}

double filtration_distance(const FiltrationField& F1, const FiltrationField& F2) {
  if (F1.tau != F2.tau) throw SignatureMismatch("filtration_distance: signature mismatch");
  if (F1.grid.d != F2.grid.d || F1.grid.n_per_dim != F2.grid.n_per_dim)
    throw GridMismatch("filtration_distance: grids differ");
  const long total = F1.grid.total();
  Eigen::VectorXd node_dist(total);
  std::exception_ptr error;
  std::mutex error_mutex;
  parallel_for(total, [&](long i) {
    try {
      const auto& a = F1.flags[static_cast<size_t>(i)];
      const auto& b = F2.flags[static_cast<size_t>(i)];
      node_dist(i) = (a && b) ? flag_distance(*a, *b) : 1.0;
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);
  double acc = 0.0;
  for (long i = 0; i < total; ++i) acc += node_dist(i);
  return acc / double(total);
}

LedgerResult inductive_ledger(const LedgerState& st) {
  LedgerResult out;
  out.gamma1 = st.gamma - 4.0 * st.eta - 9.0 * st.delta - st.C * st.n0 / st.n1;
  out.eta1 = st.C * st.n0 / st.n1;

  const double c = 1.0 / (st.C * st.C);
  if (!(st.delta < (st.gamma - 4.0 * st.eta) / 10.0))
    out.violations.push_back("delta >= (gamma - 4 eta) / 10");
  if (!(st.delta_bar > 0.0 && st.delta_bar < st.delta))
    out.violations.push_back("delta_bar outside (0, delta)");
  if (!(std::pow(st.n0, -0.75) <= st.delta_bar))
    out.violations.push_back("delta_bar < n0^{-3/4}");
  if (!(st.delta_bar <= c * st.delta * st.delta * st.delta / 2.0))
    out.violations.push_back("delta_bar > c delta^3 / 2");
  // n1 <= n0 exp(delta_bar n0), compared in logs to avoid overflow.
  if (!(std::log(st.n1) <= std::log(st.n0) + st.delta_bar * st.n0))
    out.violations.push_back("n1 > n0 exp(delta_bar n0)");
  out.valid = out.violations.empty();
  return out;
}

GapSchedule uniformgaps_schedule(double n0, int terms) {
  if (!(n0 > 1.0)) throw DomainError("uniformgaps_schedule: n0 > 1 required");
  if (terms < 1) throw DomainError("uniformgaps_schedule: terms >= 1 required");
  GapSchedule out;
  out.deltas.reserve(static_cast<size_t>(terms));
  const double log_n0 = std::log(n0);
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    const double log_nk = std::ldexp(log_n0, k);  // 2^k log n0
    const double dk = std::exp(-log_nk / 6.0);
    out.deltas.push_back(dk);
    sum += dk;
  }
  out.sum = sum;
  out.bound = 2.0 * std::exp(-log_n0 / 6.0);
  return out;
}

RateFit rate_fit(const Cocycle& A, const SvFormula& pi, const std::vector<int>& scales,
                 const QuadratureGrid& grid) {
  if (scales.size() < 4) throw DomainError("rate_fit: needs at least four scales");
  for (size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1]) throw DomainError("rate_fit: scales must be increasing");

  std::vector<double> lambda(scales.size());
  for (size_t s = 0; s < scales.size(); ++s)
    lambda[s] = finite_scale_average(A, pi, scales[s], grid);

  RateFit out;
  const double proxy = lambda.back();
  double sxy = 0.0, sxx = 0.0, sxy2 = 0.0, sxx2 = 0.0;
  out.max_deviation = 0.0;
  out.K_envelope = 0.0;
  out.K_envelope_inverse = 0.0;
  for (size_t s = 0; s + 1 < scales.size(); ++s) {
    const double y = std::abs(lambda[s] - proxy);
    const double x = std::log(double(scales[s])) / double(scales[s]);
    const double x2 = 1.0 / double(scales[s]);
    out.deviations.push_back(y);
    out.max_deviation = std::max(out.max_deviation, y);
    if (scales[s] >= 2) out.K_envelope = std::max(out.K_envelope, y / x);
    out.K_envelope_inverse = std::max(out.K_envelope_inverse, y / x2);
    sxy += x * y;
    sxx += x * x;
    sxy2 += x2 * y;
    sxx2 += x2 * x2;
  }
  out.K = (sxx > 0.0) ? sxy / sxx : 0.0;
  const double K2 = (sxx2 > 0.0) ? sxy2 / sxx2 : 0.0;
  double r1 = 0.0, r2 = 0.0;
  for (size_t s = 0; s + 1 < scales.size(); ++s) {
    const double y = out.deviations[s];
    const double x = std::log(double(scales[s])) / double(scales[s]);
    const double x2 = 1.0 / double(scales[s]);
    r1 += (y - out.K * x) * (y - out.K * x);
    r2 += (y - K2 * x2) * (y - K2 * x2);
  }
  const double cnt = double(scales.size() - 1);
  out.residual = std::sqrt(r1 / cnt);
  out.residual_inverse_n = std::sqrt(r2 / cnt);
  return out;
}

HolderProbe holder_probe(const Cocycle& A, const Signature& tau, const SvFormula& pi,
                         const Cocycle& direction, const std::vector<double>& radii,
                         int n_star, const QuadratureGrid& grid, double gap_threshold) {
  HolderProbe out;

  // Normalize the direction to unit strip norm; a vanishing direction makes
  // the probe degenerate.
  const double dir_norm = strip_distance(direction, add_scaled(direction, direction, -1.0));
  if (dir_norm < 1e-300) {
    out.degenerate = true;
    return out;
  }

  // Reference spectrum; A itself must carry the tau-gap at the probe scale.
  const Eigen::VectorXd lp_A = [&] {
    const long total = grid.total();
    Eigen::MatrixXd values(total, A.dim());
    std::exception_ptr error;
    std::mutex error_mutex;
    parallel_for(total, [&](long i) {
      try {
        values.row(i) = iterate_logp_all(A, grid.node(i), n_star).transpose() / double(n_star);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
    if (error) std::rethrow_exception(error);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(A.dim());
    for (long i = 0; i < total; ++i) avg += values.row(i).transpose();
    return Eigen::VectorXd(avg / double(total));
  }();
  const Eigen::VectorXd L_A = exponents_from_lambda(lp_A);
  for (int j = 1; j <= tau.k(); ++j) {
    const int q = tau.position(j);
    if (!(L_A(q - 1) - L_A(q) > gap_threshold))
      throw NoGap("holder_probe: base cocycle lacks the tau-gap at the probe scale");
  }
  // lp_A(j) is already the average of (1/n) log p_{j+1}, so the formula can
  // be combined directly.
  const int m = A.dim();
  const double lambda_A = eval_svf_log(pi, lp_A);

  for (double h : radii) {
    const Cocycle B = add_scaled(A, direction, h / dir_norm);
    Eigen::VectorXd lp_B = Eigen::VectorXd::Zero(m);
    {
      const long total = grid.total();
      Eigen::MatrixXd values(total, m);
      std::exception_ptr error;
      std::mutex error_mutex;
      parallel_for(total, [&](long i) {
        try {
          values.row(i) =
              iterate_logp_all(B, grid.node(i), n_star).transpose() / double(n_star);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
      if (error) std::rethrow_exception(error);
      for (long i = 0; i < total; ++i) lp_B += values.row(i).transpose();
      lp_B /= double(total);
    }
    const Eigen::VectorXd L_B = exponents_from_lambda(lp_B);
    bool gap_ok = true;
    for (int j = 1; j <= tau.k(); ++j) {
      const int q = tau.position(j);
      if (!(L_B(q - 1) - L_B(q) > gap_threshold)) gap_ok = false;
    }
    if (!gap_ok) {
      out.dropped_radii.push_back(h);
      continue;
    }
    const double diff = std::abs(eval_svf_log(pi, lp_B) - lambda_A);
    if (diff <= 0.0) continue;  // exactly zero: no information for the log fit
    out.fit_points.emplace_back(std::log(h), std::log(diff));
  }

  if (out.fit_points.size() < 2) {
    out.degenerate = true;
    return out;
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : out.fit_points) {
    mx += p.first;
    my += p.second;
  }
  mx /= double(out.fit_points.size());
  my /= double(out.fit_points.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& p : out.fit_points) {
    sxy += (p.first - mx) * (p.second - my);
    sxx += (p.first - mx) * (p.first - mx);
    syy += (p.second - my) * (p.second - my);
  }
  out.theta = sxy / sxx;
  out.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

LemmaChecksReport lemma_checks(const Cocycle& A, const Signature& tau, int n, double delta,
                               const QuadratureGrid& grid) {
  LemmaChecksReport rep;
  rep.n = n;
  rep.delta = delta;
  const StripNorms norms = strip_norms(A, grid);

  // (i) + (ii) for every tau-s.v.r. rho.
  for (int j = 1; j <= tau.k(); ++j) {
    const SvFormula rho = RatioRho{tau.position(j)};
    const Eigen::VectorXd u = pointwise_log_svf(A, rho, n, grid);
    const double lambda = u.mean();
    long bad = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double floor_good = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (std::abs(u(i) - lambda) > delta) {
        ++bad;
        continue;
      }
      worst_margin = std::min(worst_margin, u(i) - (lambda - delta));
      floor_good = std::min(floor_good, u(i));
    }
    const double measure = double(bad) / double(u.size());
    LemmaCheckItem item_i;
    item_i.formula = svf_name(rho);
    item_i.bad_measure = measure;
    item_i.margin = (bad == static_cast<long>(u.size())) ? 0.0 : worst_margin;
    item_i.holds = item_i.margin >= -1e-12;
    rep.pointwise_gap.push_back(item_i);

    LemmaCheckItem item_ii;
    item_ii.formula = svf_name(rho);
    item_ii.bad_measure = measure;
    const double gbar = (bad == static_cast<long>(u.size())) ? 0.0 : floor_good;
    item_ii.margin = lambda - gbar * (1.0 - measure);
    item_ii.holds = item_ii.margin >= -1e-12 &&
                    lambda > gbar - norms.C_A * measure - 1e-12;
    rep.average_recover.push_back(item_ii);
  }

  // (iii) for every tau-s.v.p. pi, with the shifted point evaluated exactly.
  std::vector<SvFormula> pis;
  for (int j = 1; j <= tau.k(); ++j) {
    pis.push_back(BlockProduct{tau, j});
    pis.push_back(TopProduct{tau.position(j)});
  }
  const Eigen::VectorXd omega_n = [&] {
    Eigen::VectorXd shift = A.frequency().omega * double(n);
    for (Eigen::Index i = 0; i < shift.size(); ++i) shift(i) -= std::floor(shift(i));
    return shift;
  }();
  for (const auto& pi : pis) {
    const Eigen::VectorXd u_n = pointwise_log_svf(A, pi, n, grid);
    const Eigen::VectorXd u_2n = pointwise_log_svf(A, pi, 2 * n, grid);
    const double lam_n = u_n.mean();
    const double lam_2n = u_2n.mean();
    const double eta = std::abs(lam_n - lam_2n);

    const long total = grid.total();
    Eigen::VectorXd u_shift(total);
    std::exception_ptr error;
    std::mutex error_mutex;
    parallel_for(total, [&](long i) {
      try {
        Eigen::VectorXd x = grid.node(i) + omega_n;
        for (Eigen::Index c = 0; c < x.size(); ++c) x(c) -= std::floor(x(c));
        u_shift(i) = eval_svf_log(pi, iterate_logp_all(A, x, n)) / double(n);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
    if (error) std::rethrow_exception(error);

    long bad = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (long i = 0; i < total; ++i) {
      const bool good = std::abs(u_n(i) - lam_n) <= delta &&
                        std::abs(u_shift(i) - lam_n) <= delta &&
                        std::abs(u_2n(i) - lam_2n) <= delta;
      if (!good) {
        ++bad;
        continue;
      }
      // (1/n) log of the angle ratio at x.
      const double value = 2.0 * u_2n(i) - u_n(i) - u_shift(i);
      worst = std::min(worst, value - (-(2.0 * eta + 4.0 * delta)));
    }
    LemmaCheckItem item;
    item.formula = svf_name(pi);
    item.bad_measure = double(bad) / double(total);
    item.margin = (bad == total) ? 0.0 : worst;
    item.holds = item.margin >= -1e-12;
    rep.angle_lower_bound.push_back(item);
  }

  rep.all_hold = true;
  for (const auto& v : {rep.pointwise_gap, rep.average_recover, rep.angle_lower_bound})
    for (const auto& item : v) rep.all_hold = rep.all_hold && item.holds;
  return rep;
}

}  // namespace cocyclelab
