#include "cocyclelab/avalanche.hpp"

#include <algorithm>
#include <cmath>

namespace cocyclelab {

namespace {

// d(F, Sigma(G)) for the critical set of a flag G; identical to
// critical_distance(G, F) but reads better at call sites below.
double distance_to_critical(const Flag& F, const Flag& critical_of) {
  return critical_distance(critical_of, F);
}

Flag apply_chain(const Chain& c, Flag F) {
  for (int i = 0; i < c.length(); ++i) F = flag_action(c.link(i), F);
  return F;
}

// Per-level expansivity factors between a partial product and a link; scale
// factors drop out of every quantity used here.
struct LevelFactors {
  double alpha;
  double beta;
};

LevelFactors level_factors(const Chain& c, int i, const SvdResult& link_svd,
                           const Eigen::VectorXd& link_logs, int level) {
  const Subspace plus{c.partial_plus_basis(i, level)};
  const Subspace minus{link_svd.V.leftCols(level)};
  const double a = grassmann_correlation(plus, minus);
  const Eigen::VectorXd plogs = c.partial_log_singular_values(i);
  const double sig_l = std::exp(plogs(level) - plogs(level - 1));
  const double sig_r = std::exp(link_logs(level) - link_logs(level - 1));
  const double b = std::sqrt(oplus(oplus(sig_l * sig_l, a * a), sig_r * sig_r));
  return {a, b};
}

}  // namespace

Chain::Chain(std::vector<Eigen::MatrixXd> links, Signature tau)
    : links_(std::move(links)), tau_(std::move(tau)) {
  if (links_.size() < 2) throw DomainError("chain: needs at least two links");
  const int m = static_cast<int>(links_[0].rows());
  if (m != tau_.ambient_dim()) throw SignatureMismatch("chain: signature ambient mismatch");
  for (const auto& g : links_)
    if (g.rows() != m || g.cols() != m) throw DimMismatch("chain: links of mixed dimension");

  partials_.reserve(links_.size());
  wedges_.reserve(links_.size());
  partial_logp_.reserve(links_.size());

  ScaledMatrix acc{Eigen::MatrixXd::Identity(m, m), 0.0};
  std::vector<Eigen::MatrixXd> wedge_acc(static_cast<size_t>(m));
  std::vector<double> wedge_scale(static_cast<size_t>(m), 0.0);
  for (int j = 1; j <= m; ++j) {
    const long wd = static_cast<long>(combinations_colex(m, j).size());
    wedge_acc[static_cast<size_t>(j) - 1] = Eigen::MatrixXd::Identity(wd, wd);
  }

  for (const auto& g : links_) {
    acc.mat = g * acc.mat;
    const double f = acc.mat.norm();
    if (!(f > 0.0) || !std::isfinite(f))
      throw SingularInput("chain: partial product degenerated");
    acc.mat /= f;
    acc.log_scale += std::log(f);
    partials_.push_back(acc);

    Eigen::VectorXd logp(m);
    std::vector<Eigen::MatrixXd> snapshot(static_cast<size_t>(m));
    for (int j = 1; j <= m; ++j) {
      auto& W = wedge_acc[static_cast<size_t>(j) - 1];
      W = ((j == 1) ? g : exterior_power(g, j)) * W;
      const double wf = W.norm();
      if (!(wf > 0.0) || !std::isfinite(wf))
        throw SingularInput("chain: wedge partial degenerated");
      W /= wf;
      wedge_scale[static_cast<size_t>(j) - 1] += std::log(wf);
      logp(j - 1) = wedge_scale[static_cast<size_t>(j) - 1] + std::log(operator_norm(W));
      snapshot[static_cast<size_t>(j) - 1] = W;
    }
    partial_logp_.push_back(std::move(logp));
    wedges_.push_back(std::move(snapshot));
  }
}

Eigen::VectorXd Chain::partial_log_singular_values(int i) const {
  const Eigen::VectorXd& logp = partial_logp(i);
  Eigen::VectorXd out(logp.size());
  for (Eigen::Index j = 0; j < logp.size(); ++j)
    out(j) = logp(j) - (j > 0 ? logp(j - 1) : 0.0);
  return out;
}

Eigen::MatrixXd Chain::partial_plus_basis(int i, int level) const {
  const Eigen::MatrixXd& W = wedges_.at(static_cast<size_t>(i) - 1)
                                 .at(static_cast<size_t>(level) - 1);
  return subspace_from_wedge(svd_full(W).U.col(0), dim(), level);
}

Eigen::MatrixXd Chain::partial_minus_basis(int i, int level) const {
  const Eigen::MatrixXd& W = wedges_.at(static_cast<size_t>(i) - 1)
                                 .at(static_cast<size_t>(level) - 1);
  return subspace_from_wedge(svd_full(W).V.col(0), dim(), level);
}

ApHypotheses ap_hypotheses(const Chain& c, double tol_gap, double admissibility_ratio) {
  const Signature& tau = c.tau();
  double kappa = 0.0;
  for (int i = 0; i < c.length(); ++i) {
    GapReport rep;
    try {
      rep = gap_report(c.link(i), tau, tol_gap);
    } catch (const SingularInput&) {
      throw NoGap("ap_hypotheses: singular link", i);
    }
    if (!rep.has_gap) throw NoGap("ap_hypotheses: link without tau-gap", i);
    kappa = std::max(kappa, rep.sigma_max);
  }
  double epsilon = 1.0;
  for (int i = 1; i < c.length(); ++i) {
    const Eigen::MatrixXd prod = c.link(i) * c.link(i - 1);
    for (int j = 1; j <= tau.k(); ++j) {
      const int q = tau.position(j);
      const double num = operator_norm(exterior_power(prod, q));
      const double den = operator_norm(exterior_power(c.link(i), q)) *
                         operator_norm(exterior_power(c.link(i - 1), q));
      epsilon = std::min(epsilon, num / den);
    }
  }
  ApHypotheses h;
  h.kappa = kappa;
  h.epsilon = epsilon;
  h.admissibility_ratio = admissibility_ratio;
  h.admissible = kappa <= epsilon * epsilon / admissibility_ratio;
  return h;
}

ApReport ap_report(const Chain& c, double tol_gap) {
  const Signature& tau = c.tau();
  const int n = c.length();
  ApReport rep;
  rep.hypotheses = ap_hypotheses(c, tol_gap);

  const Eigen::VectorXd logs = c.partial_log_singular_values(n);
  const GapReport gap_prod = gap_report_from_logs(logs, tau, tol_gap);
  if (!gap_prod.has_gap)
    throw ProductDegenerate("ap_report: product lost the tau-gap");

  std::vector<Eigen::MatrixXd> plus_bases, minus_bases;
  for (int j = 1; j <= tau.k(); ++j) {
    plus_bases.push_back(c.partial_plus_basis(n, tau.position(j)));
    minus_bases.push_back(c.partial_minus_basis(n, tau.position(j)));
  }
  const Flag vp_prod = flag_from_level_bases(tau, plus_bases);
  const Flag vm_prod = flag_from_level_bases(tau, minus_bases);
  const SvdResult svd_last = svd_full(c.link(n - 1));
  const SvdResult svd_first = svd_full(c.link(0));
  const int w = tau.top();
  rep.d_plus = flag_distance(vp_prod, Flag{tau, svd_last.U.leftCols(w)});
  rep.d_minus = flag_distance(vm_prod, Flag{tau, svd_first.V.leftCols(w)});

  rep.sigma_n = gap_prod.sigma_max;
  rep.log_sigma_n = -std::log(gap_prod.rho_min);
  const double kappa = rep.hypotheses.kappa;
  const double eps = rep.hypotheses.epsilon;
  rep.log_sigma_bound = n * std::log(kappa * (1.0 + eps) / (eps * eps));
  const double unit = kappa / (eps * eps);
  rep.ratio_d_plus = rep.d_plus / unit;
  rep.ratio_d_minus = rep.d_minus / unit;

  // log pi telescoping defect for every tau-s.v.p. (both pi_{tau,j} and
  // p_{tau_j} forms).
  const int m = tau.ambient_dim();
  auto log_pi_of_svals = [&](const SvFormula& f, const Eigen::VectorXd& s) {
    Eigen::VectorXd logp(m);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += std::log(s(i));
      logp(i) = acc;
    }
    return eval_svf_log(f, logp);
  };

  std::vector<SvFormula> pis;
  for (int j = 1; j <= tau.k(); ++j) {
    pis.push_back(BlockProduct{tau, j});
    pis.push_back(TopProduct{tau.position(j)});
  }
  for (const auto& f : pis) {
    double total = eval_svf_log(f, c.partial_logp(n));
    for (int i = 1; i <= n - 2; ++i)
      total += log_pi_of_svals(f, singular_values(c.link(i)));
    for (int i = 1; i <= n - 1; ++i)
      total -= log_pi_of_svals(f, singular_values(Eigen::MatrixXd(c.link(i) * c.link(i - 1))));
    ApPiDelta d;
    d.name = svf_name(f);
    d.delta = std::abs(total);
    d.normalized = d.delta / (n * unit);
    rep.pi_deltas.push_back(d);
  }
  return rep;
}

namespace {

Sandwich sandwich_impl(const Chain& c, int level_hi, int level_lo, const SvFormula& pi,
                       double tol_gap) {
  const Signature& tau = c.tau();
  const int n = c.length();
  const int m = tau.ambient_dim();

  std::vector<SvdResult> link_svd(static_cast<size_t>(n));
  std::vector<Eigen::VectorXd> link_logs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    link_svd[static_cast<size_t>(i)] = svd_full(c.link(i));
    const Eigen::VectorXd& s = link_svd[static_cast<size_t>(i)].S;
    if (s(m - 1) <= kTolInv * s(0)) throw NoGap("sandwich: singular link", i);
    link_logs[static_cast<size_t>(i)] = s.array().log().matrix();
    if (!gap_report_from_logs(link_logs[static_cast<size_t>(i)], tau, tol_gap).has_gap)
      throw NoGap("sandwich: link without tau-gap", i);
  }

  double log_lower = 0.0, log_upper = 0.0;
  for (int i = 1; i < n; ++i) {
    if (!gap_report_from_logs(c.partial_log_singular_values(i), tau, tol_gap).has_gap)
      throw NoGap("sandwich: partial product without tau-gap", i);

    const LevelFactors hi = level_factors(c, i, link_svd[static_cast<size_t>(i)],
                                          link_logs[static_cast<size_t>(i)], level_hi);
    if (hi.alpha <= 1e-12)
      throw AlphaDegenerate("sandwich: alpha factor below 1e-12");
    double lo_alpha = 1.0, lo_beta = 1.0;
    if (level_lo > 0) {
      const LevelFactors lo = level_factors(c, i, link_svd[static_cast<size_t>(i)],
                                            link_logs[static_cast<size_t>(i)], level_lo);
      if (lo.alpha <= 1e-12)
        throw AlphaDegenerate("sandwich: alpha factor below 1e-12");
      lo_alpha = lo.alpha;
      lo_beta = lo.beta;
    }
    log_lower += std::log(hi.alpha) - std::log(lo_beta);
    log_upper += std::log(hi.beta) - std::log(lo_alpha);
  }

  auto log_pi_of_logs = [&](const Eigen::VectorXd& log_s) {
    Eigen::VectorXd logp(m);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += log_s(i);
      logp(i) = acc;
    }
    return eval_svf_log(pi, logp);
  };

  double log_actual = eval_svf_log(pi, c.partial_logp(n));
  for (int i = 0; i < n; ++i)
    log_actual -= log_pi_of_logs(link_logs[static_cast<size_t>(i)]);

  return Sandwich{std::exp(log_lower), std::exp(log_actual), std::exp(log_upper)};
}

}  // namespace

Sandwich svp_sandwich(const Chain& c, int j, double tol_gap) {
  const Signature& tau = c.tau();
  if (j < 1 || j > tau.k()) throw DomainError("svp_sandwich: block index out of range");
  const int hi = tau.position(j);
  const int lo = (j > 1) ? tau.position(j - 1) : 0;
  return sandwich_impl(c, hi, lo, BlockProduct{tau, j}, tol_gap);
}

Sandwich norm_sandwich(const Chain& c, double tol_gap) {
  // Same chain viewed at the (1)-gap level.
  std::vector<Eigen::MatrixXd> links;
  links.reserve(static_cast<size_t>(c.length()));
  for (int i = 0; i < c.length(); ++i) links.push_back(c.link(i));
  Chain c1(std::move(links), Signature({1}, c.dim()));
  return sandwich_impl(c1, 1, 0, TopProduct{1}, tol_gap);
}

ShadowReport shadow_verify(const Chain& maps, const std::vector<std::pair<Flag, Flag>>& pairs,
                           double eps, double delta, double kappa, int samples, Rng& rng,
                           double tol_gap) {
  const int n = maps.length();
  if (static_cast<int>(pairs.size()) != n)
    throw DomainError("shadow_verify: need one (x_i, y_i) pair per map");
  if (!(delta / (1.0 - kappa) < eps && eps < 0.5 && delta < kappa && kappa < 1.0))
    throw DomainError("shadow_verify: constants must satisfy delta/(1-kappa) < eps < 1/2, delta < kappa < 1");

  const Signature& tau = maps.tau();
  std::vector<Flag> critical;  // Sigma_i = Sigma(v-_tau(g_i))
  critical.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    critical.push_back(most_expanding_flags(maps.link(i), tau, tol_gap).vminus);

  ShadowReport rep{};
  rep.max_value_residual = 0.0;
  rep.min_critical_x = 1.0;
  rep.min_critical_y = 1.0;

  // (a) g_i(x_i) = y_i
  for (int i = 0; i < n; ++i) {
    const double r =
        flag_distance(flag_action(maps.link(i), pairs[static_cast<size_t>(i)].first),
                      pairs[static_cast<size_t>(i)].second);
    rep.max_value_residual = std::max(rep.max_value_residual, r);
  }
  if (rep.max_value_residual > 1e-9)
    throw HypothesisFailed("shadow_verify: (a) g_i(x_i) != y_i", 'a');

  // (b) d(x_i, Sigma_i) = 1 and d(y_i, Sigma_{i+1}) >= 2 eps
  for (int i = 0; i < n; ++i) {
    rep.min_critical_x = std::min(
        rep.min_critical_x,
        distance_to_critical(pairs[static_cast<size_t>(i)].first, critical[static_cast<size_t>(i)]));
    if (i + 1 < n)
      rep.min_critical_y = std::min(
          rep.min_critical_y, distance_to_critical(pairs[static_cast<size_t>(i)].second,
                                                   critical[static_cast<size_t>(i) + 1]));
  }
  if (rep.min_critical_x < 1.0 - 1e-9)
    throw HypothesisFailed("shadow_verify: (b) d(x_i, Sigma_i) != 1", 'b');
  if (rep.min_critical_y < 2.0 * eps)
    throw HypothesisFailed("shadow_verify: (b) d(y_i, Sigma_{i+1}) < 2 eps", 'b');

  // (c), (d): sampled Lipschitz constant and image spread off B_eps(Sigma_i).
  rep.max_lipschitz = 0.0;
  rep.max_image_spread = 0.0;
  for (int i = 0; i < n; ++i) {
    int accepted = 0;
    long attempts = 0;
    std::vector<Flag> pool;
    while (accepted < samples) {
      if (++attempts > 1000L * samples)
        throw SamplingExhausted("shadow_verify: rejection rate too high");
      Flag F = random_flag(tau, rng);
      if (distance_to_critical(F, critical[static_cast<size_t>(i)]) < eps) continue;
      pool.push_back(std::move(F));
      ++accepted;
    }
    std::vector<Flag> images;
    images.reserve(pool.size());
    for (const auto& F : pool) {
      Flag img = flag_action(maps.link(i), F);
      rep.max_image_spread = std::max(
          rep.max_image_spread, flag_distance(img, pairs[static_cast<size_t>(i)].second));
      images.push_back(std::move(img));
    }
    for (size_t a = 0; a + 1 < pool.size(); a += 2) {
      const double base = flag_distance(pool[a], pool[a + 1]);
      if (base < 1e-10) continue;
      rep.max_lipschitz =
          std::max(rep.max_lipschitz, flag_distance(images[a], images[a + 1]) / base);
    }
  }
  if (rep.max_lipschitz > kappa)
    throw HypothesisFailed("shadow_verify: (c) sampled Lipschitz constant exceeds kappa", 'c');
  if (rep.max_image_spread > delta)
    throw HypothesisFailed("shadow_verify: (d) image not inside B_delta(y_i)", 'd');

  // Conclusion (1).
  const Flag image = apply_chain(maps, pairs.front().first);
  rep.conclusion_distance = flag_distance(pairs.back().second, image);
  rep.conclusion_bound = delta / (1.0 - kappa);

  // Conclusion (2): fixed point by iteration when the pseudo-orbit closes.
  rep.closed = flag_distance(pairs.front().first, pairs.back().second) < 1e-12;
  rep.fixed_point_distance = 0.0;
  rep.fixed_point_iterations = 0;
  rep.fixed_point_bound =
      delta / ((1.0 - kappa) * (1.0 - std::pow(kappa, n)));
  if (rep.closed) {
    Flag cur = pairs.front().first;
    for (int it = 0; it < 200; ++it) {
      Flag next = apply_chain(maps, cur);
      const double gap = flag_distance(next, cur);
      rep.iterate_gaps.push_back(gap);
      cur = std::move(next);
      ++rep.fixed_point_iterations;
      if (gap < 1e-14) break;
    }
    rep.fixed_point_distance = flag_distance(pairs.front().first, cur);
  }
  return rep;
}

ContractionProbe contraction_probe(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                   const Signature& tau, double eps, int samples,
                                   Rng& rng, double tol_gap) {
  if (samples < 2) throw DomainError("contraction_probe: samples >= 2 required");
  const GapReport rep = gap_report(g, tau, tol_gap);
  if (!rep.has_gap) throw NoGap("contraction_probe: no tau-gap");
  const double kappa = rep.sigma_max;
  if (!(kappa < eps * eps))
    throw DomainError("contraction_probe: requires sigma_tau(g) < eps^2");

  const ExpandingFlags flags = most_expanding_flags(g, tau, tol_gap);

  ContractionProbe out;
  out.lipschitz_bound = kappa * (1.0 + eps) / (eps * eps);
  out.image_radius_bound = kappa / eps;
  out.measured_lipschitz = 0.0;
  out.measured_image_radius = 0.0;

  int accepted = 0;
  long attempts = 0;
  std::vector<Flag> pool;
  pool.reserve(static_cast<size_t>(samples));
  while (accepted < samples) {
    if (++attempts > 1000L * samples)
      throw SamplingExhausted("contraction_probe: rejection rate above 99.9%");
    Flag F = random_flag(tau, rng);
    if (flag_correlation(F, flags.vminus) < eps) continue;
    pool.push_back(std::move(F));
    ++accepted;
  }
  std::vector<Flag> images;
  images.reserve(pool.size());
  for (const auto& F : pool) {
    Flag img = flag_action(g, F);
    out.measured_image_radius =
        std::max(out.measured_image_radius, flag_distance(img, flags.vplus));
    images.push_back(std::move(img));
  }
  for (size_t a = 0; a + 1 < pool.size(); a += 2) {
    const double base = flag_distance(pool[a], pool[a + 1]);
    if (base < 1e-10) continue;
    out.measured_lipschitz =
        std::max(out.measured_lipschitz, flag_distance(images[a], images[a + 1]) / base);
  }
  return out;
}

std::vector<Eigen::MatrixXd> make_admissible_links(int m, const Signature& tau,
                                                   double kappa, int n, double max_angle,
                                                   Rng& rng) {
  if (tau.ambient_dim() != m) throw SignatureMismatch("make_admissible_links: ambient mismatch");
  // Singular values: drop by a factor kappa across every tau position.
  Eigen::VectorXd s(m);
  double cur = 1.0;
  int pos_idx = 1;
  for (int i = 1; i <= m; ++i) {
    s(i - 1) = cur;
    if (pos_idx <= tau.k() && i == tau.position(pos_idx)) {
      cur *= kappa;
      ++pos_idx;
    }
  }
  std::vector<Eigen::MatrixXd> links;
  links.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd R = random_small_rotation(m, max_angle, rng);
    const Eigen::MatrixXd Q = random_small_rotation(m, max_angle, rng);
    links.push_back(R * s.asDiagonal() * Q.transpose());
  }
  return links;
}

std::vector<Eigen::MatrixXd> make_aligned_chain_2d(double kappa, int n, double angle) {
  auto rot = [](double th) {
    Eigen::Matrix2d R;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return R;
  };
  // v+(g_i) = R(phi_i) e_1, v-(g_i) = R(psi_i) e_1; choosing psi_{i} =
  // phi_{i-1} - angle makes the consecutive correlation exactly cos(angle).
  std::vector<Eigen::MatrixXd> links;
  links.reserve(static_cast<size_t>(n));
  const Eigen::Vector2d diag(1.0, kappa);
  double prev_phi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double psi = (i == 0) ? 0.0 : prev_phi - angle;
    const double phi = psi + angle / 2.0;  // keep the frames drifting slowly
    links.push_back(rot(phi) * diag.asDiagonal() * rot(psi).transpose());
    prev_phi = phi;
  }
  return links;
}

}  // namespace cocyclelab
