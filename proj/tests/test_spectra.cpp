#include <doctest.h>

#include <cmath>

#include "cocyclelab/models.hpp"
#include "cocyclelab/spectra.hpp"
#include "test_support.hpp"

using namespace cocyclelab;

namespace {

Frequency golden1d() { return Frequency{Eigen::VectorXd::Constant(1, golden_mean())}; }

}  // namespace

TEST_CASE("constant diagonal spectrum is exact at every scale") {
  const Cocycle A = sample_gallery("const-diag");
  const QuadratureGrid grid(1, 64);
  const SpectrumEstimate est = lyapunov_estimate(A, {1, 2, 4, 8}, grid);
  for (Eigen::Index s = 0; s < est.exponents.rows(); ++s) {
    CHECK(std::abs(est.exponents(s, 0) - std::log(4.0)) <= 1e-12);
    CHECK(std::abs(est.exponents(s, 1) - std::log(2.0)) <= 1e-12);
    CHECK(std::abs(est.exponents(s, 2)) <= 1e-12);
  }
  CHECK(est.subadditivity_violations == 0);
  CHECK(est.uncertainty.maxCoeff() <= 1e-12);
}

TEST_CASE("rotation cocycle has zero exponents") {
  const Cocycle A = sample_gallery("rotation");
  const SpectrumEstimate est = lyapunov_estimate(A, {256}, QuadratureGrid(1, 128));
  CHECK(std::abs(est.extrapolated(0)) <= 1e-8);
  CHECK(std::abs(est.extrapolated(1)) <= 1e-8);
}

TEST_CASE("spectrum rows sum to the determinant integral") {
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const QuadratureGrid grid(1, 256);
  const double det_integral = finite_scale_average(A, TopProduct{3}, 1, grid);
  const SpectrumEstimate est = lyapunov_estimate(A, {4, 8, 16}, grid);
  for (Eigen::Index s = 0; s < est.exponents.rows(); ++s) {
    const double sum = est.exponents.row(s).sum();
    CHECK(sum == doctest::Approx(det_integral).epsilon(1e-10));
    for (int j = 0; j + 1 < 3; ++j)
      CHECK(est.exponents(s, j) >= est.exponents(s, j + 1) - 1e-9);
  }
}

TEST_CASE("almost mathieu exponent meets a long single-orbit estimate") {
  // Independent oracle: one Birkhoff orbit of length 1e5 for L1.
  const Cocycle A = sample_gallery("am-lambda3");
  const int n_orbit = 100000;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.123);
  Eigen::Matrix2d prod = Eigen::Matrix2d::Identity();
  double logscale = 0.0;
  for (int i = 0; i < n_orbit; ++i) {
    prod = A.eval(x) * prod;
    const double f = prod.norm();
    prod /= f;
    logscale += std::log(f);
    x(0) += golden_mean();
    x(0) -= std::floor(x(0));
  }
  const double oracle = (logscale + std::log(operator_norm(prod))) / n_orbit;
  const SpectrumEstimate est = lyapunov_estimate(A, {64, 128}, QuadratureGrid(1, 512));
  CHECK(std::abs(est.extrapolated(0) - oracle) <= 1e-2);
}

TEST_CASE("block detection on the const-diag fixture") {
  const Cocycle A = sample_gallery("const-diag");
  const SpectrumEstimate est = lyapunov_estimate(A, {2, 4}, QuadratureGrid(1, 32));
  const BlockAndGap bg = block_and_gap(est, 0.1);
  REQUIRE(bg.tau_positions == std::vector<int>{1, 2});
  REQUIRE(bg.blocks.size() == 3);
  CHECK(bg.blocks[0] == doctest::Approx(std::log(4.0)).epsilon(1e-10));
  CHECK(bg.blocks[1] == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(std::abs(bg.blocks[2]) <= 1e-10);
}

TEST_CASE("block detection is empty for isometric cocycles") {
  const Cocycle A = sample_gallery("rotation");
  const SpectrumEstimate est = lyapunov_estimate(A, {8, 16}, QuadratureGrid(1, 64));
  CHECK(block_and_gap(est, 0.1).tau_positions.empty());
}

TEST_CASE("tau=(1,3) blocks realized by a diagonal matrix") {
  const Frequency freq = golden1d();
  Eigen::Matrix4d g = Eigen::Vector4d(4, 2, 2, 1).asDiagonal();
  const Cocycle A = constant_cocycle(g, freq, 0.5);
  const SpectrumEstimate est = lyapunov_estimate(A, {2, 4}, QuadratureGrid(1, 32));
  const BlockAndGap bg = block_and_gap(est, 0.1);
  REQUIRE(bg.tau_positions == std::vector<int>{1, 3});
  CHECK(bg.blocks[0] == doctest::Approx(std::log(4.0)).epsilon(1e-10));
  CHECK(bg.blocks[1] == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("filtration of a constant gap cocycle is the coordinate flag") {
  const Cocycle A = sample_gallery("const-diag");
  const Signature tau({1, 2}, 3);
  const QuadratureGrid grid(1, 32);
  const FiltrationField field = oseledets_filtration_grid(A, tau, 8, grid);
  CHECK(field.defined_fraction == 1.0);
  Eigen::MatrixXd coord = Eigen::MatrixXd::Identity(3, 3).leftCols(2);
  const Flag expect{tau, coord};
  for (const auto& f : field.flags) {
    REQUIRE(f.has_value());
    CHECK(flag_distance(*f, expect) <= 1e-12);
  }
}

TEST_CASE("filtration scales converge on the gap fixture") {
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const Signature tau({1, 2}, 3);
  const QuadratureGrid grid(1, 128);
  const FiltrationField f8 = oseledets_filtration_grid(A, tau, 8, grid);
  const FiltrationField f32 = oseledets_filtration_grid(A, tau, 32, grid);
  const FiltrationField f64 = oseledets_filtration_grid(A, tau, 64, grid);
  const FiltrationField f128 = oseledets_filtration_grid(A, tau, 128, grid);
  CHECK(f32.defined_fraction == 1.0);
  CHECK(f64.defined_fraction == 1.0);
  const double d_coarse = filtration_distance(f8, f32);
  const double d_fine = filtration_distance(f32, f128);
  CHECK(d_fine < d_coarse);
  CHECK(filtration_distance(f8, f8) <= 1e-14);
}

TEST_CASE("filtration distance counts undefined nodes at the diameter") {
  const Signature tau({1}, 2);
  const QuadratureGrid grid(1, 4);
  FiltrationField a{tau, 1, grid, {}, 0.0};
  FiltrationField b{tau, 1, grid, {}, 0.0};
  Eigen::MatrixXd e1 = Eigen::MatrixXd::Identity(2, 2).leftCols(1);
  Eigen::MatrixXd e2 = Eigen::MatrixXd::Identity(2, 2).rightCols(1);
  a.flags.assign(4, Flag{tau, e1});
  b.flags.assign(4, Flag{tau, e2});
  CHECK(filtration_distance(a, b) == doctest::Approx(1.0));
  b.flags[0] = std::nullopt;  // undefined also counts as 1
  CHECK(filtration_distance(a, b) == doctest::Approx(1.0));
  b.flags.assign(4, Flag{tau, e1});
  b.flags[1] = std::nullopt;
  CHECK(filtration_distance(a, b) == doctest::Approx(0.25));
}

TEST_CASE("filtration distance satisfies the triangle inequality") {
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const Signature tau({1, 2}, 3);
  const QuadratureGrid grid(1, 64);
  const FiltrationField f1 = oseledets_filtration_grid(A, tau, 4, grid);
  const FiltrationField f2 = oseledets_filtration_grid(A, tau, 16, grid);
  const FiltrationField f3 = oseledets_filtration_grid(A, tau, 64, grid);
  const double d12 = filtration_distance(f1, f2);
  const double d23 = filtration_distance(f2, f3);
  const double d13 = filtration_distance(f1, f3);
  CHECK(d13 <= d12 + d23 + 1e-10);
}

TEST_CASE("ledger arithmetic on the reference vector") {
  LedgerState st{1.0, 0.1, 0.05, 0.02, 10.0, 100.0, 10000.0};
  const LedgerResult res = inductive_ledger(st);
  CHECK(res.gamma1 == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(res.eta1 == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("ledger validity is strict in delta") {
  // delta exactly at (gamma - 4 eta) / 10 must be rejected.
  LedgerState st{1.0, 0.1, 0.06, 1e-4, 2.0, 1e6, 2e6};
  st.delta = (st.gamma - 4.0 * st.eta) / 10.0;
  const LedgerResult res = inductive_ledger(st);
  CHECK_FALSE(res.valid);
  bool found = false;
  for (const auto& v : res.violations) found = found || v.find("delta >=") == 0;
  CHECK(found);
}

TEST_CASE("ledger accepts a consistent state") {
  // c = 1/4, delta = 0.05 -> c delta^3 / 2 = 1.5625e-5; n0 = 1e7 gives
  // n0^{-3/4} ~ 1.8e-6, so delta_bar = 1e-5 fits, and n1 = 2 n0 stays far
  // below n0 exp(delta_bar n0).
  LedgerState st{1.0, 0.1, 0.05, 1e-5, 2.0, 1e7, 2e7};
  const LedgerResult res = inductive_ledger(st);
  CHECK(res.valid);
  CHECK(res.violations.empty());
}

TEST_CASE("uniformgaps schedule sums below twice the first term") {
  const GapSchedule sched = uniformgaps_schedule(64.0, 10);
  REQUIRE(sched.deltas.size() == 10);
  CHECK(sched.deltas[0] == doctest::Approx(0.5).epsilon(1e-14));  // 64^{-1/6} = 1/2
  CHECK(sched.sum < sched.bound);
  CHECK(sched.bound == doctest::Approx(1.0).epsilon(1e-14));
  // n_{k+1} = n_k^2 makes delta_k = 2^{-2^k} here.
  CHECK(sched.deltas[3] == doctest::Approx(std::pow(2.0, -8.0)).epsilon(1e-12));
}

TEST_CASE("rate fit vanishes for constant cocycles") {
  const Cocycle A = sample_gallery("const-diag");
  const RateFit fit = rate_fit(A, TopProduct{1}, {4, 8, 16, 32}, QuadratureGrid(1, 64));
  CHECK(std::abs(fit.K) <= 1e-10);
  CHECK(fit.max_deviation <= 1e-12);
}

TEST_CASE("rate fit envelope on the gap fixture") {
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const Signature tau({1, 2}, 3);
  const RateFit fit = rate_fit(A, BlockProduct{tau, 1}, {4, 8, 16, 32, 64, 128},
                               QuadratureGrid(1, 256));
  CHECK(fit.K > 0.0);
  CHECK(fit.residual <= 0.2 * fit.max_deviation);
  // Minimal envelopes: K_env (log n)/n covers every deviation, and at the
  // reference scale it dominates the minimal 1/n envelope (the (log n)/n
  // form is the more conservative of the two).
  for (size_t s = 0; s + 1 < 6; ++s) {
    const int n = std::vector<int>{4, 8, 16, 32, 64, 128}[s];
    CHECK(fit.deviations[s] <= fit.K_envelope * std::log(double(n)) / n + 1e-15);
  }
  CHECK(fit.K_envelope * std::log(128.0) >= fit.K_envelope_inverse - 1e-15);
}

TEST_CASE("holder probe flags a vanishing direction as degenerate") {
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const Signature tau({1, 2}, 3);
  const Cocycle zero = add_scaled(A, A, -1.0);
  const HolderProbe probe = holder_probe(A, tau, TopProduct{1}, zero,
                                         {1e-2, 1e-3, 1e-4}, 16, QuadratureGrid(1, 64));
  CHECK(probe.degenerate);
}

TEST_CASE("holder probe sees the smooth determinant block") {
  // Lambda_{p_m} is an explicit integral, so the response is linear in h.
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const Signature tau({1, 2}, 3);
  Rng rng(3);
  Eigen::Matrix3d D = random_gaussian(3, 3, rng);
  const Cocycle dir = constant_cocycle(D, golden1d(), 0.25);
  const HolderProbe probe = holder_probe(A, tau, TopProduct{3}, dir,
                                         {1e-2, 1e-3, 1e-4, 1e-5}, 8, QuadratureGrid(1, 128));
  REQUIRE_FALSE(probe.degenerate);
  CHECK(probe.theta == doctest::Approx(1.0).epsilon(0.05));
  CHECK(probe.r2 >= 0.99);
}

TEST_CASE("holder probe on the top block of the gap fixture") {
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const Signature tau({1, 2}, 3);
  Rng rng(5);
  Eigen::Matrix3d D = random_gaussian(3, 3, rng);
  const Cocycle dir = constant_cocycle(D, golden1d(), 0.25);
  const HolderProbe probe = holder_probe(A, tau, TopProduct{1}, dir,
                                         {1e-2, 1e-3, 1e-4, 1e-5}, 32, QuadratureGrid(1, 128));
  REQUIRE_FALSE(probe.degenerate);
  CHECK(probe.theta > 0.0);
  CHECK(probe.theta <= 1.2);
  CHECK(probe.r2 >= 0.9);
}

TEST_CASE("holder probe needs a gap at the probe scale") {
  const Cocycle A = sample_gallery("rotation");
  const Signature tau({1}, 2);
  Rng rng(7);
  Eigen::Matrix2d D = random_gaussian(2, 2, rng);
  const Cocycle dir = constant_cocycle(D, golden1d(), 0.25);
  CHECK_THROWS_AS(
      holder_probe(A, tau, TopProduct{1}, dir, {1e-3}, 16, QuadratureGrid(1, 64)), NoGap);
}

TEST_CASE("lemma checks hold with empty bad sets on a constant gap cocycle") {
  const Cocycle A = sample_gallery("const-diag");
  const LemmaChecksReport rep =
      lemma_checks(A, Signature({1, 2}, 3), 8, 0.05, QuadratureGrid(1, 64));
  CHECK(rep.all_hold);
  for (const auto& item : rep.pointwise_gap) CHECK(item.bad_measure == 0.0);
  for (const auto& item : rep.angle_lower_bound) CHECK(item.bad_measure == 0.0);
}

TEST_CASE("lemma checks hold on almost mathieu") {
  const Cocycle A = sample_gallery("am-lambda3");
  const LemmaChecksReport rep =
      lemma_checks(A, Signature({1}, 2), 100, 0.1, QuadratureGrid(1, 256));
  CHECK(rep.all_hold);
}

TEST_CASE("block values shift correctly under scalar rescaling") {
  // Scaling the cocycle by c > 0 leaves rho-values unchanged and shifts each
  // block by (block size) * log c.
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const Cocycle B = add_scaled(A, A, 1.0);  // 2 A
  const QuadratureGrid grid(1, 128);
  const int n = 16;
  const double rho_A = finite_scale_average(A, RatioRho{1}, n, grid);
  const double rho_B = finite_scale_average(B, RatioRho{1}, n, grid);
  CHECK(std::abs(rho_A - rho_B) <= 1e-12);
  const Signature tau({1, 2}, 3);
  const double blk_A = finite_scale_average(A, BlockProduct{tau, 2}, n, grid);
  const double blk_B = finite_scale_average(B, BlockProduct{tau, 2}, n, grid);
  CHECK(blk_B - blk_A == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}
