#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "cocyclelab/models.hpp"
#include "cocyclelab/spectra.hpp"
#include "test_support.hpp"

using namespace cocyclelab;

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

Frequency golden1d() { return Frequency{Eigen::VectorXd::Constant(1, golden_mean())}; }

Eigen::VectorXd point1d(double x) { return Eigen::VectorXd::Constant(1, x); }

TrigPoly cosine(double amplitude) {
  TrigPoly p(1);
  p.add_term(Eigen::VectorXi::Constant(1, 1), {amplitude / 2.0, 0.0});
  p.add_term(Eigen::VectorXi::Constant(1, -1), {amplitude / 2.0, 0.0});
  return p;
}

JacobiData banded_fixture() {
  JacobiData data;
  data.d_band = 2;
  data.lambda = 2.0;
  data.E = 0.3;
  data.r = 0.2;
  data.W.m = 2;
  data.W.entries.assign(4, TrigPoly(1));
  data.W.at(0, 0) = TrigPoly::constant(1, 1.5) + cosine(0.2);
  data.W.at(0, 1) = cosine(0.1);
  data.W.at(1, 0) = TrigPoly::constant(1, 0.1);
  data.W.at(1, 1) = TrigPoly::constant(1, 1.2);
  data.R.m = 2;
  data.R.entries.assign(4, TrigPoly(1));
  data.R.at(0, 0) = cosine(0.4);
  data.R.at(0, 1) = cosine(0.2);
  data.R.at(1, 0) = cosine(0.2);
  data.R.at(1, 1) = TrigPoly::constant(1, 0.5);
  data.D.m = 2;
  data.D.entries.assign(4, TrigPoly(1));
  data.D.at(0, 0) = cosine(2.0);
  data.D.at(0, 1) = TrigPoly(1);
  data.D.at(1, 0) = TrigPoly(1);
  data.D.at(1, 1) = cosine(1.0) + TrigPoly::constant(1, 0.2);
  return data;
}

}  // namespace

TEST_CASE("scalar jacobi data reproduces the almost mathieu transfer matrix") {
  JacobiData data;
  data.d_band = 1;
  data.lambda = 3.0;
  data.E = 0.7;
  data.r = 0.25;
  data.W.m = 1;
  data.W.entries.assign(1, TrigPoly::constant(1, 1.0));
  data.R.m = 1;
  data.R.entries.assign(1, TrigPoly(1));
  data.D.m = 1;
  data.D.entries.assign(1, cosine(2.0));

  const Cocycle J = jacobi_cocycle(data, golden1d());
  const Cocycle AM = almost_mathieu(3.0, 0.7, golden1d());
  for (double x : {0.0, 0.17, 0.62, 0.93})
    CHECK((J.eval(point1d(x)) - AM.eval(point1d(x))).norm() <= 1e-13);
}

TEST_CASE("jacobi transfer matrix satisfies the block recursion") {
  const JacobiData data = banded_fixture();
  const Frequency omega = golden1d();
  const Cocycle J = jacobi_cocycle(data, omega);
  Rng rng(3);
  const double x0 = 0.31;

  Eigen::VectorXd psi_prev = random_gaussian(2, 1, rng);
  Eigen::VectorXd psi_cur = random_gaussian(2, 1, rng);
  Eigen::VectorXd state(4);
  state << psi_cur, psi_prev;

  auto eval_real = [&](const TrigPolyMat& M, double x) {
    Eigen::VectorXcd z(1);
    z(0) = x;
    return Eigen::MatrixXd(M.eval(z).real());
  };

  double x = x0;
  for (int step = 0; step < 8; ++step) {
    // psi_{n+1} = W_{n+1}^{-1} [ (lambda D_n - R_n - E) psi_n - W_n^T psi_{n-1} ]
    const double x_next = x + omega.omega(0);
    const Eigen::MatrixXd Wnext = eval_real(data.W, x_next);
    const Eigen::MatrixXd Wcur = eval_real(data.W, x);
    const Eigen::MatrixXd rhs =
        (data.lambda * eval_real(data.D, x) - eval_real(data.R, x) -
         data.E * Eigen::MatrixXd::Identity(2, 2)) *
            psi_cur -
        Wcur.transpose() * psi_prev;
    const Eigen::VectorXd psi_next = Wnext.partialPivLu().solve(rhs);

    state = J.eval(point1d(x - std::floor(x))) * state;
    CHECK((state.head(2) - psi_next).norm() <= 1e-12 * (1.0 + psi_next.norm()));
    CHECK((state.tail(2) - psi_cur).norm() <= 1e-12 * (1.0 + psi_cur.norm()));

    psi_prev = psi_cur;
    psi_cur = psi_next;
    x = x_next;
  }
}

TEST_CASE("jacobi determinant identity forces a zero total exponent") {
  const JacobiData data = banded_fixture();
  const Frequency omega = golden1d();
  const Cocycle J = jacobi_cocycle(data, omega);

  // |det A(x)| = |det W(x)| / |det W(x+omega)| per the block structure.
  for (double x : {0.05, 0.4, 0.77}) {
    const Eigen::MatrixXd A = J.eval(point1d(x));
    Eigen::VectorXcd z(1), zn(1);
    z(0) = x;
    zn(0) = x + omega.omega(0);
    const double detW = std::abs(data.W.eval(z).determinant());
    const double detWn = std::abs(data.W.eval(zn).determinant());
    CHECK(std::abs(A.determinant()) == doctest::Approx(detW / detWn).epsilon(1e-12));
  }

  // Telescoping: Lambda_{p_{2d}} = 0 at every scale up to quadrature error.
  const QuadratureGrid grid(1, 512);
  for (int n : {1, 8, 32})
    CHECK(std::abs(finite_scale_average(J, TopProduct{4}, n, grid)) <= 1e-10);
}

TEST_CASE("jacobi rejects singular weights") {
  JacobiData data = banded_fixture();
  data.W.at(0, 0) = TrigPoly(1);
  data.W.at(0, 1) = TrigPoly(1);  // first row identically zero
  CHECK_THROWS_AS(jacobi_cocycle(data, golden1d()), WNotInvertible);
}

TEST_CASE("almost mathieu has unit determinant and zero exponent sum") {
  const Cocycle A = almost_mathieu(3.0, 0.0, golden1d());
  for (double x : {0.0, 0.2, 0.8})
    CHECK(std::abs(A.eval(point1d(x)).determinant() - 1.0) <= 1e-13);
  const QuadratureGrid grid(1, 256);
  const SpectrumEstimate est = lyapunov_estimate(A, {16, 64}, grid);
  for (Eigen::Index s = 0; s < est.exponents.rows(); ++s)
    CHECK(std::abs(est.exponents.row(s).sum()) <= 1e-10);
}

TEST_CASE("weakly coupled almost mathieu at an elliptic energy is rotation-like") {
  const double theta = 0.19;
  const Cocycle A = almost_mathieu(1e-4, 2.0 * std::cos(kTwoPi * theta), golden1d());
  const SpectrumEstimate est = lyapunov_estimate(A, {256}, QuadratureGrid(1, 256));
  CHECK(std::abs(est.extrapolated(0)) <= 1e-2);
}

TEST_CASE("realified cocycle evaluation commutes with matrix realification") {
  Rng rng(5);
  ComplexCocycle A{TrigPolyMat{}, golden1d(), 0.25};
  A.entries.m = 2;
  A.entries.entries.assign(4, TrigPoly(1));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int e = 0; e < 4; ++e) {
    TrigPoly p(1);
    p.add_term(Eigen::VectorXi::Zero(1), {normal(rng), normal(rng)});
    p.add_term(Eigen::VectorXi::Constant(1, 1), {0.3 * normal(rng), 0.3 * normal(rng)});
    p.add_term(Eigen::VectorXi::Constant(1, -1), {0.3 * normal(rng), 0.3 * normal(rng)});
    A.entries.entries[static_cast<size_t>(e)] = p;
  }
  const Cocycle R = realify_cocycle(A);
  for (double x : {0.0, 0.31, 0.64, 0.99}) {
    const Eigen::MatrixXd direct = realify(A.eval(point1d(x)));
    CHECK((R.eval(point1d(x)) - direct).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("unimodular complex phase realifies to a rotation cocycle") {
  ComplexCocycle A{TrigPolyMat{}, golden1d(), 0.25};
  A.entries.m = 1;
  TrigPoly p(1);
  p.add_term(Eigen::VectorXi::Constant(1, 1), {1.0, 0.0});  // e^{2 pi i x}
  A.entries.entries.assign(1, p);
  const Cocycle R = realify_cocycle(A);
  const Eigen::MatrixXd at_zero = R.eval(point1d(0.0));
  CHECK((at_zero - Eigen::Matrix2d::Identity()).norm() <= 1e-14);
  const SpectrumEstimate est = lyapunov_estimate(R, {64}, QuadratureGrid(1, 128));
  CHECK(std::abs(est.extrapolated(0)) <= 1e-10);
  CHECK(std::abs(est.extrapolated(1)) <= 1e-10);
}

TEST_CASE("realified spectrum doubles the complex block averages") {
  Rng rng(7);
  ComplexCocycle A{TrigPolyMat{}, golden1d(), 0.25};
  A.entries.m = 2;
  A.entries.entries.assign(4, TrigPoly(1));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int e = 0; e < 4; ++e) {
    TrigPoly p(1);
    const double diag_boost = (e % 3 == 0) ? 2.0 : 0.0;
    p.add_term(Eigen::VectorXi::Zero(1), {normal(rng) + diag_boost, normal(rng)});
    p.add_term(Eigen::VectorXi::Constant(1, 1), {0.2 * normal(rng), 0.2 * normal(rng)});
    A.entries.entries[static_cast<size_t>(e)] = p;
  }
  const Cocycle R = realify_cocycle(A);
  const int n = 64;
  const QuadratureGrid grid(1, 64);

  // Complex-arithmetic oracle for Lambda_{p_j}(A) on the same grid.
  Eigen::Vector2d lambda_complex = Eigen::Vector2d::Zero();
  for (long i = 0; i < grid.total(); ++i) {
    Eigen::VectorXd x = grid.node(i);
    Eigen::Matrix2cd prod = Eigen::Matrix2cd::Identity();
    double logscale = 0.0;
    for (int step = 0; step < n; ++step) {
      prod = A.eval(x) * prod;
      const double f = prod.norm();
      prod /= f;
      logscale += std::log(f);
      x(0) += golden_mean();
      x(0) -= std::floor(x(0));
    }
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::Matrix2cd>(prod).singularValues();
    lambda_complex(0) += (logscale + std::log(s(0))) / n;
  }
  // p_2 = |det| is multiplicative, so its log accumulates exactly and never
  // underflows the rescaled product.
  for (long i = 0; i < grid.total(); ++i) {
    Eigen::VectorXd x = grid.node(i);
    double logdet = 0.0;
    for (int step = 0; step < n; ++step) {
      logdet += std::log(std::abs(A.eval(x).determinant()));
      x(0) += golden_mean();
      x(0) -= std::floor(x(0));
    }
    lambda_complex(1) += logdet / n;
  }
  lambda_complex /= double(grid.total());

  // Duplicated singular values: Lambda_{p_{2j}}(realified) = 2 Lambda_{p_j}.
  const SpectrumEstimate est = lyapunov_estimate(R, {n}, grid);
  const double lam_p2_real = est.lambda_p(0, 1);
  const double lam_p4_real = est.lambda_p(0, 3);
  CHECK(lam_p2_real == doctest::Approx(2.0 * lambda_complex(0)).epsilon(1e-8));
  CHECK(lam_p4_real == doctest::Approx(2.0 * lambda_complex(1)).epsilon(1e-8));

  // Doubling of individual exponents at the finite scale.
  CHECK(std::abs(est.exponents(0, 0) - est.exponents(0, 1)) <= 1e-8);
  CHECK(std::abs(est.exponents(0, 2) - est.exponents(0, 3)) <= 1e-8);
}

TEST_CASE("gallery fixtures load, validate and round-trip through json") {
  for (const auto& name : gallery_names()) {
    const Cocycle A = sample_gallery(name);
    const QuadratureGrid grid(A.base_dim(), A.base_dim() == 1 ? 256 : 32);
    validate_invertible_on_torus(A, grid);
    const StripNorms norms = strip_norms(A, grid);
    CHECK(norms.C_A > 0.0);
    // Bit-exact coefficient round trip through the spec file format.
    const Cocycle B = load_cocycle_json(cocycle_to_json(A));
    REQUIRE(A.coefficients().entries.size() == B.coefficients().entries.size());
    for (size_t e = 0; e < A.coefficients().entries.size(); ++e) {
      const auto& ta = A.coefficients().entries[e].terms();
      const auto& tb = B.coefficients().entries[e].terms();
      REQUIRE(ta.size() == tb.size());
      for (size_t t = 0; t < ta.size(); ++t) {
        CHECK(ta[t].k == tb[t].k);
        CHECK(ta[t].coeff == tb[t].coeff);
      }
    }
  }
  CHECK_THROWS_AS(sample_gallery("no-such-fixture"), UnknownName);
}

TEST_CASE("diag-dominant-gap fixture carries a (1,2) gap at scale 64") {
  const Cocycle A = sample_gallery("diag-dominant-gap");
  const SpectrumEstimate est = lyapunov_estimate(A, {32, 64}, QuadratureGrid(1, 512));
  const Eigen::VectorXd L = est.extrapolated;
  CHECK(L(0) - L(1) >= 0.3);
  CHECK(L(1) - L(2) >= 0.3);
}

TEST_CASE("jacobi json round trip") {
  const std::string text = R"({
    "d_band": 1, "r": 0.25, "omega": [0.6180339887498949],
    "lambda": 3.0, "E": 0.0,
    "W": [[{"k": [0], "re": 1.0, "im": 0.0}]],
    "R": [[]],
    "D": [[{"k": [1], "re": 1.0, "im": 0.0}, {"k": [-1], "re": 1.0, "im": 0.0}]]
  })";
  const auto [data, omega] = load_jacobi_json(text);
  CHECK(data.d_band == 1);
  CHECK(data.lambda == 3.0);
  CHECK(omega.omega(0) == doctest::Approx(golden_mean()));
  const Cocycle J = jacobi_cocycle(data, omega);
  const Cocycle AM = almost_mathieu(3.0, 0.0, omega);
  CHECK((J.eval(point1d(0.3)) - AM.eval(point1d(0.3))).norm() <= 1e-13);
  CHECK_THROWS_AS(load_jacobi_json("{"), IoError);
}
