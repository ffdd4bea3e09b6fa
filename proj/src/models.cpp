#include "cocyclelab/models.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cocyclelab {

namespace {

TrigPoly cos_poly(int d, int axis, double amplitude) {
  TrigPoly p(d);
  Eigen::VectorXi k = Eigen::VectorXi::Zero(d);
  k(axis) = 1;
  p.add_term(k, {amplitude / 2.0, 0.0});
  p.add_term(-k, {amplitude / 2.0, 0.0});
  return p;
}

TrigPoly sin_poly(int d, int axis, double amplitude) {
  TrigPoly p(d);
  Eigen::VectorXi k = Eigen::VectorXi::Zero(d);
  k(axis) = 1;
  // sin = (e^{i.} - e^{-i.}) / (2i)
  p.add_term(k, {0.0, -amplitude / 2.0});
  p.add_term(-k, {0.0, amplitude / 2.0});
  return p;
}

void check_symmetric_on_grid(const TrigPolyMat& M, int d, const char* what) {
  const QuadratureGrid grid(d, 16);
  for (long i = 0; i < grid.total(); ++i) {
    Eigen::VectorXcd z(d);
    const Eigen::VectorXd x = grid.node(i);
    for (int c = 0; c < d; ++c) z(c) = x(c);
    const Eigen::MatrixXcd v = M.eval(z);
    if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw DomainError(std::string(what) + ": matrix map must be symmetric");
  }
}

}  // namespace

Eigen::MatrixXcd ComplexCocycle::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXcd z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) z(i) = x(i);
  return entries.eval(z);
}

Cocycle realify_cocycle(const ComplexCocycle& A) {
  const int m = A.dim();
  const int d = A.frequency.d();
  TrigPolyMat out;
  out.m = 2 * m;
  out.entries.assign(static_cast<size_t>(2 * m) * (2 * m), TrigPoly(d));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const TrigPoly re = A.entries.at(i, j).real_part();
      const TrigPoly im = A.entries.at(i, j).imag_part();
      out.at(2 * i, 2 * j) = re;
      out.at(2 * i, 2 * j + 1) = im * (-1.0);
      out.at(2 * i + 1, 2 * j) = im;
      out.at(2 * i + 1, 2 * j + 1) = re;
    }
  }
  return make_trig_cocycle(std::move(out), A.frequency, A.r, "realified");
}

namespace {

class JacobiCocycleImpl final : public CocycleImpl {
 public:
  JacobiCocycleImpl(JacobiData data, Frequency omega)
      : data_(std::move(data)), freq_(std::move(omega)) {
    if (data_.d_band < 1) throw DomainError("jacobi: d_band >= 1 required");
    if (!(data_.lambda > 0.0)) throw DomainError("jacobi: lambda > 0 required");
    if (data_.W.m != data_.d_band || data_.R.m != data_.d_band || data_.D.m != data_.d_band)
      throw DimMismatch("jacobi: W, R, D must be d_band x d_band");
    check_symmetric_on_grid(data_.R, freq_.d(), "jacobi R");
    check_symmetric_on_grid(data_.D, freq_.d(), "jacobi D");
    // W must be invertible on the closed strip; sample the torus and the
    // boundary lines.
    const QuadratureGrid grid(freq_.d(), 128);
    for (double level : {0.0, data_.r, -data_.r}) {
      for (long i = 0; i < grid.total(); ++i) {
        Eigen::VectorXcd z(freq_.d());
        const Eigen::VectorXd x = grid.node(i);
        for (int c = 0; c < freq_.d(); ++c) z(c) = std::complex<double>(x(c), level);
        const Eigen::VectorXd s = singular_values(Eigen::MatrixXcd(data_.W.eval(z)));
        if (!(s(s.size() - 1) > kTolInv * std::max(1.0, s(0))))
          throw WNotInvertible("jacobi: W singular inside the strip");
      }
    }
  }

  int dim() const override { return 2 * data_.d_band; }
  double width() const override { return data_.r; }
  const Frequency& frequency() const override { return freq_; }

  Eigen::MatrixXcd eval_complex(const Eigen::VectorXcd& z) const override {
    const int b = data_.d_band;
    Eigen::VectorXcd z_next = z;
    for (int c = 0; c < freq_.d(); ++c) z_next(c) += freq_.omega(c);
    const Eigen::MatrixXcd Wnext = data_.W.eval(z_next);
    const Eigen::MatrixXcd Wcur = data_.W.eval(z);
    const Eigen::MatrixXcd Rcur = data_.R.eval(z);
    const Eigen::MatrixXcd Dcur = data_.D.eval(z);
    const Eigen::MatrixXcd rhs =
        data_.lambda * Dcur - Rcur - data_.E * Eigen::MatrixXcd::Identity(b, b);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Wnext);
    Eigen::MatrixXcd out(2 * b, 2 * b);
    out.topLeftCorner(b, b) = lu.solve(rhs);
    out.topRightCorner(b, b) = -lu.solve(Wcur.transpose());
    out.bottomLeftCorner(b, b) = Eigen::MatrixXcd::Identity(b, b);
    out.bottomRightCorner(b, b) = Eigen::MatrixXcd::Zero(b, b);
    return out;
  }

  std::string describe() const override { return "jacobi-transfer"; }

 private:
  JacobiData data_;
  Frequency freq_;
};

}  // namespace

Cocycle jacobi_cocycle(const JacobiData& data, const Frequency& omega) {
  return Cocycle(std::make_shared<JacobiCocycleImpl>(data, omega));
}

Cocycle almost_mathieu(double lambda, double E, const Frequency& omega, double r) {
  if (!(lambda > 0.0)) throw DomainError("almost_mathieu: lambda > 0 required");
  const int d = omega.d();
  TrigPolyMat mat;
  mat.m = 2;
  mat.entries.assign(4, TrigPoly(d));
  mat.at(0, 0) = cos_poly(d, 0, 2.0 * lambda) + TrigPoly::constant(d, -E);
  mat.at(0, 1) = TrigPoly::constant(d, -1.0);
  mat.at(1, 0) = TrigPoly::constant(d, 1.0);
  mat.at(1, 1) = TrigPoly(d);
  return make_trig_cocycle(std::move(mat), omega, r, "almost-mathieu");
}

double golden_mean() { return 0.61803398874989484820; }

Cocycle sample_gallery(const std::string& name) {
  const Frequency golden{Eigen::VectorXd::Constant(1, golden_mean())};
  if (name == "const-diag") {
    Eigen::Matrix3d g = Eigen::Vector3d(4.0, 2.0, 1.0).asDiagonal();
    return constant_cocycle(g, golden, 0.5, "const-diag");
  }
  if (name == "rotation") {
    TrigPolyMat mat;
    mat.m = 2;
    mat.entries.assign(4, TrigPoly(1));
    mat.at(0, 0) = cos_poly(1, 0, 1.0);
    mat.at(0, 1) = sin_poly(1, 0, -1.0);
    mat.at(1, 0) = sin_poly(1, 0, 1.0);
    mat.at(1, 1) = cos_poly(1, 0, 1.0);
    return make_trig_cocycle(std::move(mat), golden, 0.25, "rotation");
  }
  if (name == "diag-dominant-gap") {
    TrigPolyMat mat;
    mat.m = 3;
    mat.entries.assign(9, TrigPoly(1));
    mat.at(0, 0) = TrigPoly::constant(1, 4.0) + cos_poly(1, 0, 0.1);
    mat.at(1, 1) = TrigPoly::constant(1, 2.0) + sin_poly(1, 0, 0.1);
    mat.at(2, 2) = TrigPoly::constant(1, 1.0) + cos_poly(1, 0, 0.05);
    mat.at(0, 1) = cos_poly(1, 0, 0.1);
    mat.at(1, 0) = sin_poly(1, 0, 0.1);
    mat.at(1, 2) = cos_poly(1, 0, 0.1);
    mat.at(2, 1) = sin_poly(1, 0, 0.1);
    mat.at(0, 2) = sin_poly(1, 0, 0.05);
    mat.at(2, 0) = cos_poly(1, 0, 0.05);
    return make_trig_cocycle(std::move(mat), golden, 0.25, "diag-dominant-gap");
  }
  if (name == "am-lambda3") {
    return almost_mathieu(3.0, 0.0, golden, 0.25);
  }
  if (name == "torus2d-demo") {
    Eigen::VectorXd w(2);
    w << 0.41421356237309515, golden_mean();  // sqrt(2)-1 and the golden mean
    const Frequency freq{w};
    TrigPolyMat mat;
    mat.m = 2;
    mat.entries.assign(4, TrigPoly(2));
    mat.at(0, 0) = TrigPoly::constant(2, 3.0) + cos_poly(2, 0, 0.2);
    mat.at(0, 1) = cos_poly(2, 1, 0.3);
    mat.at(1, 0) = sin_poly(2, 0, 0.3);
    mat.at(1, 1) = TrigPoly::constant(2, 1.0) + sin_poly(2, 1, 0.2);
    return make_trig_cocycle(std::move(mat), freq, 0.2, "torus2d-demo");
  }
  throw UnknownName("unknown gallery fixture: " + name);
}

std::vector<std::string> gallery_names() {
  return {"const-diag", "rotation", "diag-dominant-gap", "am-lambda3", "torus2d-demo"};
}

namespace {

TrigPolyMat parse_entries(const nlohmann::json& entries, int m, int d, const char* what) {
  if (static_cast<int>(entries.size()) != m * m)
    throw IoError(std::string(what) + ": entries must hold m*m lists");
  TrigPolyMat mat;
  mat.m = m;
  mat.entries.assign(static_cast<size_t>(m) * m, TrigPoly(d));
  for (int e = 0; e < m * m; ++e) {
    TrigPoly poly(d);
    for (const auto& term : entries.at(static_cast<size_t>(e))) {
      const auto& kv = term.at("k");
      if (static_cast<int>(kv.size()) != d) throw IoError(std::string(what) + ": k size != d");
      Eigen::VectorXi k(d);
      for (int i = 0; i < d; ++i) k(i) = kv.at(static_cast<size_t>(i)).get<int>();
      poly.add_term(k, {term.at("re").get<double>(), term.at("im").get<double>()});
    }
    mat.entries[static_cast<size_t>(e)] = std::move(poly);
  }
  return mat;
}

}  // namespace

std::pair<JacobiData, Frequency> load_jacobi_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("jacobi json: ") + e.what());
  }
  try {
    JacobiData data;
    data.d_band = j.at("d_band").get<int>();
    data.r = j.at("r").get<double>();
    data.lambda = j.at("lambda").get<double>();
    data.E = j.at("E").get<double>();
    const auto& om = j.at("omega");
    const int d = static_cast<int>(om.size());
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i) w(i) = om.at(static_cast<size_t>(i)).get<double>();
    data.W = parse_entries(j.at("W"), data.d_band, d, "jacobi W");
    data.R = parse_entries(j.at("R"), data.d_band, d, "jacobi R");
    data.D = parse_entries(j.at("D"), data.d_band, d, "jacobi D");
    return {std::move(data), Frequency(std::move(w))};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("jacobi json: ") + e.what());
  }
}

std::pair<JacobiData, Frequency> load_jacobi_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open jacobi file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_jacobi_json(ss.str());
}

}  // namespace cocyclelab
