#include "cocyclelab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "cocyclelab/parallel.hpp"

namespace cocyclelab {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

bool k_less(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

bool k_equal(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

// ---------------------------------------------------------------------------
// TrigPoly
// ---------------------------------------------------------------------------

TrigPoly TrigPoly::constant(int d, std::complex<double> c) {
  TrigPoly p(d);
  p.add_term(Eigen::VectorXi::Zero(d), c);
  return p;
}

void TrigPoly::add_term(const Eigen::VectorXi& k, std::complex<double> c) {
  if (k.size() != d_) throw DimMismatch("trig poly: wrong frequency dimension");
  auto it = std::lower_bound(terms_.begin(), terms_.end(), k,
                             [](const TrigTerm& t, const Eigen::VectorXi& key) {
                               return k_less(t.k, key);
                             });
  if (it != terms_.end() && k_equal(it->k, k)) {
    it->coeff += c;
  } else {
    terms_.insert(it, TrigTerm{k, c});
  }
}

std::complex<double> TrigPoly::eval(const Eigen::VectorXcd& z) const {
  std::complex<double> acc(0.0, 0.0);
  for (const auto& t : terms_) {
    std::complex<double> phase(0.0, 0.0);
    for (int i = 0; i < d_; ++i) phase += double(t.k(i)) * z(i);
    acc += t.coeff * std::exp(std::complex<double>(0.0, kTwoPi) * phase);
  }
  return acc;
}

std::complex<double> TrigPoly::eval_real(const Eigen::VectorXd& x) const {
  std::complex<double> acc(0.0, 0.0);
  for (const auto& t : terms_) {
    double phase = 0.0;
    for (int i = 0; i < d_; ++i) phase += double(t.k(i)) * x(i);
    acc += t.coeff * std::polar(1.0, kTwoPi * phase);
  }
  return acc;
}

bool TrigPoly::conjugate_symmetric(double tol) const {
  for (const auto& t : terms_) {
    const Eigen::VectorXi neg = -t.k;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), neg,
                               [](const TrigTerm& a, const Eigen::VectorXi& key) {
                                 return k_less(a.k, key);
                               });
    const std::complex<double> mirror =
        (it != terms_.end() && k_equal(it->k, neg)) ? it->coeff : std::complex<double>(0, 0);
    if (std::abs(mirror - std::conj(t.coeff)) > tol) return false;
  }
  return true;
}

TrigPoly TrigPoly::real_part() const {
  TrigPoly out(d_);
  for (const auto& t : terms_) {
    out.add_term(t.k, 0.5 * t.coeff);
    out.add_term(-t.k, 0.5 * std::conj(t.coeff));
  }
  return out;
}

TrigPoly TrigPoly::imag_part() const {
  TrigPoly out(d_);
  const std::complex<double> half_over_i(0.0, -0.5);  // 1/(2i)
  for (const auto& t : terms_) {
    out.add_term(t.k, half_over_i * t.coeff);
    out.add_term(-t.k, -half_over_i * std::conj(t.coeff));
  }
  return out;
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
  if (o.d_ != d_) throw DimMismatch("trig poly: dimension mismatch");
  TrigPoly out = *this;
  for (const auto& t : o.terms_) out.add_term(t.k, t.coeff);
  return out;
}

TrigPoly TrigPoly::operator-(const TrigPoly& o) const { return *this + o * (-1.0); }

TrigPoly TrigPoly::operator*(double s) const {
  TrigPoly out = *this;
  for (auto& t : out.terms_) t.coeff *= s;
  return out;
}

Eigen::MatrixXcd TrigPolyMat::eval(const Eigen::VectorXcd& z) const {
  Eigen::MatrixXcd out(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out(i, j) = at(i, j).eval(z);
  return out;
}

// ---------------------------------------------------------------------------
// Cocycle handle + trig-poly implementation
// ---------------------------------------------------------------------------

namespace {

class TrigCocycleImpl final : public CocycleImpl {
 public:
  TrigCocycleImpl(TrigPolyMat entries, Frequency freq, double r, std::string name)
      : entries_(std::move(entries)), freq_(std::move(freq)), r_(r), name_(std::move(name)) {
    if (r_ <= 0.0) throw DomainError("cocycle: strip width must be positive");
    for (int i = 0; i < entries_.m; ++i)
      for (int j = 0; j < entries_.m; ++j)
        if (!entries_.at(i, j).conjugate_symmetric())
          throw DomainError("cocycle: entries must be real valued on the torus");
  }

  int dim() const override { return entries_.m; }
  double width() const override { return r_; }
  const Frequency& frequency() const override { return freq_; }
  Eigen::MatrixXcd eval_complex(const Eigen::VectorXcd& z) const override {
    return entries_.eval(z);
  }
  const TrigPolyMat* coefficients() const override { return &entries_; }
  std::string describe() const override { return name_; }

 private:
  TrigPolyMat entries_;
  Frequency freq_;
  double r_;
  std::string name_;
};

}  // namespace

Eigen::MatrixXcd Cocycle::eval_complex(const Eigen::VectorXcd& z) const {
  if (z.size() != base_dim()) throw DimMismatch("cocycle eval: wrong base dimension");
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (std::abs(z(i).imag()) > width() * (1.0 + 1e-12))
      throw OutsideStrip("cocycle eval: point outside the strip");
  return impl_->eval_complex(z);
}

Eigen::MatrixXd Cocycle::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXcd z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) z(i) = x(i);
  const Eigen::MatrixXcd v = eval_complex(z);
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  if (v.imag().cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("cocycle eval: non-real value on the real torus");
  return v.real();
}

const TrigPolyMat& Cocycle::coefficients() const {
  const TrigPolyMat* c = impl_->coefficients();
  if (!c) throw DomainError("cocycle: composite evaluator has no coefficient form");
  return *c;
}

Cocycle make_trig_cocycle(TrigPolyMat entries, Frequency freq, double r, std::string name) {
  if (entries.m < 1 ||
      entries.entries.size() != static_cast<size_t>(entries.m) * static_cast<size_t>(entries.m))
    throw DimMismatch("cocycle: entries must form an m x m matrix");
  return Cocycle(std::make_shared<TrigCocycleImpl>(std::move(entries), std::move(freq), r,
                                                   std::move(name)));
}

Cocycle constant_cocycle(const Eigen::Ref<const Eigen::MatrixXd>& g, Frequency freq,
                         double r, std::string name) {
  const int m = static_cast<int>(g.rows());
  TrigPolyMat mat;
  mat.m = m;
  mat.entries.assign(static_cast<size_t>(m) * m, TrigPoly(freq.d()));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      mat.at(i, j) = TrigPoly::constant(freq.d(), g(i, j));
  return make_trig_cocycle(std::move(mat), std::move(freq), r, std::move(name));
}

Cocycle add_scaled(const Cocycle& A, const Cocycle& B, double h) {
  const TrigPolyMat& a = A.coefficients();
  const TrigPolyMat& b = B.coefficients();
  if (a.m != b.m || A.base_dim() != B.base_dim())
    throw DimMismatch("add_scaled: cocycle shapes differ");
  TrigPolyMat out;
  out.m = a.m;
  out.entries.reserve(a.entries.size());
  for (size_t i = 0; i < a.entries.size(); ++i)
    out.entries.push_back(a.entries[i] + b.entries[i] * h);
  return make_trig_cocycle(std::move(out), A.frequency(), std::min(A.width(), B.width()),
                           A.describe() + "+perturbation");
}

// ---------------------------------------------------------------------------
// Strip norms
// ---------------------------------------------------------------------------

namespace {

// Applies fn to every boundary node z = x + i * (signs * r), faces
// Im z in {-r, +r}^d sampled on the grid.
void for_each_boundary_node(const Cocycle& A, const QuadratureGrid& grid,
                            const std::function<void(long, const Eigen::VectorXcd&)>& fn) {
  const int d = A.base_dim();
  if (grid.d != d) throw GridMismatch("strip norms: grid dimension mismatch");
  const double r = A.width();
  const long faces = 1L << d;
  const long per_face = grid.total();
  for (long f = 0; f < faces; ++f) {
    for (long i = 0; i < per_face; ++i) {
      const Eigen::VectorXd x = grid.node(i);
      Eigen::VectorXcd z(d);
      for (int c = 0; c < d; ++c) {
        const double sign = ((f >> c) & 1) ? -1.0 : 1.0;
        z(c) = std::complex<double>(x(c), sign * r);
      }
      fn(f * per_face + i, z);
    }
  }
}

}  // namespace

void validate_invertible_on_torus(const Cocycle& A, const QuadratureGrid& grid,
                                  double tol_inv) {
  if (grid.d != A.base_dim()) throw GridMismatch("validate: grid dimension mismatch");
  const long total = grid.total();
  std::vector<double> ratio(static_cast<size_t>(total));
  parallel_for(total, [&](long i) {
    const Eigen::VectorXd s = singular_values(A.eval(grid.node(i)));
    ratio[static_cast<size_t>(i)] = s(s.size() - 1) / s(0);
  });
  for (double q : ratio)
    if (!(q > tol_inv)) throw SingularOnTorus("cocycle is singular on the torus grid");
}

StripNorms strip_norms(const Cocycle& A, const QuadratureGrid& grid) {
  validate_invertible_on_torus(A, grid);
  const int m = A.dim();
  const long faces = 1L << A.base_dim();
  const long total = faces * grid.total();
  std::vector<double> hi(static_cast<size_t>(total)), lo(static_cast<size_t>(total));
  // Collect per-node extremes, then reduce deterministically.
  std::vector<Eigen::VectorXcd> nodes(static_cast<size_t>(total));
  for_each_boundary_node(A, grid, [&](long idx, const Eigen::VectorXcd& z) {
    nodes[static_cast<size_t>(idx)] = z;
  });
  parallel_for(total, [&](long i) {
    const Eigen::VectorXd s = singular_values(A.eval_complex(nodes[static_cast<size_t>(i)]));
    hi[static_cast<size_t>(i)] = s(0);
    lo[static_cast<size_t>(i)] = s(s.size() - 1);
  });
  double norm_A = 0.0, min_s = std::numeric_limits<double>::infinity();
  for (long i = 0; i < total; ++i) {
    norm_A = std::max(norm_A, hi[static_cast<size_t>(i)]);
    min_s = std::min(min_s, lo[static_cast<size_t>(i)]);
  }
  if (!(min_s > 0.0))
    throw SingularOnTorus("strip norms: cocycle singular on the strip boundary");
  StripNorms out;
  out.norm_A = norm_A;
  out.norm_Ainv = 1.0 / min_s;
  out.C_A = (double(m) * (m + 1) / A.width()) *
            (std::abs(std::log(out.norm_A)) + std::abs(std::log(out.norm_Ainv)) +
             std::log1p(out.norm_A));
  return out;
}

double strip_distance(const Cocycle& A, const Cocycle& B, int boundary_samples) {
  const TrigPolyMat& a = A.coefficients();
  const TrigPolyMat& b = B.coefficients();
  if (a.m != b.m || A.base_dim() != B.base_dim())
    throw DimMismatch("strip_distance: cocycle shapes differ");
  TrigPolyMat diff;
  diff.m = a.m;
  for (size_t i = 0; i < a.entries.size(); ++i)
    diff.entries.push_back(a.entries[i] - b.entries[i]);
  const double r = std::min(A.width(), B.width());
  const int d = A.base_dim();
  const int n = (d == 1) ? boundary_samples : std::max(8, boundary_samples / 8);
  const QuadratureGrid grid(d, n);
  double sup = 0.0;
  const long faces = 1L << d;
  for (long f = 0; f < faces; ++f) {
    for (long i = 0; i < grid.total(); ++i) {
      const Eigen::VectorXd x = grid.node(i);
      Eigen::VectorXcd z(d);
      for (int c = 0; c < d; ++c)
        z(c) = std::complex<double>(x(c), ((f >> c) & 1) ? -r : r);
      sup = std::max(sup, operator_norm(diff.eval(z)));
    }
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Iterates
// ---------------------------------------------------------------------------

namespace {

void advance(Eigen::VectorXd& x, const Eigen::VectorXd& omega) {
  x += omega;
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) -= std::floor(x(i));
}

// Walks the orbit once and feeds the wedge_j accumulators for every
// requested level; returns log p_j per level, plus (optionally) the final
// rescaled wedge matrices.
struct MultiWedgeResult {
  Eigen::VectorXd logp;                 // aligned with levels
  std::vector<WedgeIterate> iterates;   // filled when keep_matrices
};

MultiWedgeResult multi_wedge(const Cocycle& A, Eigen::VectorXd x, int n,
                             const std::vector<int>& levels, bool keep_matrices) {
  const int m = A.dim();
  if (n < 1) throw DomainError("iterate: n >= 1 required");
  for (int j : levels)
    if (j < 1 || j > m) throw DomainError("iterate: wedge level out of range");

  const size_t L = levels.size();
  std::vector<Eigen::MatrixXd> acc(L);
  std::vector<double> logscale(L, 0.0);
  for (size_t l = 0; l < L; ++l) {
    const long wd = static_cast<long>(combinations_colex(m, levels[l]).size());
    acc[l] = Eigen::MatrixXd::Identity(wd, wd);
  }

  const Eigen::VectorXd& omega = A.frequency().omega;
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd M = A.eval(x);
    // s_m <= tol_inv s_1 implies |det| <= tol_inv |M|^m, so this cheap test
    // fires on every matrix that fails the relative invertibility tolerance.
    if (!M.allFinite() ||
        std::abs(M.determinant()) <= kTolInv * std::pow(M.norm(), m))
      throw SingularOnOrbit("iterate: singular matrix on the orbit");
    for (size_t l = 0; l < L; ++l) {
      const Eigen::MatrixXd W =
          (levels[l] == 1) ? M : exterior_power(M, levels[l]);
      acc[l] = W * acc[l];
      const double f = acc[l].norm();
      if (!(f > 0.0) || !std::isfinite(f))
        throw SingularOnOrbit("iterate: wedge product degenerated");
      acc[l] /= f;
      logscale[l] += std::log(f);
    }
    advance(x, omega);
  }

  MultiWedgeResult out;
  out.logp.resize(static_cast<Eigen::Index>(L));
  for (size_t l = 0; l < L; ++l)
    out.logp(static_cast<Eigen::Index>(l)) = logscale[l] + std::log(operator_norm(acc[l]));
  if (keep_matrices) {
    out.iterates.reserve(L);
    for (size_t l = 0; l < L; ++l)
      out.iterates.push_back(WedgeIterate{std::move(acc[l]), logscale[l]});
  }
  return out;
}

std::vector<int> levels_for(const SvFormula& s, int m) {
  const auto coeffs = svf_log_coeffs(s, m);
  std::vector<int> levels;
  for (int j = 1; j <= m; ++j)
    if (coeffs[static_cast<size_t>(j) - 1] != 0) levels.push_back(j);
  return levels;
}

double combine(const SvFormula& s, int m, const std::vector<int>& levels,
               const Eigen::VectorXd& logp_levels) {
  const auto coeffs = svf_log_coeffs(s, m);
  double acc = 0.0;
  for (size_t l = 0; l < levels.size(); ++l)
    acc += coeffs[static_cast<size_t>(levels[l]) - 1] * logp_levels(static_cast<Eigen::Index>(l));
  return acc;
}

}  // namespace

double iterate_logp(const Cocycle& A, const Eigen::VectorXd& x, int n, int j) {
  return multi_wedge(A, x, n, {j}, false).logp(0);
}

Eigen::VectorXd iterate_logp_all(const Cocycle& A, const Eigen::VectorXd& x, int n) {
  std::vector<int> levels(static_cast<size_t>(A.dim()));
  for (int j = 1; j <= A.dim(); ++j) levels[static_cast<size_t>(j) - 1] = j;
  return multi_wedge(A, x, n, levels, false).logp;
}

WedgeIterate iterate_wedge(const Cocycle& A, const Eigen::VectorXd& x, int n, int j) {
  auto res = multi_wedge(A, x, n, {j}, true);
  return std::move(res.iterates[0]);
}

ProductIterate iterate_product(const Cocycle& A, const Eigen::VectorXd& x, int n,
                               const std::vector<int>& keep_levels) {
  const int m = A.dim();
  std::vector<int> levels(static_cast<size_t>(m));
  for (int j = 1; j <= m; ++j) levels[static_cast<size_t>(j) - 1] = j;
  auto res = multi_wedge(A, x, n, levels, true);
  ProductIterate out;
  out.logp = std::move(res.logp);
  out.wedges.reserve(keep_levels.size());
  for (int j : keep_levels) {
    if (j < 1 || j > m) throw DomainError("iterate_product: level out of range");
    out.wedges.push_back(std::move(res.iterates[static_cast<size_t>(j) - 1]));
  }
  return out;
}

Eigen::VectorXd pointwise_log_svf(const Cocycle& A, const SvFormula& s, int n,
                                  const QuadratureGrid& grid) {
  if (grid.d != A.base_dim()) throw GridMismatch("pointwise_log_svf: grid mismatch");
  const int m = A.dim();
  const auto levels = levels_for(s, m);
  const long total = grid.total();
  Eigen::VectorXd values(total);
  std::exception_ptr error;
  std::mutex error_mutex;
  parallel_for(total, [&](long i) {
    try {
      const auto res = multi_wedge(A, grid.node(i), n, levels, false);
      values(i) = combine(s, m, levels, res.logp) / n;
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);
  return values;
}

double finite_scale_average(const Cocycle& A, const SvFormula& s, int n,
                            const QuadratureGrid& grid) {
  const Eigen::VectorXd values = pointwise_log_svf(A, s, n, grid);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) acc += values(i);
  return acc / double(values.size());
}

double almost_invariance(const Cocycle& A, const SvFormula& s, int n,
                         const QuadratureGrid& grid) {
  if (grid.d != A.base_dim()) throw GridMismatch("almost_invariance: grid mismatch");
  const int m = A.dim();
  const auto levels = levels_for(s, m);
  const long total = grid.total();
  Eigen::VectorXd gaps(total);
  std::exception_ptr error;
  std::mutex error_mutex;
  parallel_for(total, [&](long i) {
    try {
      Eigen::VectorXd x = grid.node(i);
      const double u0 = combine(s, m, levels, multi_wedge(A, x, n, levels, false).logp) / n;
      advance(x, A.frequency().omega);
      const double u1 = combine(s, m, levels, multi_wedge(A, x, n, levels, false).logp) / n;
      gaps(i) = std::abs(u1 - u0);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);
  return gaps.maxCoeff();
}

DeviationReport ldt_deviation(const Cocycle& A, const SvFormula& s, int n, double delta,
                              const QuadratureGrid& grid) {
  if (!(delta > 0.0)) throw DomainError("ldt_deviation: delta must be positive");
  const Eigen::VectorXd values = pointwise_log_svf(A, s, n, grid);
  double avg = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) avg += values(i);
  avg /= double(values.size());
  long deviating = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::abs(values(i) - avg) > delta) ++deviating;

  const StripNorms norms = strip_norms(A, grid);
  DeviationReport rep;
  rep.n = n;
  rep.formula = svf_name(s);
  rep.delta = delta;
  rep.measure = double(deviating) / double(values.size());
  rep.average = avg;
  rep.c = 1.0 / (norms.C_A * norms.C_A);
  rep.bound_reference = std::exp(-rep.c * delta * delta * delta * n);
  return rep;
}

// ---------------------------------------------------------------------------
// Diophantine check
// ---------------------------------------------------------------------------

DiophantineReport diophantine_check(const Frequency& omega, double t, long K_max) {
  if (K_max < 2) throw DomainError("diophantine_check: K_max >= 2 required");
  const int d = omega.d();
  DiophantineReport rep;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  rep.worst_k = Eigen::VectorXi::Zero(d);

  if (d == 1) {
    const double w = omega.omega(0);
    for (long k = 2; k <= K_max; ++k) {
      const double lk = std::log(double(k));
      const double bound = t / (double(k) * lk * lk);
      const double ratio = torus_norm(double(k) * w) / bound;
      if (ratio < rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_k(0) = static_cast<int>(k);
      }
    }
  } else {
    // Standard condition |k.omega| >= t / |k|^{d+1} over the sup-norm ball,
    // scanning the canonical half lattice (k and -k are equivalent).
    const int K = static_cast<int>(K_max);
    Eigen::VectorXi k = Eigen::VectorXi::Constant(d, -K);
    const long total = [&] {
      long p = 1;
      for (int i = 0; i < d; ++i) p *= (2L * K + 1);
      return p;
    }();
    for (long idx = 0; idx < total; ++idx) {
      long rem = idx;
      for (int i = 0; i < d; ++i) {
        k(i) = static_cast<int>(rem % (2L * K + 1)) - K;
        rem /= (2L * K + 1);
      }
      int sup = 0;
      int first_nonzero = 0;
      for (int i = 0; i < d; ++i) {
        sup = std::max(sup, std::abs(k(i)));
        if (first_nonzero == 0 && k(i) != 0) first_nonzero = k(i);
      }
      if (sup < 2 || first_nonzero < 0) continue;  // skip small and mirror half
      double dot = 0.0;
      for (int i = 0; i < d; ++i) dot += double(k(i)) * omega.omega(i);
      const double bound = t / std::pow(double(sup), d + 1);
      const double ratio = torus_norm(dot) / bound;
      if (ratio < rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_k = k;
      }
    }
  }
  rep.holds = rep.worst_ratio >= 1.0;
  return rep;
}

// ---------------------------------------------------------------------------
// JSON spec files
// ---------------------------------------------------------------------------

Cocycle load_cocycle_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("cocycle json: ") + e.what());
  }
  try {
    const int m = j.at("m").get<int>();
    const int d = j.at("d").get<int>();
    const double r = j.at("r").get<double>();
    Eigen::VectorXd w(d);
    const auto& om = j.at("omega");
    if (static_cast<int>(om.size()) != d) throw IoError("cocycle json: omega size != d");
    for (int i = 0; i < d; ++i) w(i) = om.at(static_cast<size_t>(i)).get<double>();
    const auto& entries = j.at("entries");
    if (static_cast<int>(entries.size()) != m * m)
      throw IoError("cocycle json: entries must hold m*m lists");
    TrigPolyMat mat;
    mat.m = m;
    mat.entries.assign(static_cast<size_t>(m) * m, TrigPoly(d));
    for (int e = 0; e < m * m; ++e) {
      TrigPoly poly(d);
      for (const auto& term : entries.at(static_cast<size_t>(e))) {
        const auto& kv = term.at("k");
        if (static_cast<int>(kv.size()) != d) throw IoError("cocycle json: k size != d");
        Eigen::VectorXi k(d);
        for (int i = 0; i < d; ++i) k(i) = kv.at(static_cast<size_t>(i)).get<int>();
        poly.add_term(k, {term.at("re").get<double>(), term.at("im").get<double>()});
      }
      mat.entries[static_cast<size_t>(e)] = std::move(poly);
    }
    return make_trig_cocycle(std::move(mat), Frequency(std::move(w)), r, "json");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("cocycle json: ") + e.what());
  }
}

Cocycle load_cocycle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cocycle file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_cocycle_json(ss.str());
}

std::string cocycle_to_json(const Cocycle& A) {
  const TrigPolyMat& mat = A.coefficients();
  nlohmann::json j;
  j["m"] = mat.m;
  j["d"] = A.base_dim();
  j["r"] = A.width();
  nlohmann::json om = nlohmann::json::array();
  for (int i = 0; i < A.base_dim(); ++i) om.push_back(A.frequency().omega(i));
  j["omega"] = om;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& poly : mat.entries) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : poly.terms()) {
      nlohmann::json term;
      nlohmann::json kv = nlohmann::json::array();
      for (int i = 0; i < t.k.size(); ++i) kv.push_back(t.k(i));
      term["k"] = kv;
      term["re"] = t.coeff.real();
      term["im"] = t.coeff.imag();
      terms.push_back(term);
    }
    entries.push_back(terms);
  }
  j["entries"] = entries;
  return j.dump(2);
}

}  // namespace cocyclelab
