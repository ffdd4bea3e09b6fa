#include "cocyclelab/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>

namespace cocyclelab {

namespace {

void check_index(int j, int lo, int hi, const char* what) {
  if (j < lo || j > hi) throw DomainError(std::string(what) + ": index out of range");
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> exterior_power_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& g, int j) {
  const int m = static_cast<int>(g.rows());
  if (g.cols() != m) throw DimMismatch("exterior_power: matrix must be square");
  check_index(j, 1, m, "exterior_power");
  const auto sets = combinations_colex(m, j);
  const int n = static_cast<int>(sets.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> minor_(j, j);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      for (int a = 0; a < j; ++a)
        for (int b = 0; b < j; ++b) minor_(a, b) = g(sets[r][a], sets[c][b]);
      out(r, c) = minor_.determinant();
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> combinations_colex(int m, int j) {
  std::vector<std::vector<int>> sets;
  if (j < 0 || j > m) return sets;
  std::vector<int> cur(j);
  // Colex order = lexicographic order of the reversed tuple; generate by
  // odometer on the largest element last.
  std::function<void(int, int)> rec = [&](int pos, int max_excl) {
    if (pos < 0) {
      sets.push_back(cur);
      return;
    }
    for (int v = pos; v < max_excl; ++v) {
      cur[pos] = v;
      rec(pos - 1, v);
    }
  };
  if (j == 0) {
    sets.push_back({});
    return sets;
  }
  rec(j - 1, m);
  return sets;
}

Eigen::MatrixXd exterior_power(const Eigen::Ref<const Eigen::MatrixXd>& g, int j) {
  Eigen::MatrixXd G = g;
  return exterior_power_impl<double>(G, j);
}

Eigen::MatrixXcd exterior_power(const Eigen::Ref<const Eigen::MatrixXcd>& g, int j) {
  Eigen::MatrixXcd G = g;
  return exterior_power_impl<std::complex<double>>(G, j);
}

Eigen::VectorXd wedge_vector_insert(const Eigen::Ref<const Eigen::VectorXd>& u,
                                    const Eigen::Ref<const Eigen::VectorXd>& w, int m,
                                    int j) {
  const auto sets_j = combinations_colex(m, j);
  const auto sets_j1 = combinations_colex(m, j + 1);
  if (w.size() != static_cast<Eigen::Index>(sets_j.size()))
    throw DimMismatch("wedge_vector_insert: w has wrong length");
  if (u.size() != m) throw DimMismatch("wedge_vector_insert: u has wrong length");

  // Map from a sorted index set of size j to its colex rank.
  std::map<std::vector<int>, int> rank;
  for (int i = 0; i < static_cast<int>(sets_j.size()); ++i) rank[sets_j[i]] = i;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sets_j1.size()));
  std::vector<int> rest(static_cast<size_t>(j));
  for (int t = 0; t < static_cast<int>(sets_j1.size()); ++t) {
    const auto& K = sets_j1[t];
    double acc = 0.0;
    for (int p = 0; p <= j; ++p) {
      // e_i ^ e_{K \ i} = (-1)^{#elements of K\i below i} e_K; here that
      // count is exactly p, the position of i inside K.
      const int i = K[static_cast<size_t>(p)];
      int q = 0;
      for (int s = 0; s <= j; ++s)
        if (s != p) rest[static_cast<size_t>(q++)] = K[static_cast<size_t>(s)];
      const double sign = (p % 2 == 0) ? 1.0 : -1.0;
      acc += sign * u(i) * w(rank.at(rest));
    }
    out(t) = acc;
  }
  return out;
}

std::vector<int> svf_log_coeffs(const SvFormula& f, int m) {
  std::vector<int> c(static_cast<size_t>(m), 0);
  auto at = [&](int j) -> int& { return c.at(static_cast<size_t>(j) - 1); };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SingularValue>) {
          check_index(v.j, 1, m, "svf s_j");
          at(v.j) += 1;
          if (v.j > 1) at(v.j - 1) -= 1;
        } else if constexpr (std::is_same_v<T, TopProduct>) {
          check_index(v.j, 1, m, "svf p_j");
          at(v.j) += 1;
        } else if constexpr (std::is_same_v<T, BlockProduct>) {
          if (v.tau.ambient_dim() != m) throw SignatureMismatch("svf pi: ambient mismatch");
          check_index(v.j, 1, v.tau.k(), "svf pi_{tau,j}");
          at(v.tau.position(v.j)) += 1;
          if (v.j > 1) at(v.tau.position(v.j - 1)) -= 1;
        } else if constexpr (std::is_same_v<T, RatioRho>) {
          check_index(v.position, 1, m - 1, "svf rho");
          at(v.position) += 2;
          if (v.position > 1) at(v.position - 1) -= 1;
          at(v.position + 1) -= 1;
        } else if constexpr (std::is_same_v<T, RatioSigma>) {
          check_index(v.position, 1, m - 1, "svf sigma");
          at(v.position) -= 2;
          if (v.position > 1) at(v.position - 1) += 1;
          at(v.position + 1) += 1;
        }
      },
      f);
  return c;
}

double eval_svf_log(const SvFormula& f, const Eigen::VectorXd& logp) {
  const int m = static_cast<int>(logp.size());
  const auto c = svf_log_coeffs(f, m);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) acc += c[static_cast<size_t>(j)] * logp(j);
  return acc;
}

double eval_svf(const SvFormula& f, const Eigen::Ref<const Eigen::MatrixXd>& g) {
  const int m = static_cast<int>(g.rows());
  const Eigen::VectorXd s = singular_values(g);
  // Negative coefficients mean a genuine ratio, which needs s_m > 0.
  const auto coeffs = svf_log_coeffs(f, m);
  const bool needs_inverse =
      std::any_of(coeffs.begin(), coeffs.end(), [](int c) { return c < 0; });
  if (needs_inverse && s(m - 1) <= kTolInv * s(0))
    throw SingularInput("eval_svf: matrix numerically singular");
  Eigen::VectorXd logp(m);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    acc += std::log(s(j));
    logp(j) = acc;
  }
  return std::exp(eval_svf_log(f, logp));
}

std::string svf_name(const SvFormula& f) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SingularValue>) return "s" + std::to_string(v.j);
        if constexpr (std::is_same_v<T, TopProduct>) return "p" + std::to_string(v.j);
        if constexpr (std::is_same_v<T, BlockProduct>) return "pi" + std::to_string(v.j);
        if constexpr (std::is_same_v<T, RatioRho>) return "rho" + std::to_string(v.position);
        if constexpr (std::is_same_v<T, RatioSigma>)
          return "sigma" + std::to_string(v.position);
      },
      f);
}

GapReport gap_report_from_logs(const Eigen::VectorXd& log_s, const Signature& tau,
                               double tol_gap) {
  if (tau.ambient_dim() != static_cast<int>(log_s.size()))
    throw SignatureMismatch("gap_report: signature ambient dim mismatch");
  GapReport rep;
  rep.tol_gap = tol_gap;
  rep.rho.reserve(static_cast<size_t>(tau.k()));
  double log_rho_min = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= tau.k(); ++j) {
    const int q = tau.position(j);
    const double log_rho = log_s(q - 1) - log_s(q);
    rep.rho.push_back(std::exp(log_rho));
    log_rho_min = std::min(log_rho_min, log_rho);
  }
  rep.rho_min = std::exp(log_rho_min);
  rep.sigma_max = std::exp(-log_rho_min);
  rep.has_gap = rep.rho_min > 1.0 + tol_gap;
  return rep;
}

GapReport gap_report(const Eigen::Ref<const Eigen::MatrixXd>& g, const Signature& tau,
                     double tol_gap) {
  const Eigen::VectorXd s = singular_values(g);
  if (s(s.size() - 1) <= kTolInv * s(0))
    throw SingularInput("gap_report: matrix numerically singular");
  if (tau.ambient_dim() != static_cast<int>(s.size()))
    throw SignatureMismatch("gap_report: signature ambient dim mismatch");
  // Direct quotients keep exact inputs exact (no log/exp round trip).
  GapReport rep;
  rep.tol_gap = tol_gap;
  rep.rho.reserve(static_cast<size_t>(tau.k()));
  rep.rho_min = std::numeric_limits<double>::infinity();
  rep.sigma_max = 0.0;
  for (int j = 1; j <= tau.k(); ++j) {
    const int q = tau.position(j);
    const double rho = s(q - 1) / s(q);
    rep.rho.push_back(rho);
    rep.rho_min = std::min(rep.rho_min, rho);
    rep.sigma_max = std::max(rep.sigma_max, s(q) / s(q - 1));
  }
  rep.has_gap = rep.rho_min > 1.0 + tol_gap;
  return rep;
}

Eigen::MatrixXd realify(const Eigen::Ref<const Eigen::MatrixXcd>& g) {
  const Eigen::Index m = g.rows();
  if (g.cols() != m) throw DimMismatch("realify: matrix must be square");
  Eigen::MatrixXd out(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double a = g(i, j).real();
      const double b = g(i, j).imag();
      out(2 * i, 2 * j) = a;
      out(2 * i, 2 * j + 1) = -b;
      out(2 * i + 1, 2 * j) = b;
      out(2 * i + 1, 2 * j + 1) = a;
    }
  }
  return out;
}

double oplus(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
    throw DomainError("oplus: arguments must lie in [0,1]");
  return a + b - a * b;
}

}  // namespace cocyclelab
