// cocycle-lab: batch experiment driver for quasiperiodic cocycle
// measurements.  Subcommands cover spectrum estimation, avalanche-principle
// checks, sandwich fuzzing, large-deviation measurements, Hoelder probes,
// filtration comparisons, the inductive ledger, Jacobi parameter scans and
// Diophantine frequency checks.  Exit codes: 0 success, 1 usage or I/O
// error, 2 a verified mathematical property failed.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cocyclelab/avalanche.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/models.hpp"
#include "cocyclelab/report.hpp"
#include "cocyclelab/spectra.hpp"

namespace cl = cocyclelab;

namespace {

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

cl::Cocycle resolve_cocycle(const std::string& spec) {
  const auto names = cl::gallery_names();
  if (std::find(names.begin(), names.end(), spec) != names.end())
    return cl::sample_gallery(spec);
  return cl::load_cocycle_file(spec);
}

cl::SvFormula parse_formula(const std::string& name, int m,
                            const std::vector<int>* tau_positions) {
  if (name.size() < 2) throw cl::DomainError("formula: cannot parse " + name);
  auto index_after = [&](size_t prefix) { return std::stoi(name.substr(prefix)); };
  if (name[0] == 's' && std::isdigit(static_cast<unsigned char>(name[1])))
    return cl::SingularValue{index_after(1)};
  if (name[0] == 'p' && std::isdigit(static_cast<unsigned char>(name[1])))
    return cl::TopProduct{index_after(1)};
  if (name.rfind("pi", 0) == 0) {
    if (!tau_positions || tau_positions->empty())
      throw cl::DomainError("formula pi needs --tau");
    return cl::BlockProduct{cl::Signature(*tau_positions, m), index_after(2)};
  }
  if (name.rfind("rho", 0) == 0) return cl::RatioRho{index_after(3)};
  if (name.rfind("sigma", 0) == 0) return cl::RatioSigma{index_after(5)};
  throw cl::DomainError("formula: cannot parse " + name);
}

// Deterministic trig-poly perturbation direction with unit-free coefficients;
// the probe normalizes it to unit strip norm itself.
cl::Cocycle random_direction(const cl::Cocycle& A, unsigned long seed) {
  cl::Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int m = A.dim();
  const int d = A.base_dim();
  cl::TrigPolyMat mat;
  mat.m = m;
  mat.entries.assign(static_cast<size_t>(m) * m, cl::TrigPoly(d));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      cl::TrigPoly p(d);
      p.add_term(Eigen::VectorXi::Zero(d), {normal(rng), 0.0});
      for (int axis = 0; axis < d; ++axis) {
        Eigen::VectorXi k = Eigen::VectorXi::Zero(d);
        k(axis) = 1;
        const std::complex<double> c(normal(rng), normal(rng));
        p.add_term(k, 0.5 * c);
        p.add_term(-k, 0.5 * std::conj(c));
      }
      mat.at(i, j) = p;
    }
  }
  return cl::make_trig_cocycle(std::move(mat), A.frequency(), A.width(), "direction");
}

struct CommonFlags {
  std::string out = "-";
  std::string format = "csv";
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out", flags.out, "output path, '-' for stdout");
  cmd->add_option("--format", flags.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--dry-run", flags.dry_run, "validate inputs without computing");
}

int emit(const cl::ReportTable& table, const CommonFlags& flags) {
  cl::write_report(table, cl::parse_format(flags.format), flags.out == "-" ? "" : flags.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cocycle-lab: quasiperiodic cocycle measurements"};
  app.require_subcommand(1);

  // ---- lyapunov -----------------------------------------------------------
  auto* lyap = app.add_subcommand("lyapunov", "finite-scale Lyapunov spectrum");
  std::string lyap_cocycle, lyap_scales = "1,2,4,8,16,32,64";
  int lyap_grid = 0;
  CommonFlags lyap_flags;
  lyap->add_option("--cocycle", lyap_cocycle, "gallery name or cocycle JSON path")->required();
  lyap->add_option("--scales", lyap_scales, "comma separated scales");
  lyap->add_option("--grid", lyap_grid, "grid nodes per dimension");
  add_common(lyap, lyap_flags);

  // ---- ap-check -----------------------------------------------------------
  auto* ap = app.add_subcommand("ap-check", "avalanche principle on a generated chain");
  int ap_m = 2, ap_n = 10;
  std::string ap_tau = "1";
  double ap_kappa = 1e-3, ap_angle = 1.0471975511965976;  // pi/3
  double ap_tol_gap = cl::kTolGapDefault;
  unsigned long ap_seed = 0;
  bool ap_random = false;
  CommonFlags ap_flags;
  ap->add_option("--m", ap_m, "matrix dimension");
  ap->add_option("--tau", ap_tau, "signature positions");
  ap->add_option("--kappa", ap_kappa, "gap ratio of the generated links");
  ap->add_option("--angle", ap_angle, "alignment angle (2d) or rotation bound (random)");
  ap->add_option("--n", ap_n, "chain length");
  ap->add_option("--seed", ap_seed, "rng seed for --random chains");
  ap->add_flag("--random", ap_random, "random rotations instead of the aligned 2d family");
  ap->add_option("--tol-gap", ap_tol_gap, "gap tolerance");
  add_common(ap, ap_flags);

  // ---- svp-fuzz -----------------------------------------------------------
  auto* fuzz = app.add_subcommand("svp-fuzz", "fuzz the exact chain sandwiches");
  int fuzz_m = 3, fuzz_chains = 1000, fuzz_len = 10;
  std::string fuzz_tau = "1,2";
  double fuzz_kappa = 0.01, fuzz_max_angle = 0.4;
  double fuzz_tol_gap = cl::kTolGapDefault;
  unsigned long fuzz_seed = 0;
  CommonFlags fuzz_flags;
  fuzz->add_option("--m", fuzz_m, "matrix dimension");
  fuzz->add_option("--tau", fuzz_tau, "signature positions");
  fuzz->add_option("--chains", fuzz_chains, "number of chains");
  fuzz->add_option("--length", fuzz_len, "chain length");
  fuzz->add_option("--kappa", fuzz_kappa, "gap ratio of generated links");
  fuzz->add_option("--max-angle", fuzz_max_angle, "rotation bound");
  fuzz->add_option("--seed", fuzz_seed, "rng seed");
  fuzz->add_option("--tol-gap", fuzz_tol_gap, "gap tolerance");
  add_common(fuzz, fuzz_flags);

  // ---- ldt ----------------------------------------------------------------
  auto* ldt = app.add_subcommand("ldt", "large-deviation set measurements");
  std::string ldt_cocycle, ldt_formula = "p1", ldt_scales = "50,100,200,400", ldt_tau;
  double ldt_delta = 0.05;
  int ldt_grid = 0;
  CommonFlags ldt_flags;
  ldt->add_option("--cocycle", ldt_cocycle)->required();
  ldt->add_option("--formula", ldt_formula, "s.v. formula, e.g. p1, s2, rho1");
  ldt->add_option("--tau", ldt_tau, "signature (needed by pi formulas)");
  ldt->add_option("--scales", ldt_scales);
  ldt->add_option("--delta", ldt_delta);
  ldt->add_option("--grid", ldt_grid);
  add_common(ldt, ldt_flags);

  // ---- holder-probe -------------------------------------------------------
  auto* holder = app.add_subcommand("holder-probe", "Hoelder exponent probe");
  std::string h_cocycle, h_tau = "1,2", h_pi = "p1",
              h_radii = "1e-2,1e-3,1e-4,1e-5,1e-6";
  int h_nstar = 64, h_grid = 0;
  unsigned long h_seed = 0;
  CommonFlags h_flags;
  holder->add_option("--cocycle", h_cocycle)->required();
  holder->add_option("--tau", h_tau);
  holder->add_option("--pi", h_pi, "tau-s.v.p. formula");
  holder->add_option("--radii", h_radii);
  holder->add_option("--nstar", h_nstar, "probe scale");
  holder->add_option("--grid", h_grid);
  holder->add_option("--seed", h_seed, "seed for the perturbation direction");
  add_common(holder, h_flags);

  // ---- oseledets ----------------------------------------------------------
  auto* osel = app.add_subcommand("oseledets", "filtration fields across scales");
  std::string o_cocycle, o_tau = "1,2", o_scales = "8,32,1024";
  int o_grid = 0;
  double o_tol_gap = cl::kTolGapDefault;
  CommonFlags o_flags;
  osel->add_option("--cocycle", o_cocycle)->required();
  osel->add_option("--tau", o_tau);
  osel->add_option("--scales", o_scales);
  osel->add_option("--grid", o_grid);
  osel->add_option("--tol-gap", o_tol_gap, "gap tolerance");
  add_common(osel, o_flags);

  // ---- ledger -------------------------------------------------------------
  auto* ledger = app.add_subcommand("ledger", "inductive step arithmetic");
  double lg_gamma = 1.0, lg_eta = 0.1, lg_delta = 0.05, lg_delta_bar = -1.0, lg_C = 10.0,
         lg_n0 = 100.0, lg_n1 = 10000.0;
  CommonFlags lg_flags;
  ledger->add_option("--gamma", lg_gamma)->required();
  ledger->add_option("--eta", lg_eta)->required();
  ledger->add_option("--delta", lg_delta)->required();
  ledger->add_option("--delta-bar", lg_delta_bar, "defaults to n0^{-3/4}");
  ledger->add_option("--C", lg_C)->required();
  ledger->add_option("--n0", lg_n0)->required();
  ledger->add_option("--n1", lg_n1)->required();
  add_common(ledger, lg_flags);

  // ---- jacobi-scan --------------------------------------------------------
  auto* jac = app.add_subcommand("jacobi-scan", "Lyapunov spectra over (lambda, E)");
  std::string j_file, j_lambdas = "1", j_energies = "0";
  int j_n = 32, j_grid = 512;
  CommonFlags j_flags;
  jac->add_option("--file", j_file, "JacobiData JSON path")->required();
  jac->add_option("--lambdas", j_lambdas);
  jac->add_option("--energies", j_energies);
  jac->add_option("--n", j_n, "scale");
  jac->add_option("--grid", j_grid);
  add_common(jac, j_flags);

  // ---- dioph --------------------------------------------------------------
  auto* dioph = app.add_subcommand("dioph", "Diophantine condition scan");
  std::string d_omega = "0.6180339887498949";
  double d_t = 0.2;
  long d_kmax = 10000;
  CommonFlags d_flags;
  dioph->add_option("--omega", d_omega, "comma separated frequency components");
  dioph->add_option("--t", d_t);
  dioph->add_option("--kmax", d_kmax);
  add_common(dioph, d_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors map to exit 1
  }

  try {
    if (*lyap) {
      const cl::Cocycle A = resolve_cocycle(lyap_cocycle);
      const auto scales = parse_ints(lyap_scales);
      const cl::QuadratureGrid grid(A.base_dim(), lyap_grid > 0
                                                      ? lyap_grid
                                                      : cl::QuadratureGrid::standard(A.base_dim()).n_per_dim);
      if (lyap_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      const cl::SpectrumEstimate est = cl::lyapunov_estimate(A, scales, grid);
      const double det_integral =
          cl::finite_scale_average(A, cl::TopProduct{A.dim()}, 1, grid);
      cl::ReportTable table;
      table.command = "lyapunov";
      table.columns = {"n"};
      for (int j = 1; j <= A.dim(); ++j) table.columns.push_back("L" + std::to_string(j));
      table.columns.push_back("sumL");
      table.columns.push_back("det_integral");
      for (size_t s = 0; s < scales.size(); ++s) {
        std::vector<cl::Cell> row{static_cast<long>(scales[s])};
        double sum = 0.0;
        for (int j = 0; j < A.dim(); ++j) {
          row.emplace_back(est.exponents(static_cast<Eigen::Index>(s), j));
          sum += est.exponents(static_cast<Eigen::Index>(s), j);
        }
        row.emplace_back(sum);
        row.emplace_back(det_integral);
        table.add_row(std::move(row));
      }
      return emit(table, lyap_flags);
    }

    if (*ap) {
      const auto tau_positions = parse_ints(ap_tau);
      const cl::Signature tau(tau_positions, ap_m);
      if (ap_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      std::vector<Eigen::MatrixXd> links;
      if (ap_random) {
        cl::Rng rng(ap_seed);
        links = cl::make_admissible_links(ap_m, tau, ap_kappa, ap_n, ap_angle, rng);
      } else {
        if (ap_m != 2) throw cl::DomainError("ap-check: the aligned family is 2x2; use --random for m > 2");
        links = cl::make_aligned_chain_2d(ap_kappa, ap_n, ap_angle);
      }
      const cl::Chain chain(std::move(links), tau);
      const cl::ApReport rep = cl::ap_report(chain, ap_tol_gap);
      double max_pi = 0.0;
      for (const auto& pd : rep.pi_deltas) max_pi = std::max(max_pi, pd.normalized);
      cl::ReportTable table;
      table.command = "ap-check";
      table.columns = {"n",          "kappa",        "epsilon",       "admissible",
                       "d_plus",     "d_minus",      "ratio_d_plus",  "ratio_d_minus",
                       "log_sigma_n", "log_sigma_bound", "max_delta_pi_normalized"};
      table.add_row({static_cast<long>(ap_n), rep.hypotheses.kappa, rep.hypotheses.epsilon,
                     rep.hypotheses.admissible, rep.d_plus, rep.d_minus, rep.ratio_d_plus,
                     rep.ratio_d_minus, rep.log_sigma_n, rep.log_sigma_bound, max_pi});
      const int rc = emit(table, ap_flags);
      if (rep.log_sigma_n > rep.log_sigma_bound) {
        std::cerr << "ap-check: exact contraction bound violated\n";
        return 2;
      }
      return rc;
    }

    if (*fuzz) {
      const auto tau_positions = parse_ints(fuzz_tau);
      const cl::Signature tau(tau_positions, fuzz_m);
      if (fuzz_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      cl::Rng rng(fuzz_seed);
      long violations = 0;
      double min_lower_margin = std::numeric_limits<double>::infinity();
      double min_upper_margin = std::numeric_limits<double>::infinity();
      for (int trial = 0; trial < fuzz_chains; ++trial) {
        auto links = cl::make_admissible_links(fuzz_m, tau, fuzz_kappa, fuzz_len,
                                               fuzz_max_angle, rng);
        const cl::Chain chain(std::move(links), tau);
        auto check = [&](const cl::Sandwich& s) {
          const double lower_margin = s.actual / s.lower - 1.0;
          const double upper_margin = s.upper / s.actual - 1.0;
          min_lower_margin = std::min(min_lower_margin, lower_margin);
          min_upper_margin = std::min(min_upper_margin, upper_margin);
          if (lower_margin < -1e-9 || upper_margin < -1e-9) ++violations;
        };
        check(cl::norm_sandwich(chain, fuzz_tol_gap));
        for (int j = 1; j <= tau.k(); ++j) check(cl::svp_sandwich(chain, j, fuzz_tol_gap));
      }
      cl::ReportTable table;
      table.command = "svp-fuzz";
      table.columns = {"chains", "length", "kappa", "violations", "min_lower_margin",
                       "min_upper_margin"};
      table.add_row({static_cast<long>(fuzz_chains), static_cast<long>(fuzz_len), fuzz_kappa,
                     violations, min_lower_margin, min_upper_margin});
      const int rc = emit(table, fuzz_flags);
      if (violations > 0) {
        std::cerr << "svp-fuzz: sandwich violations detected\n";
        return 2;
      }
      return rc;
    }

    if (*ldt) {
      const cl::Cocycle A = resolve_cocycle(ldt_cocycle);
      std::vector<int> tau_positions;
      if (!ldt_tau.empty()) tau_positions = parse_ints(ldt_tau);
      const cl::SvFormula s = parse_formula(ldt_formula, A.dim(),
                                            ldt_tau.empty() ? nullptr : &tau_positions);
      const auto scales = parse_ints(ldt_scales);
      const cl::QuadratureGrid grid(A.base_dim(), ldt_grid > 0
                                                      ? ldt_grid
                                                      : cl::QuadratureGrid::standard(A.base_dim()).n_per_dim);
      if (ldt_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      cl::ReportTable table;
      table.command = "ldt";
      table.columns = {"n", "formula", "delta", "measure", "average", "c", "bound_reference"};
      for (int n : scales) {
        const cl::DeviationReport rep = cl::ldt_deviation(A, s, n, ldt_delta, grid);
        table.add_row({static_cast<long>(rep.n), rep.formula, rep.delta, rep.measure,
                       rep.average, rep.c, rep.bound_reference});
      }
      return emit(table, ldt_flags);
    }

    if (*holder) {
      const cl::Cocycle A = resolve_cocycle(h_cocycle);
      const auto tau_positions = parse_ints(h_tau);
      const cl::Signature tau(tau_positions, A.dim());
      const cl::SvFormula pi = parse_formula(h_pi, A.dim(), &tau_positions);
      const auto radii = parse_doubles(h_radii);
      const cl::QuadratureGrid grid(A.base_dim(), h_grid > 0
                                                      ? h_grid
                                                      : cl::QuadratureGrid::standard(A.base_dim()).n_per_dim);
      if (h_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      const cl::Cocycle direction = random_direction(A, h_seed);
      const cl::HolderProbe probe =
          cl::holder_probe(A, tau, pi, direction, radii, h_nstar, grid);
      cl::ReportTable table;
      table.command = "holder-probe";
      table.columns = {"log_h", "log_diff", "theta", "r2", "degenerate", "dropped"};
      for (const auto& p : probe.fit_points)
        table.add_row({p.first, p.second, probe.theta, probe.r2, probe.degenerate,
                       static_cast<long>(probe.dropped_radii.size())});
      if (probe.fit_points.empty())
        table.add_row({0.0, 0.0, probe.theta, probe.r2, probe.degenerate,
                       static_cast<long>(probe.dropped_radii.size())});
      return emit(table, h_flags);
    }

    if (*osel) {
      const cl::Cocycle A = resolve_cocycle(o_cocycle);
      const auto tau_positions = parse_ints(o_tau);
      const cl::Signature tau(tau_positions, A.dim());
      const auto scales = parse_ints(o_scales);
      const cl::QuadratureGrid grid(A.base_dim(), o_grid > 0
                                                      ? o_grid
                                                      : cl::QuadratureGrid::standard(A.base_dim()).n_per_dim);
      if (o_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      std::vector<cl::FiltrationField> fields;
      fields.reserve(scales.size());
      for (int n : scales)
        fields.push_back(cl::oseledets_filtration_grid(A, tau, n, grid, o_tol_gap));
      cl::ReportTable table;
      table.command = "oseledets";
      table.columns = {"n_coarse", "n_fine", "distance", "defined_coarse", "defined_fine"};
      for (size_t i = 0; i + 1 < fields.size(); ++i)
        table.add_row({static_cast<long>(scales[i]), static_cast<long>(scales[i + 1]),
                       cl::filtration_distance(fields[i], fields[i + 1]),
                       fields[i].defined_fraction, fields[i + 1].defined_fraction});
      return emit(table, o_flags);
    }

    if (*ledger) {
      if (lg_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      cl::LedgerState state;
      state.gamma = lg_gamma;
      state.eta = lg_eta;
      state.delta = lg_delta;
      state.delta_bar = lg_delta_bar > 0.0 ? lg_delta_bar : std::pow(lg_n0, -0.75);
      state.C = lg_C;
      state.n0 = lg_n0;
      state.n1 = lg_n1;
      const cl::LedgerResult res = cl::inductive_ledger(state);
      std::string violations;
      for (size_t i = 0; i < res.violations.size(); ++i) {
        if (i) violations += "; ";
        violations += res.violations[i];
      }
      cl::ReportTable table;
      table.command = "ledger";
      table.columns = {"gamma0", "eta0", "delta", "delta_bar", "C", "n0",
                       "n1",     "gamma1", "eta1", "valid",     "violations"};
      table.add_row({state.gamma, state.eta, state.delta, state.delta_bar, state.C, state.n0,
                     state.n1, res.gamma1, res.eta1, res.valid, violations});
      return emit(table, lg_flags);
    }

    if (*jac) {
      auto [data, omega] = cl::load_jacobi_file(j_file);
      const auto lambdas = parse_doubles(j_lambdas);
      const auto energies = parse_doubles(j_energies);
      if (j_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      cl::ReportTable table;
      table.command = "jacobi-scan";
      table.columns = {"lambda", "E", "n"};
      for (int j = 1; j <= 2 * data.d_band; ++j)
        table.columns.push_back("L" + std::to_string(j));
      const cl::QuadratureGrid grid(omega.d(), j_grid);
      for (double lam : lambdas) {
        for (double E : energies) {
          cl::JacobiData d = data;
          d.lambda = lam;
          d.E = E;
          const cl::Cocycle A = cl::jacobi_cocycle(d, omega);
          const cl::SpectrumEstimate est = cl::lyapunov_estimate(A, {j_n}, grid);
          std::vector<cl::Cell> row{lam, E, static_cast<long>(j_n)};
          for (int j = 0; j < 2 * data.d_band; ++j) row.emplace_back(est.extrapolated(j));
          table.add_row(std::move(row));
        }
      }
      return emit(table, j_flags);
    }

    if (*dioph) {
      const auto comps = parse_doubles(d_omega);
      Eigen::VectorXd w(static_cast<Eigen::Index>(comps.size()));
      for (size_t i = 0; i < comps.size(); ++i) w(static_cast<Eigen::Index>(i)) = comps[i];
      const cl::Frequency omega(w);
      if (d_flags.dry_run) {
        std::cerr << "dry-run ok\n";
        return 0;
      }
      const cl::DiophantineReport rep = cl::diophantine_check(omega, d_t, d_kmax);
      std::string worst;
      for (int i = 0; i < rep.worst_k.size(); ++i) {
        if (i) worst += " ";
        worst += std::to_string(rep.worst_k(i));
      }
      cl::ReportTable table;
      table.command = "dioph";
      table.columns = {"d", "t", "kmax", "holds", "worst_k", "worst_ratio"};
      table.add_row({static_cast<long>(omega.d()), d_t, d_kmax, rep.holds, worst,
                     rep.worst_ratio});
      return emit(table, d_flags);
    }
  } catch (const cl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
