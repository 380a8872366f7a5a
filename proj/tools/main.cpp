// bdcalc command line: ellipticity checks, resolvent scans, trace-density
// fits and side-by-side boundary condition comparisons for Laplace-type
// half-space models.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include "bdcalc/config.hpp"
#include "bdcalc/fitting.hpp"
#include "bdcalc/green.hpp"
#include "bdcalc/resolvent.hpp"
#include "bdcalc/symbols.hpp"
#include "bdcalc/toeplitz.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  bool allow_theta_zero = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "scenario TOML file");
  if (needs_config) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "random seed for generated instances");
  cmd->add_option("--threads", opts.threads, "worker threads for mu sweeps");
  cmd->add_flag("--allow-theta-zero", opts.allow_theta_zero,
                "permit theta outside (0,2pi) for negative controls");
}

std::ofstream open_out(const CommonOpts& opts, const std::string& name) {
  fs::create_directories(opts.out_dir);
  std::ofstream f(fs::path(opts.out_dir) / name);
  if (!f) throw std::runtime_error("cannot open output file " + name);
  return f;
}

json witness_json(const bdcalc::ConditionResult& c) {
  json w;
  std::vector<double> xi(c.witness_xi.data(),
                         c.witness_xi.data() + c.witness_xi.size());
  w["xi"] = xi;
  w["mu"] = c.witness_mu;
  if (c.name == "E1") w["xin"] = c.witness_xin;
  return w;
}

// ordered mu sweep with optional threads; results keep the input order
template <typename F>
auto sweep(const std::vector<double>& mu_list, int threads, F&& f) {
  using R = decltype(f(0.0));
  std::vector<R> out(mu_list.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < mu_list.size(); ++i) out[i] = f(mu_list[i]);
    return out;
  }
  std::vector<std::future<void>> jobs;
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < threads; ++t)
    jobs.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < mu_list.size(); i = next++)
        out[i] = f(mu_list[i]);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

int cmd_check_ellipticity(const CommonOpts& opts) {
  const auto cfg = bdcalc::ScenarioConfig::load(opts.config_path,
                                                opts.allow_theta_zero);
  const auto model = cfg.model();
  const auto bc = cfg.boundary_condition();
  const auto report = bdcalc::assemble_report(model, bc);

  json out;
  out["overall"] = report.overall();
  out["theta"] = cfg.theta;
  out["bc"] = cfg.bc_kind;
  for (const auto& c : report.conditions) {
    json jc;
    jc["condition"] = c.name;
    jc["pass"] = c.pass;
    jc["min_sv"] = c.min_sv;
    jc["threshold"] = c.threshold;
    jc["witness"] = witness_json(c);
    out["conditions"].push_back(jc);
  }
  auto f = open_out(opts, "ellipticity.json");
  f << out.dump(2) << "\n";
  std::cout << out.dump(2) << std::endl;
  return report.overall() ? kExitPass : kExitFail;
}

int cmd_resolvent_scan(const CommonOpts& opts) {
  const auto cfg = bdcalc::ScenarioConfig::load(opts.config_path,
                                                opts.allow_theta_zero);
  const auto model = cfg.model();
  const auto bc = cfg.boundary_condition();
  const auto rows = bdcalc::resolvent_norm_scan(model, bc, cfg.mu_list);

  auto f = open_out(opts, "resolvent_scan.csv");
  f << "mu,scaled_norm,converged\n";
  for (const auto& r : rows)
    f << fmt17(r.mu) << "," << fmt17(r.scaled_norm) << ","
      << (r.converged ? 1 : 0) << "\n";
  double lo = rows.front().scaled_norm, hi = lo;
  for (const auto& r : rows) {
    lo = std::min(lo, r.scaled_norm);
    hi = std::max(hi, r.scaled_norm);
  }
  std::cout << "mu^d ||R(mu)|| range [" << lo << ", " << hi
            << "], ratio " << (lo > 0 ? hi / lo : 0.0) << std::endl;
  return kExitPass;
}

int cmd_trace_fit(const CommonOpts& opts) {
  const auto cfg = bdcalc::ScenarioConfig::load(opts.config_path,
                                                opts.allow_theta_zero);
  const auto model = cfg.model();
  const auto bc = cfg.boundary_condition();

  const auto grid = bdcalc::default_fit_grid();
  auto densities = sweep(grid, opts.threads, [&](double mu) {
    return bdcalc::trace_density(model, bc, mu, 1e-8, cfg.xi_cutoff_factor);
  });

  auto f = open_out(opts, "trace_density.csv");
  f << "mu,re_density,im_density,grid_cutoff,tail_estimate\n";
  std::vector<bdcalc::Complex> values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values.push_back(densities[i].value);
    f << fmt17(grid[i]) << "," << fmt17(densities[i].value.real()) << ","
      << fmt17(densities[i].value.imag()) << "," << fmt17(densities[i].cutoff)
      << "," << fmt17(densities[i].tail_estimate) << "\n";
  }

  const auto em = bdcalc::ExpansionModel::trace_density_model(
      -cfg.d, 0.0, cfg.n, 3, 3);
  const auto fit = bdcalc::fit_expansion(grid, values, em);
  const double lead_exp = em.ladder_a.front();
  const auto logtest =
      bdcalc::log_presence_test(grid, values, em, em.ladder_b.front());

  json out;
  out["residual"] = fit.residual;
  out["condition_number"] = fit.condition_number;
  out["slope"] = bdcalc::loglog_slope(grid, values);
  for (std::size_t k = 0; k < fit.basis.size(); ++k) {
    json jc;
    jc["exponent"] = fit.basis[k].exponent;
    jc["log"] = fit.basis[k].with_log;
    jc["re"] = fit.coefficients[k].real();
    jc["im"] = fit.coefficients[k].imag();
    out["coefficients"].push_back(jc);
  }
  out["leading_exponent"] = lead_exp;
  {
    const auto c = fit.coefficient_at(lead_exp);
    out["leading_coefficient_re"] = c.real();
    out["leading_coefficient_im"] = c.imag();
  }
  out["log_term_present"] = logtest.present;

  auto jf = open_out(opts, "trace_fit.json");
  jf << out.dump(2) << "\n";
  std::cout << out.dump(2) << std::endl;
  return kExitPass;
}

int cmd_compare_bc(const CommonOpts& opts) {
  const auto cfg = bdcalc::ScenarioConfig::load(opts.config_path,
                                                opts.allow_theta_zero);
  const auto model = cfg.model();
  const auto dir = bdcalc::ProjectionBC::dirichlet();
  const auto neu = bdcalc::ProjectionBC::neumann();
  const bool with_proj = cfg.bc_kind == "projection" || cfg.bc_kind == "robin";
  const auto proj = with_proj ? cfg.boundary_condition() : dir;

  auto f = open_out(opts, "compare_bc.csv");
  f << "mu,dirichlet_re,dirichlet_im,neumann_re,neumann_im";
  if (with_proj) f << ",projection_re,projection_im";
  f << ",dirichlet_plus_neumann_re\n";

  auto rows = sweep(cfg.mu_list, opts.threads, [&](double mu) {
    std::vector<bdcalc::Complex> r;
    r.push_back(bdcalc::trace_density(model, dir, mu, 1e-8, cfg.xi_cutoff_factor).value);
    r.push_back(bdcalc::trace_density(model, neu, mu, 1e-8, cfg.xi_cutoff_factor).value);
    if (with_proj)
      r.push_back(bdcalc::trace_density(model, proj, mu, 1e-8, cfg.xi_cutoff_factor).value);
    return r;
  });
  for (std::size_t i = 0; i < cfg.mu_list.size(); ++i) {
    const auto& r = rows[i];
    f << fmt17(cfg.mu_list[i]) << "," << fmt17(r[0].real()) << ","
      << fmt17(r[0].imag()) << "," << fmt17(r[1].real()) << ","
      << fmt17(r[1].imag());
    if (with_proj) f << "," << fmt17(r[2].real()) << "," << fmt17(r[2].imag());
    f << "," << fmt17((r[0] + r[1]).real()) << "\n";
  }
  std::cout << "wrote compare_bc.csv for " << cfg.mu_list.size() << " mu values"
            << std::endl;
  return kExitPass;
}

int cmd_selftest(const CommonOpts& opts) {
  using namespace bdcalc;
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS  " : "FAIL  ") << name << std::endl;
    if (!ok) ++failures;
  };

  {
    RVec y(2);
    y << 3.0, 4.0;
    check("smoothed norm equals |y| outside the unit ball",
          std::abs(smoothed_norm(y) - 5.0) < 1e-14);
    check("smoothed norm at the origin", std::abs(smoothed_norm(RVec::Zero(2)) - 1.0) < 1e-14);
  }
  {
    const auto basis = make_basis(96);
    check("Laguerre basis orthonormal",
          (basis->gram() - RMat::Identity(96, 96)).norm() < 1e-10);
    CVec one = CVec::Ones(1);
    const auto u = exp_mode(basis, Complex(1.0, 0.0), one).mode;
    const auto v = dilation(u, 1.7);
    check("dilation is unitary", std::abs(v.norm() - u.norm()) < 1e-8);
    const auto lhs = theta(dilation(u, 1.3), 1);
    const auto rhs = dilation(theta(u, 1), 1.3);
    check("theta commutes with dilation",
          (lhs.coeffs - rhs.coeffs).norm() < 1e-7);
  }
  {
    ParamPoint pt = ParamPoint::boundary((RVec(1) << 3.0).finished(), 4.0);
    auto k = SymbolKernel::scalar_poisson(Complex(1.0, 0.0), Complex(1.0, 0.0));
    const auto round = untwist(twist(k, pt), pt);
    check("twist/untwist round trip",
          (round.at(0.37) - k.at(0.37)).norm() < 1e-12);
    auto g = SymbolKernel::scalar_green(Complex(1.0, 0.0), Complex(2.0, 0.5),
                                        Complex(2.0, -0.5));
    check("Tr+ closed form",
          std::abs(tr_plus(g) - 1.0 / Complex(4.0, 0.0)) < 1e-12);
  }
  {
    const auto model = LaplaceTypeModel::standard(2, 1, M_PI);
    check("sigma root on the ray",
          std::abs(sigma_root_scalar(model, RVec::Zero(1), 1.0) -
                   Complex(1.0, 0.0)) < 1e-12);
    const auto rep = assemble_report(model, ProjectionBC::dirichlet());
    check("Dirichlet model is parameter-elliptic", rep.overall());
  }
  {
    std::mt19937_64 rng(opts.seed);
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
      const auto t = random_triple(12, 5, rng);
      const CMat bl = left_parametrix(t);
      ok = ok && (bl * t.a - t.pi0).norm() < 1e-9;
      const CMat b = toeplitz_invert(t);
      ok = ok && (t.a * b - t.pi1).norm() < 1e-9;
    }
    check("Toeplitz descent on random triples", ok);
  }
  {
    const auto grid = default_fit_grid();
    std::vector<Complex> vals;
    for (double mu : grid) vals.push_back(3.0 / mu + 5.0 / (mu * mu));
    ExpansionModel em;
    em.ladder_a = {-1.0, -2.0};
    const auto fit = fit_expansion(grid, vals, em);
    check("least-squares recovery of a constructed expansion",
          fit.residual < 1e-10);
  }

  std::cout << (failures == 0 ? "selftest: all suites green"
                              : "selftest: FAILURES " + std::to_string(failures))
            << std::endl;
  return failures == 0 ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boundary-symbol calculus toolkit for half-space models"};
  app.require_subcommand(1);

  CommonOpts oc, ors, otf, ocb, ost;
  auto* c1 = app.add_subcommand("check-ellipticity",
                                "run the E1/Pi2/Pi3 decision suite");
  add_common(c1, oc);
  auto* c2 = app.add_subcommand("resolvent-scan",
                                "mu^d ||R(mu)|| along the ray");
  add_common(c2, ors);
  auto* c3 = app.add_subcommand("trace-fit",
                                "trace densities and expansion fit");
  add_common(c3, otf);
  auto* c4 = app.add_subcommand("compare-bc",
                                "Dirichlet vs Neumann vs configured bc");
  add_common(c4, ocb);
  auto* c5 = app.add_subcommand("selftest", "built-in property suite");
  add_common(c5, ost, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c1->parsed()) return cmd_check_ellipticity(oc);
    if (c2->parsed()) return cmd_resolvent_scan(ors);
    if (c3->parsed()) return cmd_trace_fit(otf);
    if (c4->parsed()) return cmd_compare_bc(ocb);
    if (c5->parsed()) return cmd_selftest(ost);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitError;
  }
  return kExitError;
}
