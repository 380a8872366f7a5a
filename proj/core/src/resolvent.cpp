#include "bdcalc/resolvent.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace bdcalc {

FrequencyGrid FrequencyGrid::make(double scale, double core_halfwidth,
                                  double h0, double stretch,
                                  double cutoff_factor) {
  if (scale <= 0.0) scale = 1.0;
  const double h = h0 * scale;
  const double a = core_halfwidth * scale;
  const double cutoff = cutoff_factor * scale;

  std::vector<double> pos;
  for (double x = 0.0; x <= a + 0.5 * h; x += h) pos.push_back(x);
  double x = pos.back();
  while (x < cutoff) {
    x *= stretch;
    pos.push_back(x);
  }

  FrequencyGrid g;
  g.cutoff = pos.back();
  g.core_spacing = h;
  const int np = static_cast<int>(pos.size());
  g.nodes.resize(2 * np - 1);
  for (int i = 0; i < np - 1; ++i) g.nodes[i] = -pos[np - 1 - i];
  for (int i = 0; i < np; ++i) g.nodes[np - 1 + i] = pos[i];

  const int n = static_cast<int>(g.nodes.size());
  g.weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double left = i == 0 ? g.nodes[0] : g.nodes[i - 1];
    const double right = i == n - 1 ? g.nodes[n - 1] : g.nodes[i + 1];
    g.weights[i] = 0.5 * (right - left);
  }
  return g;
}

CMat FreeKernel::at(double t, double s) const {
  const int L = static_cast<int>(sigma.size());
  CVec diag(L);
  for (int i = 0; i < L; ++i)
    diag[i] = -std::exp(-sigma[i] * std::abs(t - s)) / (2.0 * sigma[i]);
  if (L == 1) return CMat::Constant(1, 1, diag[0]);
  return U * diag.asDiagonal() * U.adjoint();
}

FreeKernel free_resolvent_kernel(const LaplaceTypeModel& model, const RVec& xi,
                                 double mu) {
  const CMat qm = model.q_at(xi);
  const Complex shift = std::polar(1.0, model.theta) * mu * mu;
  FreeKernel k;
  if (model.L == 1) {
    k.U = CMat::Identity(1, 1);
    k.sigma = CVec::Constant(1, std::sqrt(qm(0, 0) - shift));
  } else {
    Eigen::SelfAdjointEigenSolver<CMat> es(qm);
    k.U = es.eigenvectors();
    k.sigma.resize(model.L);
    for (int i = 0; i < model.L; ++i)
      k.sigma[i] = std::sqrt(Complex(es.eigenvalues()[i], 0.0) - shift);
  }
  for (int i = 0; i < k.sigma.size(); ++i)
    if (k.sigma[i].real() <= 0.0)
      throw std::domain_error("free_resolvent_kernel: Re sigma <= 0");
  return k;
}

SymbolKernel green_correction_kernel(const LaplaceTypeModel& model,
                                     const ProjectionBC& bc, const RVec& xi,
                                     double mu) {
  const int L = model.L;
  const CMat qm = model.q_at(xi);
  const Complex shift = std::polar(1.0, model.theta) * mu * mu;
  const CMat id = CMat::Identity(L, L);
  const CMat pi = bc.pi_at(xi, L);
  const CMat b = bc.b_at(xi, L);

  Eigen::SelfAdjointEigenSolver<CMat> es(qm);
  const CMat U = L == 1 ? CMat::Identity(1, 1) : es.eigenvectors();
  CVec sig(L);
  for (int i = 0; i < L; ++i) {
    const double lam = L == 1 ? qm(0, 0).real() : es.eigenvalues()[i];
    sig[i] = std::sqrt(Complex(lam, 0.0) - shift);
    if (sig[i].real() <= 0.0)
      throw std::domain_error("green_correction_kernel: Re sigma <= 0");
  }

  // group equal eigen-channels; bc data must not couple the groups
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < L; ++i) {
    bool placed = false;
    for (auto& grp : groups)
      if (std::abs(sig[grp.front()] - sig[i]) < 1e-12 * std::abs(sig[i])) {
        grp.push_back(i);
        placed = true;
        break;
      }
    if (!placed) groups.push_back({i});
  }
  if (groups.size() > 1) {
    const CMat comm = pi * qm - qm * pi;
    if (comm.norm() > 1e-10 * (qm.norm() + 1.0))
      throw std::invalid_argument(
          "green_correction_kernel: pi must commute with q for matrix sigma");
  }

  const CMat pit = U.adjoint() * pi * U;
  const CMat bt = U.adjoint() * b * U;

  SymbolKernel corr;
  corr.kind = KernelKind::green;
  for (const auto& grp : groups) {
    const Complex s = sig[grp.front()];
    const int gsz = static_cast<int>(grp.size());
    CMat pig(gsz, gsz), bg(gsz, gsz);
    for (int a = 0; a < gsz; ++a)
      for (int c = 0; c < gsz; ++c) {
        pig(a, c) = pit(grp[a], grp[c]);
        bg(a, c) = bt(grp[a], grp[c]);
      }
    const CMat idg = CMat::Identity(gsz, gsz);
    const CMat reduced = pig + (idg - pig) * (-s * idg + bg);
    Eigen::FullPivLU<CMat> lu(reduced);
    if (!lu.isInvertible())
      throw std::runtime_error(
          "green_correction_kernel: singular reduced matrix");
    const CMat cg = lu.solve((pig + (idg - pig) * (s * idg + bg)) / (2.0 * s));

    // embed the group back: coefficient U P_g cg P_g^T U^H with rate s
    CMat embed = CMat::Zero(L, L);
    for (int a = 0; a < gsz; ++a)
      for (int c = 0; c < gsz; ++c) embed(grp[a], grp[c]) = cg(a, c);
    ExpTerm tm;
    tm.coeff = U * embed * U.adjoint();
    tm.trate = s;
    tm.srate = s;
    corr.terms.push_back(std::move(tm));
  }
  return corr;
}

ResolventDecomposition decompose_resolvent(const LaplaceTypeModel& model,
                                           const ProjectionBC& bc, double mu,
                                           const FrequencyGrid& grid) {
  if (model.n != 2)
    throw std::invalid_argument("decompose_resolvent: n = 2 grids only");
  ResolventDecomposition dec;
  dec.mu = mu;
  dec.theta = model.theta;
  dec.bc = bc.kind;
  dec.grid_cutoff = grid.cutoff;
  dec.records.reserve(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    RVec xi(1);
    xi[0] = grid.nodes[i];
    FrequencyRecord rec;
    rec.xi = grid.nodes[i];
    rec.weight = grid.weights[i];
    const FreeKernel free = free_resolvent_kernel(model, xi, mu);
    rec.sigma = free.sigma;
    rec.trace_plus = tr_plus(green_correction_kernel(model, bc, xi, mu));
    dec.records.push_back(std::move(rec));
  }
  return dec;
}

std::vector<FrequencyFunction> resolvent_apply(
    const LaplaceTypeModel& model, const ProjectionBC& bc,
    const std::vector<FrequencyFunction>& fhat, double mu) {
  std::vector<FrequencyFunction> out;
  out.reserve(fhat.size());
  for (const auto& mode : fhat) {
    RVec xi(1);
    xi[0] = mode.xi;
    const CVec zero = CVec::Zero(model.L);
    auto solved =
        boundary_symbol_solve(model, bc, xi, mu, mode.values, zero);
    out.push_back({mode.xi, std::move(solved.u)});
  }
  return out;
}

Complex synthesize(const std::vector<FrequencyFunction>& modes,
                   const FrequencyGrid& grid, double x, double t) {
  if (modes.size() != grid.nodes.size())
    throw std::invalid_argument("synthesize: modes vs grid mismatch");
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Complex phase = std::polar(1.0, grid.nodes[i] * x);
    acc += grid.weights[i] * phase * modes[i].values.at(t)(0);
  }
  return acc / (2.0 * M_PI);
}

namespace {

// Largest singular value of a complex matrix by power iteration on A^H A.
std::pair<double, bool> largest_sv(const CMat& a, int iters, double tol) {
  CVec v = CVec::Zero(a.cols());
  for (int i = 0; i < v.size(); ++i)
    v[i] = Complex(std::cos(0.7 * i + 0.3), std::sin(1.3 * i + 1.1));
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < iters; ++it) {
    CVec w = a.adjoint() * (a * v);
    const double lam = w.norm();
    if (lam == 0.0) return {0.0, true};
    v = w / lam;
    const double sv = std::sqrt(lam);
    if (std::abs(sv - prev) <= tol * sv) return {sv, true};
    prev = sv;
  }
  return {prev, false};
}

}  // namespace

std::vector<NormScanRow> resolvent_norm_scan(const LaplaceTypeModel& model,
                                             const ProjectionBC& bc,
                                             const std::vector<double>& mu_list,
                                             const NormScanOptions& opts) {
  const auto basis = make_basis(opts.modes, 1.0);

  std::vector<NormScanRow> rows;
  for (double mu : mu_list) {
    double best = 0.0;
    bool conv = true;
    for (double factor : opts.xi_factors) {
      const double r = factor * std::max(mu, 1.0);
      RVec xi = RVec::Zero(std::max(model.n - 1, 1)).eval();
      if (model.n >= 2) xi[0] = r;
      const double rad = std::sqrt(xi.squaredNorm() + mu * mu);
      const double m = rad / 2.0;

      // The resolvent symbol is homogeneous of degree -d: pulling (xi,mu)
      // back to radius 2 scales the norm by m^-d.  Radius 2 keeps the
      // channel roots away from the basis scale, and the normalized problem
      // is resolved by a unit-scale basis.  Columns of the compression come
      // from the spectrally exact boundary solve.
      const RVec xi_hat = xi / m;
      const double mu_hat = mu / m;
      const CMat compressed =
          boundary_solve_compression(model, bc, xi_hat, mu_hat, basis);
      auto [sv, ok] = largest_sv(compressed, opts.power_iterations, opts.tol);
      conv = conv && ok;
      best = std::max(best, sv / (m * m));
    }
    rows.push_back({mu, std::pow(mu, model.order) * best, conv});
  }
  return rows;
}

TraceDensityResult trace_density(const LaplaceTypeModel& model,
                                 const ProjectionBC& bc, double mu,
                                 double tail_tolerance, double cutoff_factor) {
  TraceDensityResult res;
  if (model.n == 1) {
    const RVec xi(0);
    res.value = tr_plus(green_correction_kernel(model, bc, xi, mu));
    res.tail_estimate = 0.0;
    res.cutoff = 0.0;
    return res;
  }
  if (model.n != 2)
    throw std::invalid_argument(
        "trace_density: the correction has order -2, integrable over the "
        "boundary frequencies only for n <= 2");

  const FrequencyGrid grid =
      FrequencyGrid::make(std::max(mu, 1.0), 40.0, 0.01, 1.05, cutoff_factor);
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    RVec xi(1);
    xi[0] = grid.nodes[i];
    acc += grid.weights[i] *
           tr_plus(green_correction_kernel(model, bc, xi, mu));
  }
  acc /= 2.0 * M_PI;

  // tail estimate from the C/xi^2 envelope at the cutoff
  RVec xe(1);
  xe[0] = grid.cutoff;
  const double edge = std::abs(tr_plus(green_correction_kernel(model, bc, xe, mu)));
  const double tail = 2.0 * edge * grid.cutoff / (2.0 * M_PI);
  res.value = acc;
  res.tail_estimate = tail;
  res.cutoff = grid.cutoff;
  if (tail > tail_tolerance * std::abs(acc))
    throw GridTailError(
        "trace_density: integrand tail at the cutoff exceeds tolerance; "
        "enlarge the frequency grid");
  return res;
}

}  // namespace bdcalc
