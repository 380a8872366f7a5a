#include "bdcalc/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace bdcalc {

namespace {

Complex principal_sqrt(Complex z) {
  if (z.imag() == 0.0 && z.real() <= 0.0)
    throw std::domain_error("sigma_root: eigenvalue on the branch cut "
                            "(cannot occur for theta in (0,2pi))");
  return std::sqrt(z);
}

double min_sv(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues().minCoeff();
}

}  // namespace

LaplaceTypeModel LaplaceTypeModel::standard(int n, int L, double theta) {
  LaplaceTypeModel m;
  m.n = n;
  m.L = L;
  m.theta = theta;
  m.order = 2;
  m.leading_normal_coeff = CMat::Identity(L, L);
  return m;
}

CMat LaplaceTypeModel::q_at(const RVec& xi) const {
  if (q) return q(xi);
  return xi.squaredNorm() * CMat::Identity(L, L);
}

ProjectionBC ProjectionBC::dirichlet() {
  ProjectionBC bc;
  bc.kind = BcKind::dirichlet;
  return bc;
}
ProjectionBC ProjectionBC::neumann() {
  ProjectionBC bc;
  bc.kind = BcKind::neumann;
  return bc;
}
ProjectionBC ProjectionBC::robin(std::function<CMat(const RVec&)> b) {
  ProjectionBC bc;
  bc.kind = BcKind::robin;
  bc.b = std::move(b);
  return bc;
}
ProjectionBC ProjectionBC::projection(std::function<CMat(const RVec&)> pi,
                                      std::function<CMat(const RVec&)> b) {
  ProjectionBC bc;
  bc.kind = BcKind::projection;
  bc.pi = std::move(pi);
  bc.b = std::move(b);
  return bc;
}

CMat ProjectionBC::pi_at(const RVec& xi, int L) const {
  switch (kind) {
    case BcKind::dirichlet:
      return CMat::Identity(L, L);
    case BcKind::neumann:
    case BcKind::robin:
      return CMat::Zero(L, L);
    default:
      if (!pi) throw std::invalid_argument("ProjectionBC: missing pi");
      return pi(xi);
  }
}

CMat ProjectionBC::b_at(const RVec& xi, int L) const {
  if (kind == BcKind::dirichlet || kind == BcKind::neumann || !b)
    return CMat::Zero(L, L);
  return b(xi);
}

CMat sigma_root(const LaplaceTypeModel& model, const RVec& xi, double mu) {
  const CMat qm = model.q_at(xi);
  if (model.L == 1) {
    const Complex z = qm(0, 0) - std::polar(1.0, model.theta) * mu * mu;
    return CMat::Constant(1, 1, principal_sqrt(z));
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(qm);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sigma_root: eigen decomposition failed");
  const Complex shift = std::polar(1.0, model.theta) * mu * mu;
  CVec roots(model.L);
  for (int i = 0; i < model.L; ++i)
    roots[i] = principal_sqrt(Complex(es.eigenvalues()[i], 0.0) - shift);
  return es.eigenvectors() * roots.asDiagonal() *
         es.eigenvectors().adjoint();
}

Complex sigma_root_scalar(const LaplaceTypeModel& model, const RVec& xi,
                          double mu) {
  return sigma_root(model, xi, mu)(0, 0);
}

CMat reduced_bc_matrix(const LaplaceTypeModel& model, const ProjectionBC& bc,
                       const RVec& xi, double mu) {
  const CMat sigma = sigma_root(model, xi, mu);
  const int L = model.L;
  if (bc.kind == BcKind::general) {
    // bc rows applied to the decaying mode: gamma_l e^{-sigma t} = (-sigma)^l.
    if (bc.Pi_lower.empty() || bc.S_lower.empty() || bc.m.empty())
      throw std::invalid_argument("reduced_bc_matrix: incomplete general data");
    int rows = 0;
    for (int mj : bc.m) rows += mj;
    CMat out = CMat::Zero(rows, L);
    int row0 = 0;
    for (std::size_t j = 0; j < bc.m.size(); ++j) {
      CMat rowblock = CMat::Zero(bc.m[j], L);
      for (std::size_t k = 0; k <= j; ++k) {
        if (!bc.Pi_lower[j][k]) continue;
        const CMat pjk = bc.Pi_lower[j][k](xi);
        for (std::size_t l = 0; l <= k; ++l) {
          if (!bc.S_lower[k][l]) continue;
          CMat mode_pow = CMat::Identity(L, L);
          for (std::size_t p = 0; p < l; ++p) mode_pow = -sigma * mode_pow;
          rowblock += pjk * bc.S_lower[k][l](xi) * mode_pow;
        }
      }
      out.middleRows(row0, bc.m[j]) = rowblock;
      row0 += bc.m[j];
    }
    return out;
  }
  const CMat pi = bc.pi_at(xi, L);
  const CMat b = bc.b_at(xi, L);
  const CMat id = CMat::Identity(L, L);
  return pi + (id - pi) * (-sigma + b);
}

namespace {

// bc rows of the discretized boundary symbol, L x (N*L) for standard kinds.
CMat bc_rows_matrix(const LaplaceTypeModel& model, const ProjectionBC& bc,
                    const RVec& xi, const HalfLineBasis& basis) {
  const int L = model.L;
  const int n = basis.modes();
  const CMat pi = bc.pi_at(xi, L);
  const CMat b = bc.b_at(xi, L);
  const CMat id = CMat::Identity(L, L);
  const Eigen::RowVectorXd g0 = basis.endpoint_row().transpose();
  const Eigen::RowVectorXd g1 = g0 * basis.derivative_matrix();

  auto kron_row = [n](const CMat& a, const Eigen::RowVectorXd& r) -> CMat {
    CMat out(a.rows(), a.cols() * n);
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j)
        out.block(i, j * n, 1, n) = a(i, j) * r.cast<Complex>();
    return out;
  };

  return kron_row(pi, g0) + kron_row(id - pi, g1) + kron_row((id - pi) * b, g0);
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

BoundarySolveResult boundary_symbol_solve(const LaplaceTypeModel& model,
                                          const ProjectionBC& bc,
                                          const RVec& xi, double mu,
                                          const HalfLineFunction& f,
                                          const CVec& data) {
  if (bc.kind == BcKind::general)
    throw std::invalid_argument(
        "boundary_symbol_solve: general conditions not supported");
  const int L = model.L;
  if (f.value_dim() != L || data.size() != L)
    throw std::invalid_argument("boundary_symbol_solve: dimension mismatch");
  const auto& basis = f.basis;
  const int n = basis->modes();

  const CMat reduced = reduced_bc_matrix(model, bc, xi, mu);
  {
    Eigen::FullPivLU<CMat> lu(reduced);
    if (!lu.isInvertible())
      throw std::runtime_error(
          "boundary_symbol_solve: singular reduced matrix (not elliptic at "
          "this point)");
  }

  // One stacked least-squares system [interior; bc rows].  The solution
  // u = G_sigma f + e^{-sigma t} z has a geometrically convergent Laguerre
  // expansion, so the consistent overdetermined system recovers P_N u.
  const CMat qm = model.q_at(xi);
  const Complex shift = std::polar(1.0, model.theta) * mu * mu;
  const CMat d2 = (basis->derivative_matrix() * basis->derivative_matrix())
                      .cast<Complex>();
  const CMat interior = kron(shift * CMat::Identity(L, L) - qm,
                             CMat::Identity(n, n)) +
                        kron(CMat::Identity(L, L), d2);
  const CMat rows = bc_rows_matrix(model, bc, xi, *basis);

  CMat stack(interior.rows() + rows.rows(), interior.cols());
  stack << interior, rows;
  CVec rhs(stack.rows());
  rhs.head(n * L) = Eigen::Map<const CVec>(f.coeffs.data(), n * L);
  rhs.tail(L) = data;

  const CVec c = stack.colPivHouseholderQr().solve(rhs);
  CMat total = Eigen::Map<const CMat>(c.data(), n, L);
  HalfLineFunction u(basis, total);

  const double residual =
      (interior * c - rhs.head(n * L)).norm();
  return {std::move(u), residual};
}

CMat boundary_solve_compression(const LaplaceTypeModel& model,
                                const ProjectionBC& bc, const RVec& xi,
                                double mu, const BasisPtr& basis) {
  if (bc.kind == BcKind::general)
    throw std::invalid_argument(
        "boundary_solve_compression: general conditions not supported");
  const int L = model.L;
  const int n = basis->modes();

  const CMat qm = model.q_at(xi);
  const Complex shift = std::polar(1.0, model.theta) * mu * mu;
  const CMat d2 = (basis->derivative_matrix() * basis->derivative_matrix())
                      .cast<Complex>();
  const CMat interior = kron(shift * CMat::Identity(L, L) - qm,
                             CMat::Identity(n, n)) +
                        kron(CMat::Identity(L, L), d2);
  const CMat rows = bc_rows_matrix(model, bc, xi, *basis);

  CMat stack(interior.rows() + rows.rows(), interior.cols());
  stack << interior, rows;
  Eigen::ColPivHouseholderQR<CMat> qr(stack);

  CMat rhs = CMat::Zero(stack.rows(), n * L);
  rhs.topLeftCorner(n * L, n * L).setIdentity();
  return qr.solve(rhs);
}

// ---------------------------------------------------------------------------
// Ellipticity checks

namespace {

// directions on the unit sphere of R^dim
std::vector<RVec> sphere_directions(int dim, int resolution) {
  std::vector<RVec> dirs;
  if (dim == 1) {
    RVec p(1), mns(1);
    p[0] = 1.0;
    mns[0] = -1.0;
    dirs = {p, mns};
  } else if (dim == 2) {
    for (int i = 0; i < resolution; ++i) {
      const double phi = 2.0 * M_PI * i / resolution;
      RVec v(2);
      v << std::cos(phi), std::sin(phi);
      dirs.push_back(v);
    }
  } else if (dim == 3) {
    // Fibonacci lattice
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < resolution; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / resolution;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = 2.0 * M_PI * i / golden;
      RVec v(3);
      v << r * std::cos(phi), r * std::sin(phi), z;
      dirs.push_back(v);
    }
  } else {
    throw std::invalid_argument("sphere_directions: dim <= 3 supported");
  }
  return dirs;
}

double interior_min_sv(const LaplaceTypeModel& model, const RVec& xi_full,
                       double mu) {
  const RVec xip = xi_full.head(model.n - 1);
  const double xin = xi_full[model.n - 1];
  const Complex lead = std::polar(1.0, model.theta) * mu * mu;
  const CMat qm = model.q_at(xip);
  if (model.L == 1) return std::abs(lead - qm(0, 0) - xin * xin);
  Eigen::SelfAdjointEigenSolver<CMat> es(qm);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.L; ++i)
    best = std::min(best, std::abs(lead - es.eigenvalues()[i] - xin * xin));
  return best;
}

}  // namespace

ConditionResult check_E1(const LaplaceTypeModel& model,
                         const EllipticityGrids& grids) {
  ConditionResult res;
  res.name = "E1";
  res.threshold = grids.threshold;

  const auto dirs = sphere_directions(model.n, grids.e1_sphere);
  double best = std::numeric_limits<double>::infinity();
  double best_psi = 0.0;
  RVec best_dir;

  auto eval = [&](double psi, const RVec& omega) {
    const double mu = std::cos(psi);
    const RVec xi_full = std::sin(psi) * omega;
    return interior_min_sv(model, xi_full, mu);
  };

  for (int i = 0; i < grids.e1_sphere; ++i) {
    const double psi = 0.5 * M_PI * (i + 0.5) / grids.e1_sphere;
    for (const auto& omega : dirs) {
      const double v = eval(psi, omega);
      if (v < best) {
        best = v;
        best_psi = psi;
        best_dir = omega;
      }
    }
  }

  // local refinement of the witness along psi
  double lo = std::max(0.0, best_psi - M_PI / grids.e1_sphere);
  double hi = std::min(0.5 * M_PI, best_psi + M_PI / grids.e1_sphere);
  for (int round = 0; round < 60; ++round) {
    const int n = 8;
    double rb = best;
    double rp = best_psi;
    for (int i = 0; i <= n; ++i) {
      const double psi = lo + (hi - lo) * i / n;
      const double v = eval(psi, best_dir);
      if (v < rb) {
        rb = v;
        rp = psi;
      }
    }
    best = rb;
    best_psi = rp;
    const double w = 0.25 * (hi - lo);
    lo = std::max(0.0, rp - w);
    hi = std::min(0.5 * M_PI, rp + w);
  }

  res.min_sv = best;
  res.witness_mu = std::cos(best_psi);
  res.witness_xi = (std::sin(best_psi) * best_dir).head(model.n - 1);
  res.witness_xin = (std::sin(best_psi) * best_dir)[model.n - 1];
  res.pass = best >= grids.threshold;
  return res;
}

ConditionResult check_Pi2(const LaplaceTypeModel& model, const ProjectionBC& bc,
                          const EllipticityGrids& grids, double s_order) {
  (void)s_order;  // Sobolev bookkeeping is metadata only at desk scale
  ConditionResult res;
  res.name = "Pi2";
  res.threshold = grids.threshold;

  const auto basis = make_basis(grids.modes, 1.0);
  const int L = model.L;
  const int n = basis->modes();
  const CMat d2 =
      (basis->derivative_matrix() * basis->derivative_matrix()).cast<Complex>();

  const auto dirs = sphere_directions(std::max(model.n - 1, 1),
                                      grids.pi2_directions);
  double best = std::numeric_limits<double>::infinity();
  RVec best_xi;
  double best_mu = 0.0;

  for (const auto& omega : dirs) {
    for (int j = 1; j <= grids.pi2_arc; ++j) {
      const double t = 0.5 * M_PI * j / grids.pi2_arc;
      const double mu = std::cos(t);
      const RVec xi = std::sin(t) * omega;

      const CMat sigma = sigma_root(model, xi, mu);
      double point_min = std::numeric_limits<double>::infinity();

      // Re sigma > 0 (spectrum of the Hermitian part)
      Eigen::SelfAdjointEigenSolver<CMat> hs(
          CMat(0.5 * (sigma + sigma.adjoint())));
      point_min = std::min(point_min, hs.eigenvalues().minCoeff());

      // reduced boundary matrix
      point_min = std::min(point_min, min_sv(reduced_bc_matrix(model, bc, xi, mu)));

      // discretized boundary-symbol operator [A; bc rows]
      const Complex lead = std::polar(1.0, model.theta) * mu * mu;
      const CMat interior =
          kron(lead * CMat::Identity(L, L) - model.q_at(xi), CMat::Identity(n, n)) +
          kron(CMat::Identity(L, L), d2);
      const CMat rows = bc_rows_matrix(model, bc, xi, *basis);
      CMat stack(interior.rows() + rows.rows(), interior.cols());
      stack << interior, rows;
      point_min = std::min(point_min, min_sv(stack));

      if (point_min < best) {
        best = point_min;
        best_xi = xi;
        best_mu = mu;
      }
    }
  }

  res.min_sv = best;
  res.witness_xi = best_xi;
  res.witness_mu = best_mu;
  res.pass = best >= grids.threshold;
  return res;
}

Complex limit_mode_rate(double theta) {
  return std::polar(1.0, 0.5 * (theta - M_PI));
}

ConditionResult check_Pi3(const LaplaceTypeModel& model, const ProjectionBC& bc,
                          const EllipticityGrids& grids) {
  ConditionResult res;
  res.name = "Pi3";
  res.threshold = grids.threshold;
  const int L = model.L;

  // leading normal coefficient must be a positive multiple of the identity
  // in this frequency-diagonal reduction
  Complex a0(1.0, 0.0);
  if (model.leading_normal_coeff.size()) {
    a0 = model.leading_normal_coeff(0, 0);
    if ((model.leading_normal_coeff - a0 * CMat::Identity(L, L)).norm() > 1e-12)
      throw std::invalid_argument(
          "check_Pi3: non-scalar leading normal coefficient unsupported");
  }
  const Complex rho = limit_mode_rate(model.theta) / std::sqrt(a0);

  const auto dirs = sphere_directions(std::max(model.n - 1, 1),
                                      grids.pi3_directions);
  double best = std::numeric_limits<double>::infinity();
  RVec best_xi;

  for (const auto& omega : dirs) {
    const CMat pi = bc.pi_at(omega, L);
    if ((pi * pi - pi).norm() > 1e-10)
      throw std::invalid_argument("check_Pi3: pi is not idempotent");
    const CMat id = CMat::Identity(L, L);
    // limit-symbol rows on the kernel mode: the off-diagonal S terms drop
    const CMat m = pi + (id - pi) * (-rho);
    const double v = min_sv(m);
    if (v < best) {
      best = v;
      best_xi = omega;
    }
  }

  res.min_sv = best;
  res.witness_xi = best_xi;
  res.witness_mu = 0.0;
  res.pass = best >= grids.threshold;
  return res;
}

EllipticityReport assemble_report(const LaplaceTypeModel& model,
                                  const ProjectionBC& bc,
                                  const EllipticityGrids& grids) {
  EllipticityReport rep;
  rep.conditions.push_back(check_E1(model, grids));
  // a ray inside the spectrum makes sigma hit the branch cut; that is a
  // failure of the condition, not an error of the checker
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      rep.conditions.push_back(fn());
    } catch (const std::domain_error&) {
      ConditionResult failed;
      failed.name = name;
      failed.pass = false;
      failed.min_sv = 0.0;
      failed.threshold = grids.threshold;
      rep.conditions.push_back(failed);
    }
  };
  guarded("Pi2", [&] { return check_Pi2(model, bc, grids); });
  guarded("Pi3", [&] { return check_Pi3(model, bc, grids); });
  return rep;
}

LimitNullspaceProbe limit_nullspace_probe(const LaplaceTypeModel& model,
                                          const BasisPtr& basis, int count) {
  const int n = basis->modes();
  const int L = model.L;
  Complex a0(1.0, 0.0);
  if (model.leading_normal_coeff.size()) a0 = model.leading_normal_coeff(0, 0);

  const CMat d2 =
      (basis->derivative_matrix() * basis->derivative_matrix()).cast<Complex>();
  const CMat scalar_op =
      std::polar(1.0, model.theta) * CMat::Identity(n, n) + a0 * d2;
  const CMat full = kron(CMat::Identity(L, L), scalar_op);

  Eigen::JacobiSVD<CMat> svd(full, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();

  LimitNullspaceProbe probe;
  const int keep = std::min<int>(count, sv.size());
  for (int i = 0; i < keep; ++i) probe.smallest.push_back(sv[sv.size() - 1 - i]);

  // alignment of the most singular direction with the e^{-rho t} mode,
  // maximized over fiber components
  const Complex rho = limit_mode_rate(model.theta) / std::sqrt(a0);
  const CVec mode = exp_mode(basis, rho, CVec::Ones(1)).mode.coeffs.col(0);
  const CVec vmin = svd.matrixV().col(sv.size() - 1);
  double align = 0.0;
  for (int c = 0; c < L; ++c) {
    const CVec part = vmin.segment(c * n, n);
    if (part.norm() > 1e-8)
      align = std::max(align,
                       std::abs(mode.dot(part)) / (mode.norm() * part.norm()));
  }
  probe.alignment = align;

  int nulls = 0;
  const double tol = 1e-8 * sv[0];
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] < tol) ++nulls;
  probe.null_dim = nulls;
  return probe;
}

}  // namespace bdcalc
