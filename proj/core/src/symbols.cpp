#include "bdcalc/symbols.hpp"

#include <cmath>
#include <random>

namespace bdcalc {

HomogeneousComponent HomogeneousComponent::from_unit_sphere(
    double degree, std::optional<double> regularity, int rows, int cols,
    SymbolEval sphere_eval) {
  HomogeneousComponent h;
  h.degree = degree;
  h.regularity = regularity;
  h.rows = rows;
  h.cols = cols;
  h.eval = [degree, f = std::move(sphere_eval)](const RVec& x, const RVec& xi,
                                                double mu) -> CMat {
    const double r = std::sqrt(xi.squaredNorm() + mu * mu);
    if (r == 0.0)
      throw std::domain_error("homogeneous component evaluated at (xi',mu)=0");
    return std::pow(r, degree) * f(x, xi / r, mu / r);
  };
  return h;
}

double homogeneity_defect(const HomogeneousComponent& h, int dim_xi,
                          int n_trials, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> lam(0.5, 10.0);
  std::uniform_real_distribution<double> mupos(0.0, 1.0);

  double worst = 0.0;
  for (int t = 0; t < n_trials; ++t) {
    RVec xi(dim_xi);
    for (int i = 0; i < dim_xi; ++i) xi[i] = unit(rng);
    double mu = mupos(rng);
    if (xi.norm() + mu < 1e-3) {
      xi.setOnes();
      mu = 0.5;
    }
    RVec x = RVec::Zero(dim_xi);
    const double l = lam(rng);
    const CMat lhs = h.eval(x, l * xi, l * mu);
    const CMat rhs = std::pow(l, h.degree) * h.eval(x, xi, mu);
    const double scale = rhs.norm();
    const double defect = (lhs - rhs).norm() / (scale > 0 ? scale : 1.0);
    worst = std::max(worst, defect);
  }
  return worst;
}

PolyHomSymbol::PolyHomSymbol(double order_, double regularity_,
                             std::vector<HomogeneousComponent> comps,
                             double excision_radius_)
    : order(order_),
      regularity(regularity_),
      components(std::move(comps)),
      excision_radius(excision_radius_) {
  if (excision_radius <= 0.0)
    throw std::invalid_argument("PolyHomSymbol: excision_radius must be > 0");
  for (std::size_t j = 0; j < components.size(); ++j) {
    const double want = order - static_cast<double>(j);
    if (std::abs(components[j].degree - want) > 1e-12)
      throw std::invalid_argument(
          "PolyHomSymbol: component degrees must be d, d-1, ...");
  }
}

CMat eval_polyhom(const PolyHomSymbol& p, const ParamPoint& pt, int n_terms) {
  if (n_terms < 0 || n_terms > static_cast<int>(p.components.size()))
    throw std::invalid_argument("eval_polyhom: n_terms exceeds stored ladder");
  const double r = pt.radius();
  const double chi = excision(r, p.excision_radius);
  if (n_terms == 0) return CMat();
  const int rows = p.components.front().rows;
  const int cols = p.components.front().cols;
  CMat acc = CMat::Zero(rows, cols);
  if (chi == 0.0) return acc;  // all terms excised; components never touched
  for (int j = 0; j < n_terms; ++j)
    acc += chi * p.components[j].eval(pt.x, pt.xi, pt.mu);
  return acc;
}

double growth_order_estimate(const SymbolEval& p, const RVec& x,
                             const RVec& direction, double r0,
                             int n_doublings) {
  // Log-log slope between consecutive dyadic radii, averaged over the top half.
  std::vector<double> vals;
  double r = r0;
  for (int k = 0; k <= n_doublings; ++k, r *= 2.0)
    vals.push_back(p(x, r * direction, 0.0).norm());
  double acc = 0.0;
  int cnt = 0;
  for (std::size_t k = vals.size() / 2; k + 1 < vals.size(); ++k) {
    acc += std::log2(vals[k + 1] / vals[k]);
    ++cnt;
  }
  return cnt ? acc / cnt : 0.0;
}

std::vector<double> default_mu_ladder() {
  std::vector<double> mu(11);
  double v = 10.0;
  for (auto& m : mu) {
    m = v;
    v *= 2.0;
  }
  return mu;
}

LimitSymbolResult principal_limit_symbol(const SymbolEval& p, double order,
                                         double regularity, const RVec& x,
                                         const RVec& xi,
                                         const std::vector<double>& mu_ladder,
                                         double decay_factor) {
  if (mu_ladder.size() < 3)
    throw std::invalid_argument("principal_limit_symbol: ladder too short");
  for (std::size_t k = 1; k < mu_ladder.size(); ++k)
    if (mu_ladder[k] <= mu_ladder[k - 1])
      throw std::invalid_argument(
          "principal_limit_symbol: ladder must increase");
  if (mu_ladder.back() < 1e3)
    throw std::invalid_argument(
        "principal_limit_symbol: ladder must reach mu >= 1e3");

  std::vector<CMat> vals;
  vals.reserve(mu_ladder.size());
  for (double mu : mu_ladder) {
    ParamPoint pt(x, xi, mu);
    vals.push_back(std::pow(bracket(pt), regularity - order) * p(x, xi, mu));
  }

  LimitSymbolResult res;
  res.report.differences.resize(vals.size() - 1);
  for (std::size_t k = 0; k + 1 < vals.size(); ++k)
    res.report.differences[k] = (vals[k + 1] - vals[k]).norm();

  const double scale = vals.back().norm();
  const double tiny = 1e-13 * (scale > 0 ? scale : 1.0);

  // Monotone-decay heuristic on the non-negligible tail of the ladder.
  bool ok = true;
  const auto& d = res.report.differences;
  for (std::size_t k = d.size() / 2; k + 1 < d.size(); ++k) {
    if (d[k + 1] < tiny) continue;
    if (d[k] < decay_factor * d[k + 1]) {
      ok = false;
      break;
    }
  }
  res.report.converged = ok;
  if (!ok)
    res.report.note = "ladder differences not decreasing; "
                      "symbol may lack an expansion at infinity";

  // One Richardson step for the 1/mu error model of a doubling ladder.
  const std::size_t n = vals.size();
  if (d.back() > tiny && n >= 2 && ok)
    res.value = 2.0 * vals[n - 1] - vals[n - 2];
  else
    res.value = vals[n - 1];
  return res;
}

std::vector<double> default_r_ladder() {
  std::vector<double> r(14);
  double v = 0.5;
  for (auto& e : r) {
    e = v;
    v *= 0.5;
  }
  return r;
}

AngularSymbolResult principal_angular_symbol(
    const HomogeneousComponent& h, const RVec& x, const RVec& xi,
    const std::vector<double>& r_ladder) {
  if (xi.norm() == 0.0)
    throw std::invalid_argument("principal_angular_symbol: xi' must be nonzero");
  if (r_ladder.size() < 3)
    throw std::invalid_argument("principal_angular_symbol: ladder too short");
  for (std::size_t k = 1; k < r_ladder.size(); ++k)
    if (r_ladder[k] >= r_ladder[k - 1] || r_ladder[k] <= 0.0)
      throw std::invalid_argument(
          "principal_angular_symbol: ladder must decrease toward 0");

  const double nu = h.regularity.value_or(0.0);
  const RVec dir = xi / xi.norm();
  const double xifac = std::pow(xi.norm(), nu);

  std::vector<CMat> vals;
  vals.reserve(r_ladder.size());
  for (double r : r_ladder)
    vals.push_back(xifac * std::pow(r, -nu) *
                   h.eval(x, r * dir, std::sqrt(1.0 - r * r)));

  AngularSymbolResult res;
  res.report.differences.resize(vals.size() - 1);
  for (std::size_t k = 0; k + 1 < vals.size(); ++k)
    res.report.differences[k] = (vals[k + 1] - vals[k]).norm();

  const double scale = vals.back().norm();
  const double tiny = 1e-12 * (scale > 0 ? scale : 1.0);
  bool ok = true;
  const auto& d = res.report.differences;
  for (std::size_t k = d.size() / 2; k + 1 < d.size(); ++k) {
    if (d[k + 1] < tiny) continue;
    if (d[k + 1] > d[k] * 1.01) {
      ok = false;
      break;
    }
  }
  res.report.converged = ok;
  if (!ok)
    res.report.note =
        "values diverge as r->0; regularity number appears overstated";
  // one Richardson step for the O(r) error model of a halving ladder
  const std::size_t nv = vals.size();
  if (ok && d.back() > tiny)
    res.value = 2.0 * vals[nv - 1] - vals[nv - 2];
  else
    res.value = vals[nv - 1];
  return res;
}

// ---------------------------------------------------------------------------
// Transmission condition

namespace {

using PointEval = std::function<Complex(double xn, const RVec& xi, double xin,
                                        double mu)>;

// Nested central differences for the multi-index alpha in xi', then k in xn
// and j in mu.  The mu derivative at the boundary mu=0 uses a one-sided
// second-order stencil since the symbol lives on mu >= 0.
Complex diff_mu(const PointEval& f, double xn, const RVec& xi, double xin,
                double mu, int j, double h) {
  if (j == 0) return f(xn, xi, xin, mu);
  auto g = [&](double m) { return diff_mu(f, xn, xi, xin, m, j - 1, h); };
  if (mu - h < 0.0)
    return (-3.0 * g(mu) + 4.0 * g(mu + h) - g(mu + 2.0 * h)) / (2.0 * h);
  return (g(mu + h) - g(mu - h)) / (2.0 * h);
}

Complex diff_xi(const PointEval& f, double xn, RVec xi, double xin, double mu,
                const std::vector<int>& alpha, std::size_t idx, int j_mu,
                double h) {
  while (idx < alpha.size() && alpha[idx] == 0) ++idx;
  if (idx == alpha.size()) return diff_mu(f, xn, xi, xin, mu, j_mu, h);
  std::vector<int> a = alpha;
  --a[idx];
  RVec xp = xi, xm = xi;
  xp[idx] += h;
  xm[idx] -= h;
  return (diff_xi(f, xn, xp, xin, mu, a, idx, j_mu, h) -
          diff_xi(f, xn, xm, xin, mu, a, idx, j_mu, h)) /
         (2.0 * h);
}

Complex diff_xn(const PointEval& f, double xn, const RVec& xi, double xin,
                double mu, int k, const std::vector<int>& alpha, int j_mu,
                double h) {
  if (k == 0) return diff_xi(f, xn, xi, xin, mu, alpha, 0, j_mu, h);
  auto g = [&](double t) { return diff_xn(f, t, xi, xin, mu, k - 1, alpha, j_mu, h); };
  return (g(xn + h) - g(xn - h)) / (2.0 * h);
}

void enumerate_alphas(int dim, int budget, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out, std::size_t pos = 0) {
  if (pos == static_cast<std::size_t>(dim)) {
    out.push_back(cur);
    return;
  }
  for (int v = 0; v <= budget; ++v) {
    cur[pos] = v;
    enumerate_alphas(dim, budget - v, cur, out, pos + 1);
  }
}

}  // namespace

TransmissionReport check_transmission(const InteriorSymbol& a, int dim_xi,
                                      const TransmissionDepth& depth,
                                      const RVec& x, double fd_step,
                                      double rel_tol) {
  TransmissionReport rep;
  const RVec x0 = x.size() ? x : RVec::Zero(std::max(dim_xi, 1));
  const RVec xi0 = RVec::Zero(dim_xi);

  const int n_levels = depth.max_level < 0
                           ? static_cast<int>(a.components.size())
                           : std::min<int>(depth.max_level + 1,
                                           a.components.size());

  std::vector<std::vector<int>> alphas;
  {
    std::vector<int> cur(dim_xi, 0);
    if (dim_xi > 0)
      enumerate_alphas(dim_xi, depth.max_xi, cur, alphas);
    else
      alphas.push_back({});
  }

  for (int l = 0; l < n_levels; ++l) {
    const auto& comp = a.components[l];
    PointEval f = [&](double xn, const RVec& xi, double xin, double mu) {
      const CMat v = comp.eval(x0, xn, xi, xin, mu);
      return v(0, 0);
    };
    for (const auto& alpha : alphas) {
      int abs_alpha = 0;
      for (int v : alpha) abs_alpha += v;
      for (int k = 0; k <= depth.max_xn; ++k) {
        for (int j = 0; j <= depth.max_mu; ++j) {
          const Complex plus =
              diff_xn(f, 0.0, xi0, +1.0, 0.0, k, alpha, j, fd_step);
          const Complex minus =
              diff_xn(f, 0.0, xi0, -1.0, 0.0, k, alpha, j, fd_step);
          const int expo = static_cast<int>(std::lround(a.order)) - l -
                           abs_alpha - j;
          const double sign = (expo % 2 == 0) ? 1.0 : -1.0;
          const double scale =
              std::max({std::abs(plus), std::abs(minus), 1e-8});
          const double defect = std::abs(plus - sign * minus) / scale;
          ++rep.checks;
          rep.worst_defect = std::max(rep.worst_defect, defect);
          if (defect > rel_tol) {
            rep.pass = false;
            rep.violations.push_back({l, k, j, alpha, plus, minus, defect});
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace bdcalc
