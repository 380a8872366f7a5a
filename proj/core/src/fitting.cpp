#include "bdcalc/fitting.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace bdcalc {

ExpansionModel ExpansionModel::trace_density_model(double d, double nu, int n,
                                                   int count_a, int count_b) {
  ExpansionModel m;
  for (int j = 0; j < count_a; ++j) m.ladder_a.push_back(d - j + n - 1);
  for (int j = 0; j < count_b; ++j) {
    m.ladder_b.push_back(d - nu - j);
    m.ladder_b_logs.push_back(true);
  }
  return m;
}

std::vector<FitBasisElement> ExpansionModel::basis() const {
  for (std::size_t k = 1; k < ladder_a.size(); ++k)
    if (ladder_a[k] >= ladder_a[k - 1])
      throw std::invalid_argument("ExpansionModel: ladder_a must decrease");
  for (std::size_t k = 1; k < ladder_b.size(); ++k)
    if (ladder_b[k] >= ladder_b[k - 1])
      throw std::invalid_argument("ExpansionModel: ladder_b must decrease");

  std::vector<FitBasisElement> out;
  auto have = [&](double p, bool lg) {
    for (const auto& e : out)
      if (std::abs(e.exponent - p) < 1e-12 && e.with_log == lg) return true;
    return false;
  };
  for (double p : ladder_a)
    if (!have(p, false)) out.push_back({p, false});
  for (std::size_t j = 0; j < ladder_b.size(); ++j) {
    if (!have(ladder_b[j], false)) out.push_back({ladder_b[j], false});
    const bool lg = j < ladder_b_logs.size() ? ladder_b_logs[j] : false;
    if (lg && !have(ladder_b[j], true)) out.push_back({ladder_b[j], true});
  }
  return out;
}

Complex FitResult::coefficient_at(double exponent, bool with_log) const {
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (std::abs(basis[k].exponent - exponent) < 1e-12 &&
        basis[k].with_log == with_log)
      return coefficients[k];
  throw std::out_of_range("FitResult: no such basis element");
}

namespace {

FitResult fit_on_basis(const std::vector<double>& mu,
                       const std::vector<Complex>& values,
                       std::vector<FitBasisElement> basis) {
  const int m = static_cast<int>(mu.size());
  const int k = static_cast<int>(basis.size());
  if (m < 2 * k)
    throw std::invalid_argument(
        "fit_expansion: need at least twice as many samples as basis "
        "functions");
  for (double v : mu)
    if (v < 2.0)
      throw std::invalid_argument("fit_expansion: samples require mu >= 2");

  CMat design(m, k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) {
      double v = std::pow(mu[i], basis[j].exponent);
      if (basis[j].with_log) v *= std::log(mu[i]);
      design(i, j) = v;
    }

  RVec colnorm(k);
  for (int j = 0; j < k; ++j) {
    colnorm[j] = design.col(j).norm();
    if (colnorm[j] == 0.0) colnorm[j] = 1.0;
    design.col(j) /= colnorm[j];
  }

  CVec rhs(m);
  for (int i = 0; i < m; ++i) rhs[i] = values[i];

  Eigen::JacobiSVD<CMat> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond =
      svd.singularValues()(0) / svd.singularValues()(k - 1);
  if (cond > 1e12)
    throw IllPosedFitError(
        "fit_expansion: design condition number " + std::to_string(cond) +
        " exceeds 1e12; shrink the expansion model");

  CVec coeff = svd.solve(rhs);
  const double resid = (design * coeff - rhs).norm() /
                       std::max(rhs.norm(), 1e-300);
  for (int j = 0; j < k; ++j) coeff[j] /= colnorm[j];

  FitResult res;
  res.basis = std::move(basis);
  res.coefficients = std::move(coeff);
  res.residual = resid;
  res.condition_number = cond;
  return res;
}

}  // namespace

FitResult fit_expansion(const std::vector<double>& mu,
                        const std::vector<Complex>& values,
                        const ExpansionModel& model) {
  if (mu.size() != values.size())
    throw std::invalid_argument("fit_expansion: sample size mismatch");
  return fit_on_basis(mu, values, model.basis());
}

std::vector<double> default_fit_grid() {
  std::vector<double> mu(24);
  const double lo = std::log(2.0), hi = std::log(128.0);
  for (int i = 0; i < 24; ++i)
    mu[i] = std::exp(lo + (hi - lo) * i / 23.0);
  return mu;
}

LogPresenceResult log_presence_test(const std::vector<double>& mu,
                                    const std::vector<Complex>& values,
                                    const ExpansionModel& model,
                                    double exponent) {
  auto base = model.basis();
  std::vector<FitBasisElement> without, with;
  for (const auto& e : base) {
    if (e.with_log && std::abs(e.exponent - exponent) < 1e-12) continue;
    without.push_back(e);
  }
  with = without;
  with.push_back({exponent, true});

  const FitResult f0 = fit_on_basis(mu, values, without);
  const FitResult f1 = fit_on_basis(mu, values, with);

  double scale = 0.0;
  for (const auto& v : values) scale = std::max(scale, std::abs(v));

  LogPresenceResult res;
  res.coefficient = f1.coefficient_at(exponent, true);
  res.residual_gain = f1.residual > 0.0 ? f0.residual / f1.residual
                                        : std::numeric_limits<double>::infinity();
  const bool coeff_visible = std::abs(res.coefficient) > 1e-6 * scale;
  res.present = res.residual_gain >= 10.0 && coeff_visible;
  return res;
}

namespace {

// Adaptive Simpson on [a,b].
Complex simpson(const std::function<Complex(double)>& f, double a, double b,
                Complex fa, Complex fm, Complex fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const Complex flm = f(lm), frm = f(rm);
  const Complex whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const Complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Complex delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

Complex integrate_line(const std::function<Complex(double)>& f, double a,
                       double b, double tol) {
  const Complex fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, tol, 48);
}

}  // namespace

Complex interior_coefficient(
    const std::function<Complex(const RVec& xi)>& component_at_mu1, int n,
    double component_order, double abs_tol) {
  if (!(component_order < -n))
    throw std::domain_error(
        "interior_coefficient: component order must be < -n for "
        "integrability");
  if (n < 1 || n > 2)
    throw std::invalid_argument("interior_coefficient: n <= 2 supported");

  // decay sanity on samples along an axis
  {
    RVec xi = RVec::Zero(n);
    xi[0] = 64.0;
    const double v64 = std::abs(component_at_mu1(xi));
    xi[0] = 512.0;
    const double v512 = std::abs(component_at_mu1(xi));
    if (v64 > 0.0 && v512 > 0.0) {
      const double slope = std::log(v512 / v64) / std::log(8.0);
      if (slope > -static_cast<double>(n) - 1e-3)
        throw std::domain_error(
            "interior_coefficient: sampled decay too slow for integrability");
    }
  }

  const double twopi = 2.0 * M_PI;
  if (n == 1) {
    auto line = [&](double x) {
      RVec xi(1);
      xi[0] = x;
      return component_at_mu1(xi);
    };
    // finite core plus 1/x-substituted tails
    const Complex core = integrate_line(line, -64.0, 64.0, abs_tol);
    auto tail = [&](double u) {  // x = 1/u
      if (u == 0.0) return Complex(0.0, 0.0);
      return line(1.0 / u) / (u * u);
    };
    auto tail_neg = [&](double u) {
      if (u == 0.0) return Complex(0.0, 0.0);
      return line(-1.0 / u) / (u * u);
    };
    const Complex up = integrate_line(tail, 0.0, 1.0 / 64.0, abs_tol);
    const Complex dn = integrate_line(tail_neg, 0.0, 1.0 / 64.0, abs_tol);
    return (core + up + dn) / twopi;
  }

  // n = 2: polar coordinates, angular trapezoid x radial adaptive
  const int n_ang = 64;
  Complex acc(0.0, 0.0);
  for (int i = 0; i < n_ang; ++i) {
    const double phi = twopi * i / n_ang;
    RVec dir(2);
    dir << std::cos(phi), std::sin(phi);
    auto radial = [&](double r) { return component_at_mu1(r * dir) * r; };
    const Complex core = integrate_line(radial, 0.0, 64.0, abs_tol);
    auto tail = [&](double u) {
      if (u == 0.0) return Complex(0.0, 0.0);
      return radial(1.0 / u) / (u * u);
    };
    const Complex far = integrate_line(tail, 0.0, 1.0 / 64.0, abs_tol);
    acc += (core + far) * (twopi / n_ang);
  }
  return acc / (twopi * twopi);
}

double loglog_slope(const std::vector<double>& mu,
                    const std::vector<Complex>& values) {
  const int m = static_cast<int>(mu.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const double x = std::log(mu[i]);
    const double y = std::log(std::abs(values[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace bdcalc
