#include "bdcalc/halfline.hpp"

#include <cmath>

namespace bdcalc {

namespace {

// Scaled Laguerre functions l_k(x) = L_k(x) exp(-x/2) for all k <= n at one
// point.  The recurrence runs on mantissas with a shared binary exponent so
// that the start value exp(-x/2) may underflow the double range while the
// products near the quadrature nodes stay exact.
void scaled_laguerre(int n, double x, double* out) {
  double lm1 = 0.0;
  double l0 = 1.0;
  double ex = -0.5 * x * 1.4426950408889634;  // log2 of the overall scale
  out[0] = std::exp2(ex);
  for (int k = 0; k < n; ++k) {
    double lp = ((2.0 * k + 1.0 - x) * l0 - k * lm1) / (k + 1.0);
    if (std::abs(lp) > 0x1p+500) {
      lp *= 0x1p-500;
      l0 *= 0x1p-500;
      ex += 500.0;
    }
    lm1 = l0;
    l0 = lp;
    // two-step rescale keeps products representable even when exp2(ex)
    // itself would underflow
    const double half = std::exp2(0.5 * ex);
    out[k + 1] = (l0 * half) * half;
  }
}

// Long double version of the scaled recurrence for the rule construction.
void scaled_laguerre_ld(int n, long double x, long double* out) {
  long double lm1 = 0.0L;
  long double l0 = 1.0L;
  long double ex = -0.5L * x * 1.442695040888963407L;
  out[0] = std::exp2(ex);
  for (int k = 0; k < n; ++k) {
    long double lp = ((2.0L * k + 1.0L - x) * l0 - k * lm1) / (k + 1.0L);
    if (std::abs(lp) > 0x1p+500L) {
      lp *= 0x1p-500L;
      l0 *= 0x1p-500L;
      ex += 500.0L;
    }
    lm1 = l0;
    l0 = lp;
    const long double half = std::exp2(0.5L * ex);
    out[k + 1] = (l0 * half) * half;
  }
}

// Gauss-Laguerre rule for weight exp(-x): Newton iteration on the scaled
// functions in extended precision, with the exp(x) of the classical weight
// folded in so that large nodes stay finite.  Returns total weights for
// integration against dx.
void gauss_laguerre(int q, RVec& x, RVec& w) {
  x.resize(q);
  w.resize(q);
  std::vector<long double> buf(q + 2);
  long double z = 0.0L;
  for (int i = 0; i < q; ++i) {
    if (i == 0) {
      z = 3.0L / (1.0L + 2.4L * q);
    } else if (i == 1) {
      z += 15.0L / (1.0L + 2.5L * q);
    } else {
      const long double ai = i - 1;
      z += ((1.0L + 2.55L * ai) / (1.9L * ai)) * (z - (long double)x[i - 2]);
    }
    int settled = 0;
    for (int iter = 0; iter < 160; ++iter) {
      scaled_laguerre_ld(q + 1, z, buf.data());
      const long double lq = buf[q];
      const long double lqm1 = buf[q - 1];
      // d/dx [L_q e^{-x/2}] = (q(L_q - L_{q-1})/x - L_q/2) e^{-x/2}
      const long double dlq = q * (lq - lqm1) / z - 0.5L * lq;
      const long double dz = lq / dlq;
      z -= dz;
      if (std::abs(dz) <= 1e-18L * std::max(1.0L, z)) {
        if (++settled >= 2) break;  // two clean steps polish the root
      } else {
        settled = 0;
      }
    }
    scaled_laguerre_ld(q + 1, z, buf.data());
    x[i] = static_cast<double>(z);
    const long double lq1 = buf[q + 1];
    w[i] = static_cast<double>(z / ((q + 1.0L) * (q + 1.0L) * lq1 * lq1));
  }
}

}  // namespace

HalfLineBasis::HalfLineBasis(int n_modes, double scale, int quad_size)
    : n_(n_modes), alpha_(scale) {
  if (n_modes < 1) throw std::invalid_argument("HalfLineBasis: n_modes >= 1");
  if (scale <= 0.0) throw std::invalid_argument("HalfLineBasis: scale > 0");
  const int q = quad_size > 0 ? quad_size : 2 * n_modes;
  if (q < 2 * n_modes)
    throw std::invalid_argument("HalfLineBasis: quadrature size must be >= 2N");

  RVec gx, gw;
  gauss_laguerre(q, gx, gw);
  nodes_ = gx / (2.0 * alpha_);
  weights_ = gw / (2.0 * alpha_);

  node_values_.resize(q, n_);
  std::vector<double> buf(n_ + 1);
  const double root = std::sqrt(2.0 * alpha_);
  for (int p = 0; p < q; ++p) {
    scaled_laguerre(n_, gx[p], buf.data());
    for (int k = 0; k < n_; ++k) node_values_(p, k) = root * buf[k];
  }

  // phi_k' = -alpha phi_k - 2 alpha sum_{j<k} phi_j
  deriv_ = RMat::Zero(n_, n_);
  for (int k = 0; k < n_; ++k) {
    deriv_(k, k) = -alpha_;
    for (int j = 0; j < k; ++j) deriv_(j, k) = -2.0 * alpha_;
  }

  // t phi_k = ((2k+1) phi_k - (k+1) phi_{k+1} - k phi_{k-1}) / (2 alpha)
  tmat_ = RMat::Zero(n_, n_);
  for (int k = 0; k < n_; ++k) {
    tmat_(k, k) = (2.0 * k + 1.0) / (2.0 * alpha_);
    if (k + 1 < n_) tmat_(k + 1, k) = -(k + 1.0) / (2.0 * alpha_);
    if (k >= 1) tmat_(k - 1, k) = -static_cast<double>(k) / (2.0 * alpha_);
  }

  // phi_k(0) = sqrt(2 alpha)
  endpoint_ = RVec::Constant(n_, root);
}

RVec HalfLineBasis::values_at(double t) const {
  if (t < 0.0) throw std::invalid_argument("values_at: t must be >= 0");
  RVec out(n_);
  std::vector<double> buf(n_ + 1);
  scaled_laguerre(n_, 2.0 * alpha_ * t, buf.data());
  const double root = std::sqrt(2.0 * alpha_);
  for (int k = 0; k < n_; ++k) out[k] = root * buf[k];
  return out;
}

RMat HalfLineBasis::gram() const {
  return node_values_.transpose() * weights_.asDiagonal() * node_values_;
}

BasisPtr make_basis(int n_modes, double scale, int quad_size) {
  return std::make_shared<const HalfLineBasis>(n_modes, scale, quad_size);
}

HalfLineFunction::HalfLineFunction(BasisPtr b, CMat c)
    : basis(std::move(b)), coeffs(std::move(c)) {
  if (!basis) throw std::invalid_argument("HalfLineFunction: null basis");
  if (coeffs.rows() != basis->modes())
    throw std::invalid_argument("HalfLineFunction: coefficient rows != modes");
  if (!coeffs.allFinite())
    throw std::invalid_argument("HalfLineFunction: non-finite coefficients");
}

CMat HalfLineFunction::node_values() const {
  return basis->node_values() * coeffs;
}

CVec HalfLineFunction::at(double t) const {
  return coeffs.transpose() * basis->values_at(t).cast<Complex>();
}

HalfLineFunction project_samples(const BasisPtr& basis, const CMat& samples) {
  if (samples.rows() != basis->quad_size())
    throw std::invalid_argument("project_samples: sample rows != quad size");
  CMat c = basis->node_values().transpose().cast<Complex>() *
           (basis->weights().asDiagonal() * samples);
  return HalfLineFunction(basis, std::move(c));
}

HalfLineFunction project_function(const BasisPtr& basis,
                                  const std::function<CVec(double)>& f,
                                  int value_dim) {
  CMat samples(basis->quad_size(), value_dim);
  for (int q = 0; q < basis->quad_size(); ++q)
    samples.row(q) = f(basis->nodes()[q]).transpose();
  return project_samples(basis, samples);
}

HalfLineFunction dilation(const HalfLineFunction& u, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("dilation: lambda > 0");
  if (lambda == 1.0) return u;
  const auto& b = *u.basis;
  const double root = std::sqrt(lambda);
  CMat samples(b.quad_size(), u.value_dim());
  for (int q = 0; q < b.quad_size(); ++q) {
    const RVec phi = b.values_at(lambda * b.nodes()[q]);
    samples.row(q) = root * (u.coeffs.transpose() * phi.cast<Complex>());
  }
  return project_samples(u.basis, samples);
}

CMat dilation_matrix(const HalfLineBasis& basis, double lambda) {
  const int n = basis.modes();
  const int q = basis.quad_size();
  RMat scaled(q, n);
  for (int p = 0; p < q; ++p)
    scaled.row(p) = basis.values_at(lambda * basis.nodes()[p]).transpose();
  RMat m = basis.node_values().transpose() * basis.weights().asDiagonal() *
           scaled * std::sqrt(lambda);
  return m.cast<Complex>();
}

HalfLineFunction theta(const HalfLineFunction& u, int ell) {
  if (ell < 1) throw std::invalid_argument("theta: ell >= 1");
  const auto& b = *u.basis;
  const RMat tdt = b.t_matrix() * b.derivative_matrix();
  CMat c = u.coeffs;
  for (int k = 0; k < ell; ++k) {
    c = tdt.cast<Complex>() * c + (0.5 - k) * c;
  }
  return HalfLineFunction(u.basis, std::move(c));
}

CVec gamma_trace(const HalfLineFunction& u, int j) {
  if (j < 0) throw std::invalid_argument("gamma_trace: j >= 0");
  const auto& b = *u.basis;
  CMat c = u.coeffs;
  for (int k = 0; k < j; ++k) c = b.derivative_matrix().cast<Complex>() * c;
  return c.transpose() * b.endpoint_row().cast<Complex>();
}

HalfLineFunction derivative_plus(const HalfLineFunction& u) {
  return HalfLineFunction(u.basis,
                          u.basis->derivative_matrix().cast<Complex>() * u.coeffs);
}

HalfLineFunction multiply_xn(const HalfLineFunction& u, int j) {
  if (j < 0) throw std::invalid_argument("multiply_xn: j >= 0");
  CMat c = u.coeffs;
  for (int k = 0; k < j; ++k) c = u.basis->t_matrix().cast<Complex>() * c;
  return HalfLineFunction(u.basis, std::move(c));
}

ExpModeResult exp_mode(const BasisPtr& basis, Complex sigma, const CVec& z) {
  if (sigma.real() <= 0.0)
    throw std::domain_error("exp_mode: Re sigma must be > 0 (decaying mode)");
  CMat samples(basis->quad_size(), z.size());
  for (int q = 0; q < basis->quad_size(); ++q)
    samples.row(q) = std::exp(-sigma * basis->nodes()[q]) * z.transpose();
  HalfLineFunction mode = project_samples(basis, samples);
  const double exact_sq = z.squaredNorm() / (2.0 * sigma.real());
  const double got_sq = mode.coeffs.squaredNorm();
  const double err =
      std::sqrt(std::max(0.0, exact_sq - got_sq) / exact_sq);
  return {std::move(mode), err};
}

CMat HalfLineOperator::interior() const {
  return matrix.topLeftCorner(basis->modes() * weight.L1,
                              basis->modes() * weight.L0);
}
CMat HalfLineOperator::poisson() const {
  return matrix.topRightCorner(basis->modes() * weight.L1, weight.M0);
}
CMat HalfLineOperator::trace() const {
  return matrix.bottomLeftCorner(weight.M1, basis->modes() * weight.L0);
}
CMat HalfLineOperator::boundary() const {
  return matrix.bottomRightCorner(weight.M1, weight.M0);
}

HalfLineOperator make_operator(BasisPtr basis, WeightDatum w, CMat m) {
  HalfLineOperator op{std::move(basis), w, std::move(m)};
  if (op.matrix.rows() != op.out_dim() || op.matrix.cols() != op.in_dim())
    throw std::invalid_argument("make_operator: matrix shape vs weight datum");
  return op;
}

}  // namespace bdcalc
