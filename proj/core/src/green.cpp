#include "bdcalc/green.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "fft.hpp"

namespace bdcalc {

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int k = 2; k <= m; ++k) f *= k;
  return f;
}

// int_0^inf u^m e^{-lambda u} du = m! / lambda^{m+1}, Re lambda > 0.
Complex moment(int m, Complex lambda) {
  if (lambda.real() <= 0.0)
    throw std::domain_error("kernel moment: non-decaying exponential rate");
  return factorial(m) / std::pow(lambda, m + 1);
}

Complex term_scalar_profile_t(const ExpTerm& tm, double t) {
  return std::pow(t, tm.tpow) * std::exp(-tm.trate * t);
}
Complex term_scalar_profile_s(const ExpTerm& tm, double s) {
  return std::pow(s, tm.spow) * std::exp(-tm.srate * s);
}

// d/dt of the t-profile of a term, as one or two terms.
void push_dt(std::vector<ExpTerm>& out, const ExpTerm& tm) {
  if (tm.tpow > 0) {
    ExpTerm lower = tm;
    lower.coeff = static_cast<double>(tm.tpow) * tm.coeff;
    lower.tpow -= 1;
    out.push_back(std::move(lower));
  }
  ExpTerm same = tm;
  same.coeff = -tm.trate * tm.coeff;
  out.push_back(std::move(same));
}

std::vector<ExpTerm> d_dt(const std::vector<ExpTerm>& terms) {
  std::vector<ExpTerm> out;
  for (const auto& tm : terms) push_dt(out, tm);
  return out;
}

// Gauss-Legendre rule on [-1,1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

}  // namespace

int SymbolKernel::rows() const {
  return terms.empty() ? 0 : static_cast<int>(terms.front().coeff.rows());
}
int SymbolKernel::cols() const {
  return terms.empty() ? 0 : static_cast<int>(terms.front().coeff.cols());
}

CMat SymbolKernel::at(double t, double s) const {
  if (terms.empty()) throw std::logic_error("SymbolKernel::at: empty kernel");
  CMat acc = CMat::Zero(rows(), cols());
  for (const auto& tm : terms) {
    Complex f(1.0, 0.0);
    switch (kind) {
      case KernelKind::green:
        f = term_scalar_profile_t(tm, t) * term_scalar_profile_s(tm, s);
        break;
      case KernelKind::poisson:
        f = term_scalar_profile_t(tm, t);
        break;
      case KernelKind::trace:
        f = term_scalar_profile_s(tm, t);  // single-variable kernel
        break;
    }
    acc += f * tm.coeff;
  }
  return acc;
}

SymbolKernel SymbolKernel::scalar_green(Complex coeff, Complex trate,
                                        Complex srate, int tpow, int spow) {
  SymbolKernel k;
  k.kind = KernelKind::green;
  k.terms.push_back({CMat::Constant(1, 1, coeff), tpow, spow, trate, srate});
  return k;
}
SymbolKernel SymbolKernel::scalar_poisson(Complex coeff, Complex trate,
                                          int tpow) {
  SymbolKernel k;
  k.kind = KernelKind::poisson;
  k.terms.push_back({CMat::Constant(1, 1, coeff), tpow, 0, trate, {0, 0}});
  return k;
}
SymbolKernel SymbolKernel::scalar_trace(Complex coeff, Complex srate,
                                        int spow) {
  SymbolKernel k;
  k.kind = KernelKind::trace;
  k.terms.push_back({CMat::Constant(1, 1, coeff), 0, spow, {0, 0}, srate});
  return k;
}

double decay_defect(const SymbolKernel& k, int max_power) {
  double worst = 0.0;
  for (double t = 0.25; t <= 64.0; t *= 2.0) {
    for (double s = 0.25; s <= 64.0; s *= 2.0) {
      const double v = k.at(t, s).norm();
      for (int m = 0; m <= max_power; ++m)
        worst = std::max(worst, std::pow(t, m) * v);
      if (k.kind != KernelKind::green) break;
    }
  }
  return worst;
}

SymbolKernel twist(const SymbolKernel& kernel, const ParamPoint& pt) {
  if (kernel.twisted)
    throw std::invalid_argument("twist: kernel already twisted");
  const double m = bracket(pt);
  SymbolKernel out = kernel;
  out.twisted = true;
  const double weight =
      kernel.kind == KernelKind::green ? m : std::sqrt(m);
  for (auto& tm : out.terms) {
    // c t^p e^{-at} -> w c (m t)^p e^{-a m t}: fold m into rate and coeff.
    double fold = weight;
    if (kernel.kind != KernelKind::trace) {
      fold *= std::pow(m, tm.tpow);
      tm.trate *= m;
    }
    if (kernel.kind != KernelKind::poisson) {
      fold *= std::pow(m, tm.spow);
      tm.srate *= m;
    }
    tm.coeff *= fold;
  }
  return out;
}

SymbolKernel untwist(const SymbolKernel& kernel, const ParamPoint& pt) {
  if (!kernel.twisted)
    throw std::invalid_argument("untwist: kernel is not twisted");
  const double m = bracket(pt);
  SymbolKernel out = kernel;
  out.twisted = false;
  const double weight =
      kernel.kind == KernelKind::green ? 1.0 / m : 1.0 / std::sqrt(m);
  for (auto& tm : out.terms) {
    double fold = weight;
    if (kernel.kind != KernelKind::trace) {
      fold /= std::pow(m, tm.tpow);
      tm.trate /= m;
    }
    if (kernel.kind != KernelKind::poisson) {
      fold /= std::pow(m, tm.spow);
      tm.srate /= m;
    }
    tm.coeff *= fold;
  }
  return out;
}

void GreenBlock::validate() const {
  if (type < 0) throw std::invalid_argument("GreenBlock: type >= 0");
  if (!g.empty() && static_cast<int>(g.size()) != type + 1)
    throw std::invalid_argument("GreenBlock: need g_0..g_type");
  for (const auto& gj : g)
    if (gj.kind != KernelKind::green)
      throw std::invalid_argument("GreenBlock: g parts must be green kernels");
  if (k && k->kind != KernelKind::poisson)
    throw std::invalid_argument("GreenBlock: k must be a poisson kernel");
  if (t && t->kind != KernelKind::trace)
    throw std::invalid_argument("GreenBlock: t must be a trace kernel");
  if (k && (k->rows() != weight.L1 || k->cols() != weight.M0))
    throw std::invalid_argument("GreenBlock: poisson dims vs weight");
  if (t && (t->rows() != weight.M1 || t->cols() != weight.L0))
    throw std::invalid_argument("GreenBlock: trace dims vs weight");
  for (const auto& gj : g)
    if (gj.rows() != weight.L1 || gj.cols() != weight.L0)
      throw std::invalid_argument("GreenBlock: green dims vs weight");
  if (q.size() && (q.rows() != weight.M1 || q.cols() != weight.M0))
    throw std::invalid_argument("GreenBlock: q dims vs weight");
}

std::pair<HalfLineFunction, CVec> apply_block(const GreenBlock& b,
                                              const HalfLineFunction& u,
                                              const CVec& c) {
  b.validate();
  if (u.value_dim() != b.weight.L0)
    throw std::invalid_argument("apply_block: interior input dimension");
  if (c.size() != b.weight.M0)
    throw std::invalid_argument("apply_block: boundary input dimension");
  const auto& basis = u.basis;
  const int n = basis->modes();

  CMat out_coeffs = CMat::Zero(n, b.weight.L1);
  CVec out_c = CVec::Zero(b.weight.M1);

  // derivative cascade u, u', ..., u^(type)
  std::vector<CMat> du_values;
  {
    CMat coeffs = u.coeffs;
    for (int j = 0; j <= b.type; ++j) {
      du_values.push_back(basis->node_values().cast<Complex>() * coeffs);
      if (j < b.type)
        coeffs = basis->derivative_matrix().cast<Complex>() * coeffs;
    }
  }

  auto project_profile_t = [&](const ExpTerm& tm) -> CVec {
    CVec samples(basis->quad_size());
    for (int p = 0; p < basis->quad_size(); ++p)
      samples[p] = term_scalar_profile_t(tm, basis->nodes()[p]);
    return basis->node_values().transpose().cast<Complex>() *
           (basis->weights().asDiagonal() * samples);
  };
  auto integrate_profile_s = [&](const ExpTerm& tm, const CMat& vals) -> CVec {
    CVec acc = CVec::Zero(vals.cols());
    for (int p = 0; p < basis->quad_size(); ++p)
      acc += basis->weights()[p] * term_scalar_profile_s(tm, basis->nodes()[p]) *
             vals.row(p).transpose();
    return acc;
  };

  for (std::size_t j = 0; j < b.g.size(); ++j) {
    for (const auto& tm : b.g[j].terms) {
      const CVec inner = integrate_profile_s(tm, du_values[j]);  // C^{L0}
      const CVec v = tm.coeff * inner;                           // C^{L1}
      out_coeffs += project_profile_t(tm) * v.transpose();
    }
  }
  if (b.k) {
    for (const auto& tm : b.k->terms) {
      const CVec v = tm.coeff * c;
      out_coeffs += project_profile_t(tm) * v.transpose();
    }
  }
  if (b.t) {
    for (const auto& tm : b.t->terms)
      out_c += tm.coeff * integrate_profile_s(tm, du_values[0]);
  }
  if (b.q.size()) out_c += b.q * c;

  return {HalfLineFunction(basis, std::move(out_coeffs)), std::move(out_c)};
}

HalfLineOperator discretize_block(const GreenBlock& b, const BasisPtr& basis) {
  b.validate();
  const int n = basis->modes();
  const int in_dim = n * b.weight.L0 + b.weight.M0;
  const int out_dim = n * b.weight.L1 + b.weight.M1;
  CMat m = CMat::Zero(out_dim, in_dim);

  auto profile_t_coeffs = [&](const ExpTerm& tm) -> CVec {
    CVec samples(basis->quad_size());
    for (int p = 0; p < basis->quad_size(); ++p)
      samples[p] = term_scalar_profile_t(tm, basis->nodes()[p]);
    return basis->node_values().transpose().cast<Complex>() *
           (basis->weights().asDiagonal() * samples);
  };
  auto functional_s = [&](const ExpTerm& tm) -> CVec {
    CVec f(n);
    f.setZero();
    for (int p = 0; p < basis->quad_size(); ++p)
      f += basis->weights()[p] * term_scalar_profile_s(tm, basis->nodes()[p]) *
           basis->node_values().row(p).transpose().cast<Complex>();
    return f;
  };

  auto kron = [](const CMat& a, const CMat& bm) -> CMat {
    CMat out(a.rows() * bm.rows(), a.cols() * bm.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j)
        out.block(i * bm.rows(), j * bm.cols(), bm.rows(), bm.cols()) =
            a(i, j) * bm;
    return out;
  };

  const CMat deriv = basis->derivative_matrix().cast<Complex>();
  CMat deriv_pow = CMat::Identity(n, n);
  for (std::size_t j = 0; j < b.g.size(); ++j) {
    CMat rank_part = CMat::Zero(n * b.weight.L1, n * b.weight.L0);
    for (const auto& tm : b.g[j].terms)
      rank_part += kron(tm.coeff, profile_t_coeffs(tm) * functional_s(tm).transpose());
    m.topLeftCorner(n * b.weight.L1, n * b.weight.L0) +=
        rank_part * kron(CMat::Identity(b.weight.L0, b.weight.L0), deriv_pow);
    if (j + 1 < b.g.size()) deriv_pow = deriv * deriv_pow;
  }
  if (b.k) {
    CMat block = CMat::Zero(n * b.weight.L1, b.weight.M0);
    for (const auto& tm : b.k->terms)
      block += kron(tm.coeff, profile_t_coeffs(tm));
    m.topRightCorner(n * b.weight.L1, b.weight.M0) = block;
  }
  if (b.t) {
    CMat block = CMat::Zero(b.weight.M1, n * b.weight.L0);
    for (const auto& tm : b.t->terms)
      block += kron(tm.coeff, functional_s(tm).transpose());
    m.bottomLeftCorner(b.weight.M1, n * b.weight.L0) = block;
  }
  if (b.q.size()) m.bottomRightCorner(b.weight.M1, b.weight.M0) = b.q;

  return make_operator(basis, b.weight, std::move(m));
}

namespace {

// Inner composition of an s-functional with a t-profile:
// int u^{q1+p0} e^{-(b1+a0)u} du times the matrix product of coefficients.
ExpTerm fuse(const ExpTerm& left, const ExpTerm& right, bool keep_left_t,
             bool keep_right_s) {
  const Complex mom = moment(left.spow + right.tpow, left.srate + right.trate);
  ExpTerm out;
  out.coeff = mom * (left.coeff * right.coeff);
  if (keep_left_t) {
    out.tpow = left.tpow;
    out.trate = left.trate;
  }
  if (keep_right_s) {
    out.spow = right.spow;
    out.srate = right.srate;
  }
  return out;
}

std::vector<ExpTerm> compose_terms(const std::vector<ExpTerm>& t1,
                                   const std::vector<ExpTerm>& t0,
                                   bool keep_left_t, bool keep_right_s) {
  std::vector<ExpTerm> out;
  out.reserve(t1.size() * t0.size());
  for (const auto& a : t1)
    for (const auto& b : t0) out.push_back(fuse(a, b, keep_left_t, keep_right_s));
  return out;
}

std::vector<ExpTerm> scale_terms_left(const CMat& m,
                                      const std::vector<ExpTerm>& ts) {
  std::vector<ExpTerm> out = ts;
  for (auto& tm : out) tm.coeff = m * tm.coeff;
  return out;
}
std::vector<ExpTerm> scale_terms_right(const std::vector<ExpTerm>& ts,
                                       const CMat& m) {
  std::vector<ExpTerm> out = ts;
  for (auto& tm : out) tm.coeff = tm.coeff * m;
  return out;
}

// Outer product poisson(t) x trace(s) -> green term, no integral involved.
std::vector<ExpTerm> outer_terms(const std::vector<ExpTerm>& pois,
                                 const std::vector<ExpTerm>& trac) {
  std::vector<ExpTerm> out;
  for (const auto& a : pois)
    for (const auto& b : trac) {
      ExpTerm tm;
      tm.coeff = a.coeff * b.coeff;
      tm.tpow = a.tpow;
      tm.trate = a.trate;
      tm.spow = b.spow;
      tm.srate = b.srate;
      out.push_back(std::move(tm));
    }
  return out;
}

void append(std::vector<ExpTerm>& dst, std::vector<ExpTerm> src) {
  for (auto& t : src) dst.push_back(std::move(t));
}

}  // namespace

GreenBlock compose_blocks(const GreenBlock& b1, const GreenBlock& b0) {
  b1.validate();
  b0.validate();
  if (!b1.weight.composable_after(b0.weight))
    throw std::invalid_argument("compose_blocks: weights not composable");
  if (b0.type > 0 && (b1.t || b1.q.size()))
    throw std::invalid_argument(
        "compose_blocks: trace/boundary rows after a typed factor are not "
        "representable in this kernel model");

  GreenBlock out;
  out.weight = {b0.weight.L0, b0.weight.M0, b1.weight.L1, b1.weight.M1};
  out.order = b0.order + b1.order;
  out.regularity = std::min(b0.regularity, b1.regularity);
  out.type = b0.type;

  const int r0 = b0.g.empty() ? -1 : b0.type;

  // g parts of the composite, indexed by b0's derivative order j.
  std::vector<std::vector<ExpTerm>> gres(static_cast<std::size_t>(std::max(r0, 0)) + 1);
  bool have_g = false;

  for (int j = 0; j <= r0; ++j) {
    // b1's derivative factors act on the t-profile of g0_j / k0.
    std::vector<ExpTerm> g0j = b0.g[j].terms;
    for (std::size_t i = 0; i < b1.g.size(); ++i) {
      std::vector<ExpTerm> differentiated = g0j;
      for (std::size_t d = 0; d < i; ++d) differentiated = d_dt(differentiated);
      append(gres[j], compose_terms(b1.g[i].terms, differentiated, true, true));
      have_g = true;
    }
  }
  if (b1.k && b0.t) {
    append(gres[0], outer_terms(b1.k->terms, b0.t->terms));
    have_g = true;
  }
  if (have_g) {
    out.g.resize(gres.size());
    for (std::size_t j = 0; j < gres.size(); ++j) {
      out.g[j].kind = KernelKind::green;
      out.g[j].terms = std::move(gres[j]);
      if (out.g[j].terms.empty()) {
        ExpTerm zero;
        zero.coeff = CMat::Zero(out.weight.L1, out.weight.L0);
        zero.trate = Complex(1.0, 0.0);
        zero.srate = Complex(1.0, 0.0);
        out.g[j].terms.push_back(std::move(zero));
      }
    }
    out.type = static_cast<int>(out.g.size()) - 1;
  } else {
    out.type = 0;
  }

  // poisson part: g1 o k0 (with derivatives) + k1 q0
  std::vector<ExpTerm> kres;
  if (b0.k) {
    for (std::size_t i = 0; i < b1.g.size(); ++i) {
      std::vector<ExpTerm> differentiated = b0.k->terms;
      for (std::size_t d = 0; d < i; ++d) differentiated = d_dt(differentiated);
      append(kres, compose_terms(b1.g[i].terms, differentiated, true, false));
    }
  }
  if (b1.k && b0.q.size()) append(kres, scale_terms_right(b1.k->terms, b0.q));
  if (!kres.empty()) {
    SymbolKernel kk;
    kk.kind = KernelKind::poisson;
    kk.terms = std::move(kres);
    out.k = std::move(kk);
  }

  // trace part: t1 o g0 + q1 t0   (b0 of type 0 here)
  std::vector<ExpTerm> tres;
  if (b1.t && !b0.g.empty())
    append(tres, compose_terms(b1.t->terms, b0.g[0].terms, false, true));
  if (b1.q.size() && b0.t) append(tres, scale_terms_left(b1.q, b0.t->terms));
  if (!tres.empty()) {
    SymbolKernel tt;
    tt.kind = KernelKind::trace;
    tt.terms = std::move(tres);
    out.t = std::move(tt);
  }

  // boundary part: t1 o k0 + q1 q0
  CMat qres = CMat::Zero(out.weight.M1, out.weight.M0);
  bool have_q = false;
  if (b1.t && b0.k) {
    for (const auto& a : b1.t->terms)
      for (const auto& b : b0.k->terms)
        qres += moment(a.spow + b.tpow, a.srate + b.trate) * (a.coeff * b.coeff);
    have_q = true;
  }
  if (b1.q.size() && b0.q.size()) {
    qres += b1.q * b0.q;
    have_q = true;
  }
  if (have_q) out.q = std::move(qres);

  return out;
}

GreenBlock adjoint_block(const GreenBlock& b) {
  b.validate();
  if (b.type != 0)
    throw std::invalid_argument("adjoint_block: only type 0 admits an adjoint");
  GreenBlock out;
  out.weight = b.weight.inverse();
  out.order = b.order;
  out.regularity = b.regularity;
  out.type = 0;

  auto conj_swap = [](const ExpTerm& tm, bool swap_vars) {
    ExpTerm o;
    o.coeff = tm.coeff.adjoint();
    if (swap_vars) {
      o.tpow = tm.spow;
      o.trate = std::conj(tm.srate);
      o.spow = tm.tpow;
      o.srate = std::conj(tm.trate);
    } else {
      o.tpow = tm.tpow;
      o.trate = std::conj(tm.trate);
      o.spow = tm.spow;
      o.srate = std::conj(tm.srate);
    }
    return o;
  };

  if (!b.g.empty()) {
    SymbolKernel gg;
    gg.kind = KernelKind::green;
    for (const auto& tm : b.g[0].terms) gg.terms.push_back(conj_swap(tm, true));
    out.g.push_back(std::move(gg));
  }
  if (b.k) {  // poisson* = trace with kernel k(t)^H
    SymbolKernel tt;
    tt.kind = KernelKind::trace;
    for (const auto& tm : b.k->terms) {
      ExpTerm o;
      o.coeff = tm.coeff.adjoint();
      o.spow = tm.tpow;
      o.srate = std::conj(tm.trate);
      tt.terms.push_back(std::move(o));
    }
    out.t = std::move(tt);
  }
  if (b.t) {  // trace* = poisson with kernel t(s)^H
    SymbolKernel kk;
    kk.kind = KernelKind::poisson;
    for (const auto& tm : b.t->terms) {
      ExpTerm o;
      o.coeff = tm.coeff.adjoint();
      o.tpow = tm.spow;
      o.trate = std::conj(tm.srate);
      kk.terms.push_back(std::move(o));
    }
    out.k = std::move(kk);
  }
  if (b.q.size()) out.q = b.q.adjoint();
  return out;
}

Complex tr_plus(const SymbolKernel& g) {
  if (g.kind != KernelKind::green)
    throw std::invalid_argument("tr_plus: green kernels only");
  Complex acc(0.0, 0.0);
  for (const auto& tm : g.terms)
    acc += tm.coeff.trace() * moment(tm.tpow + tm.spow, tm.trate + tm.srate);
  return acc;
}

void write_kernel_csv(std::ostream& out, const SymbolKernel& k,
                      const std::vector<double>& grid) {
  char buf[128];
  out << "t,s,re,im\n";
  for (double t : grid) {
    if (k.kind == KernelKind::green) {
      for (double s : grid) {
        const Complex v = k.at(t, s)(0, 0);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", t, s,
                      v.real(), v.imag());
        out << buf;
      }
    } else {
      const Complex v = k.at(t)(0, 0);
      std::snprintf(buf, sizeof(buf), "%.17g,0,%.17g,%.17g\n", t, v.real(),
                    v.imag());
      out << buf;
    }
  }
}

Complex tr_plus_quadrature(const std::function<CMat(double, double)>& g,
                           const BasisPtr& basis) {
  Complex acc(0.0, 0.0);
  const int q = basis->quad_size();
  double last_piece = 0.0;
  for (int p = 0; p < q; ++p) {
    const double t = basis->nodes()[p];
    const Complex piece = basis->weights()[p] * g(t, t).trace();
    acc += piece;
    if (p == q - 1) last_piece = std::abs(piece);
  }
  if (last_piece > 1e-10 * std::abs(acc) + 1e-14)
    throw std::runtime_error(
        "tr_plus_quadrature: kernel does not decay on the quadrature tail");
  return acc;
}

// ---------------------------------------------------------------------------
// op^+ via FFT on [-T, T)

HalfLineFunction op_plus(const std::function<Complex(double)>& multiplier,
                         const HalfLineFunction& f, const OpPlusOptions& opts) {
  if (f.value_dim() != 1)
    throw std::invalid_argument("op_plus: scalar functions only");
  const auto& basis = *f.basis;
  const double T = opts.window > 0 ? opts.window : 40.0 / basis.scale();
  const int m = opts.grid;
  if (m <= 0 || (m & (m - 1)) != 0)
    throw std::invalid_argument("op_plus: grid must be a power of two");
  const int total = 2 * m;
  const double dt = T / m;

  // zero extension e^+ f sampled on [-T, T)
  std::vector<Complex> a(total, Complex(0.0, 0.0));
  for (int i = 0; i < total; ++i) {
    const double x = -T + i * dt;
    if (x >= 0.0) a[i] = f.at(x)(0);
  }
  detail::fft_pow2(a, false);

  // sampling-aliasing estimate on the input spectrum: energy of the signal
  // near the Nyquist edge folds back on coarser grids
  const double ny = M_PI / dt;  // Nyquist
  {
    double esum = 0.0, ehigh = 0.0;
    for (int k = 0; k < total; ++k) {
      const int ks = k < m ? k : k - total;
      const double frac = std::abs(M_PI * ks / T) / ny;
      const double e = std::norm(a[k]);
      esum += e;
      if (frac > opts.lowpass) ehigh += e;
    }
    if (esum > 0.0 && ehigh / esum > opts.alias_tol)
      throw AliasingError(
          "op_plus: input spectral energy near Nyquist (fraction " +
          std::to_string(ehigh / esum) + ") exceeds tolerance; retry with "
          "grid >= " + std::to_string(2 * opts.grid));
  }

  // multiplier with raised-cosine roll-off above the lowpass fraction
  for (int k = 0; k < total; ++k) {
    const int ks = k < m ? k : k - total;
    const double xi = M_PI * ks / T;
    Complex v = a[k] * multiplier(xi);
    const double frac = std::abs(xi) / ny;
    if (frac > opts.lowpass) {
      const double u = (frac - opts.lowpass) / (1.0 - opts.lowpass);
      const double c = std::cos(0.5 * M_PI * std::min(1.0, u));
      v *= c * c;
    }
    a[k] = v;
  }

  // evaluate the result at the Laguerre nodes below the window
  CMat samples = CMat::Zero(basis.quad_size(), 1);
  for (int p = 0; p < basis.quad_size(); ++p) {
    const double t = basis.nodes()[p];
    if (t >= T) break;  // nodes are increasing; tail treated as zero
    const Complex z = std::polar(1.0, M_PI * (t + T) / T);
    // positive frequencies k = 0..m-1, then negative k = -1..-m
    Complex acc(0.0, 0.0);
    Complex zp(1.0, 0.0);
    for (int k = 0; k < m; ++k) {
      acc += a[k] * zp;
      zp *= z;
    }
    const Complex zi = Complex(1.0, 0.0) / z;
    Complex zn = zi;
    for (int k = 1; k <= m; ++k) {
      acc += a[total - k] * zn;
      zn *= zi;
    }
    samples(p, 0) = acc / static_cast<double>(total);
  }
  return project_samples(f.basis, samples);
}

// ---------------------------------------------------------------------------
// Order reductions

MinusProfile::MinusProfile() {
  std::vector<double> x, w;
  gauss_legendre(64, x, w);
  qnodes_.resize(x.size());
  qweights_.resize(x.size());
  bumpvals_.resize(x.size());
  double bsum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    qnodes_[i] = 1.5 + 0.5 * x[i];  // map to [1,2]
    qweights_[i] = 0.5 * w[i];
    const double tau = qnodes_[i];
    bumpvals_[i] = std::exp(-1.0 / ((tau - 1.0) * (2.0 - tau)));
    bsum += qweights_[i] * bumpvals_[i];
  }
  for (auto& b : bumpvals_) b /= bsum;  // now psi(0) = 1

  // sup |psi'| by dense scan (the bump is concentrated; psi' decays fast)
  double sup = 0.0;
  for (double t = -80.0; t <= 80.0; t += 0.02) {
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < qnodes_.size(); ++i)
      acc += qweights_[i] * bumpvals_[i] * qnodes_[i] *
             std::polar(1.0, t * qnodes_[i]);
    sup = std::max(sup, std::abs(acc));
  }
  sup_dpsi = sup;
  c = 2.1 * sup;
}

const MinusProfile& MinusProfile::instance() {
  static const MinusProfile prof;
  return prof;
}

Complex MinusProfile::psi(double t) const {
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i < qnodes_.size(); ++i)
    acc += qweights_[i] * bumpvals_[i] * std::polar(1.0, t * qnodes_[i]);
  return acc;
}

Complex order_reduction_symbol(int d, double xi_n, const ParamPoint& pt) {
  if (d == 0) return Complex(1.0, 0.0);
  const auto& prof = MinusProfile::instance();
  const double m = bracket(pt);
  const Complex base =
      m * prof.psi(xi_n / (prof.c * m)) - kImagUnit * xi_n;
  if (std::abs(base) == 0.0)
    throw std::runtime_error("order_reduction_symbol: vanishing base");
  Complex out(1.0, 0.0);
  const Complex b = d > 0 ? base : Complex(1.0, 0.0) / base;
  for (int i = 0; i < std::abs(d); ++i) out *= b;
  return out;
}

HalfLineFunction op_plus_order_reduction(int d, const ParamPoint& pt,
                                         const HalfLineFunction& f,
                                         const OpPlusOptions& opts) {
  if (d == 0) return f;
  if (d < 0) {
    return op_plus(
        [d, pt](double xin) { return order_reduction_symbol(d, xin, pt); }, f,
        opts);
  }
  const auto& prof = MinusProfile::instance();
  const double m = bracket(pt);
  const double c = prof.c;

  CMat acc = CMat::Zero(f.basis->modes(), f.value_dim());
  double binom = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k == 0) {
      // (-i xi_n)^d corresponds to (-d/dt)^d on the open half-line
      HalfLineFunction der = f;
      for (int j = 0; j < d; ++j) der = derivative_plus(der);
      acc += (d % 2 == 0 ? 1.0 : -1.0) * der.coeffs;
    } else {
      const int pow_xi = d - k;
      const int kk = k;
      auto mult = [kk, pow_xi, m, c, &prof](double xin) {
        Complex p = m * prof.psi(xin / (c * m));
        Complex out(1.0, 0.0);
        for (int i = 0; i < kk; ++i) out *= p;
        for (int i = 0; i < pow_xi; ++i) out *= Complex(0.0, -xin);
        return out;
      };
      binom = binom * (d - k + 1) / k;
      acc += binom * op_plus(mult, f, opts).coeffs;
    }
  }
  return HalfLineFunction(f.basis, std::move(acc));
}

}  // namespace bdcalc
