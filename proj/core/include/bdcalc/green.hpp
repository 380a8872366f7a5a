#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "bdcalc/halfline.hpp"
#include "bdcalc/smoothed_norm.hpp"
#include "bdcalc/types.hpp"

namespace bdcalc {

enum class KernelKind { green, poisson, trace };

// One separable exponential-polynomial term  coeff * t^tpow e^{-trate t}
// * s^spow e^{-srate s}.  Poisson terms carry no s part, trace terms no t part.
struct ExpTerm {
  CMat coeff;
  int tpow = 0;
  int spow = 0;
  Complex trate{0.0, 0.0};
  Complex srate{0.0, 0.0};
};

// Symbol-kernel value at a fixed (x', xi', mu), stored as a finite sum of
// separable exponential-polynomial terms; closed under twisting, composition,
// adjoints and the normal-diagonal trace.
struct SymbolKernel {
  KernelKind kind = KernelKind::green;
  double order = 0.0;
  double regularity = 0.0;
  bool twisted = false;
  std::vector<ExpTerm> terms;

  int rows() const;
  int cols() const;

  // Pointwise value; s ignored for poisson, t ignored for trace.
  CMat at(double t, double s = 0.0) const;

  static SymbolKernel scalar_green(Complex coeff, Complex trate, Complex srate,
                                   int tpow = 0, int spow = 0);
  static SymbolKernel scalar_poisson(Complex coeff, Complex trate, int tpow = 0);
  static SymbolKernel scalar_trace(Complex coeff, Complex srate, int spow = 0);
};

// Max over sampled t (and s) of t^m |k(t,s)| for m <= max_power; finite for
// genuinely rapidly decreasing kernels.
double decay_defect(const SymbolKernel& k, int max_power = 8);

// Twisting between the untwisted kernel k' and the kernel k:
//   green:   g(t,s) = [xi',mu]   g'([xi',mu] t, [xi',mu] s)
//   poisson: k(t)   = [xi',mu]^{1/2} k'([xi',mu] t)
//   trace:   t(s)   = [xi',mu]^{1/2} t'([xi',mu] s)
// The boundary block q is untouched by either map.
SymbolKernel twist(const SymbolKernel& kernel, const ParamPoint& pt);
SymbolKernel untwist(const SymbolKernel& kernel, const ParamPoint& pt);

// 2x2 block {g, k, t, q} at a fixed parameter point, with type-r normal
// derivatives on the singular Green part: g = sum_j g_j (d/dt)^j.
struct GreenBlock {
  WeightDatum weight;
  int type = 0;
  double order = 0.0;
  double regularity = 0.0;
  std::vector<SymbolKernel> g;  // g_0 .. g_type (kind green); may be empty
  std::optional<SymbolKernel> k;
  std::optional<SymbolKernel> t;
  CMat q;  // M1 x M0, may be empty

  void validate() const;
};

// (u, c) -> (sum_j G_j u^(j) + K c, T u + q c); quadrature on u's basis.
std::pair<HalfLineFunction, CVec> apply_block(const GreenBlock& b,
                                              const HalfLineFunction& u,
                                              const CVec& c);

// Full discretization of a block on a basis.
HalfLineOperator discretize_block(const GreenBlock& b, const BasisPtr& basis);

// Closed-form block composition / adjoint on exponential-polynomial kernels.
// Weights must be composable; the adjoint requires type 0.
GreenBlock compose_blocks(const GreenBlock& b1, const GreenBlock& b0);
GreenBlock adjoint_block(const GreenBlock& b);

// (Tr+ g)(x',xi',mu) = int_0^inf tr g(t,t) dt, closed form.
Complex tr_plus(const SymbolKernel& g);

// Quadrature route for an arbitrary kernel callable; throws when the
// tail estimate reveals non-decay.
Complex tr_plus_quadrature(const std::function<CMat(double, double)>& g,
                           const BasisPtr& basis);

// Sampled grid export, one line "t,s,re,im" per point (s omitted from the
// sampling for poisson/trace kernels but kept in the schema).
void write_kernel_csv(std::ostream& out, const SymbolKernel& k,
                      const std::vector<double>& grid);

// ---------------------------------------------------------------------------
// Truncated pseudodifferential action op^+ and the order reductions.

struct OpPlusOptions {
  double window = -1.0;  // default 40 / alpha
  int grid = 4096;       // uniform points on [0, window); power of two
  double lowpass = 0.85; // fraction of Nyquist kept before roll-off
  double alias_tol = 0.01;  // admissible input energy near Nyquist
};

struct AliasingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// r^+ op(a) e^+ f for a scalar Fourier multiplier a(xi_n): zero-extend f,
// apply the multiplier on a uniform grid via FFT, restrict to t >= 0 and
// re-project onto the Laguerre basis.
HalfLineFunction op_plus(const std::function<Complex(double)>& multiplier,
                         const HalfLineFunction& f,
                         const OpPlusOptions& opts = {});

// Order-reduction symbol lambda_-^d(xi,mu) =
//   ([xi',mu] psi(xi_n / (c [xi',mu])) - i xi_n)^d
// with psi the inverse Fourier transform of a normalized smooth bump
// on [1,2] (so hat(psi) vanishes on tau <= 0) and c = 2.1 sup|psi'|.
Complex order_reduction_symbol(int d, double xi_n, const ParamPoint& pt);

// r^+ op(lambda_-^d) e^+ f.  Negative orders go through the Fourier grid
// directly; for d > 0 the binomial split sends the pure (-i xi_n)^j parts
// to exact normal derivatives and only the rapidly decaying psi parts to
// the grid, which keeps the boundary jump of e^+ f out of the multiplier.
HalfLineFunction op_plus_order_reduction(int d, const ParamPoint& pt,
                                         const HalfLineFunction& f,
                                         const OpPlusOptions& opts = {});

// The profile data behind the order reductions (cached after first use).
struct MinusProfile {
  static const MinusProfile& instance();
  Complex psi(double t) const;
  double sup_dpsi;  // sup |psi'|
  double c;         // 2.1 * sup |psi'|

 private:
  MinusProfile();
  std::vector<double> qnodes_, qweights_;  // Gauss-Legendre rule on [1,2]
  std::vector<double> bumpvals_;
};

}  // namespace bdcalc
