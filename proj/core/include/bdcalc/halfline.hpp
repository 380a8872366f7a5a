#pragma once

#include <memory>
#include <vector>

#include "bdcalc/types.hpp"

namespace bdcalc {

// Orthonormal Laguerre basis on L^2(R_+):
//   phi_k(t) = sqrt(2 alpha) L_k(2 alpha t) exp(-alpha t),  k = 0..N-1,
// together with a Gauss-Laguerre quadrature rule of size >= 2N folded to
// integrate smooth decaying functions against dt on (0, inf).
class HalfLineBasis {
 public:
  HalfLineBasis(int n_modes, double scale = 1.0, int quad_size = -1);

  int modes() const { return n_; }
  double scale() const { return alpha_; }
  int quad_size() const { return static_cast<int>(nodes_.size()); }

  const RVec& nodes() const { return nodes_; }
  const RVec& weights() const { return weights_; }

  // phi_k(t_q): quad_size x modes
  const RMat& node_values() const { return node_values_; }

  // Basis values phi_0..phi_{N-1} at an arbitrary point t >= 0.
  RVec values_at(double t) const;

  // Exact matrices of d/dt and multiplication by t on the basis span.
  const RMat& derivative_matrix() const { return deriv_; }
  const RMat& t_matrix() const { return tmat_; }

  // Row functional of endpoint evaluation u -> u(0).
  const RVec& endpoint_row() const { return endpoint_; }

  // Gram matrix under the stored quadrature (identity up to fp).
  RMat gram() const;

 private:
  int n_;
  double alpha_;
  RVec nodes_, weights_;
  RMat node_values_;
  RMat deriv_, tmat_;
  RVec endpoint_;
};

using BasisPtr = std::shared_ptr<const HalfLineBasis>;

BasisPtr make_basis(int n_modes, double scale = 1.0, int quad_size = -1);

// C^L-valued function on R_+ held as Laguerre coefficients (modes x L).
struct HalfLineFunction {
  BasisPtr basis;
  CMat coeffs;  // N x L

  HalfLineFunction() = default;
  HalfLineFunction(BasisPtr b, CMat c);

  int value_dim() const { return static_cast<int>(coeffs.cols()); }
  double norm() const { return coeffs.norm(); }  // L^2 by orthonormality

  // Values at the quadrature nodes (quad_size x L).
  CMat node_values() const;
  // Value at an arbitrary t >= 0.
  CVec at(double t) const;
};

// Projection of samples given at the quadrature nodes.
HalfLineFunction project_samples(const BasisPtr& basis, const CMat& samples);
// Projection of a callable t -> C^L row.
HalfLineFunction project_function(
    const BasisPtr& basis, const std::function<CVec(double)>& f, int value_dim = 1);

// (kappa_l u)(t) = sqrt(l) u(l t); unitary on L^2 up to projection error.
HalfLineFunction dilation(const HalfLineFunction& u, double lambda);

// Theta_l = prod_{k=0}^{l-1} (t d/dt + 1/2 - k), applied spectrally.
HalfLineFunction theta(const HalfLineFunction& u, int ell);

// j-th derivative at 0 (gamma_j u = gamma_0 (d/dt)^j u).
CVec gamma_trace(const HalfLineFunction& u, int j);

// d/dt u and t^j u, projected onto the basis.
HalfLineFunction derivative_plus(const HalfLineFunction& u);
HalfLineFunction multiply_xn(const HalfLineFunction& u, int j = 1);

struct ExpModeResult {
  HalfLineFunction mode;
  double projection_error;  // relative L^2
};

// Basis projection of t -> exp(-sigma t) z for Re sigma > 0.
ExpModeResult exp_mode(const BasisPtr& basis, Complex sigma, const CVec& z);

// Discretized block operator with weight datum annotation; matrix shape
// (N*L1 + M1) x (N*L0 + M0), interior blocks first.
struct HalfLineOperator {
  BasisPtr basis;
  WeightDatum weight;
  CMat matrix;

  int in_dim() const { return basis->modes() * weight.L0 + weight.M0; }
  int out_dim() const { return basis->modes() * weight.L1 + weight.M1; }

  // Block views {interior, poisson, trace, boundary}.
  CMat interior() const;
  CMat poisson() const;
  CMat trace() const;
  CMat boundary() const;
};

HalfLineOperator make_operator(BasisPtr basis, WeightDatum w, CMat m);

// Matrix of kappa_lambda in the basis (resample-and-project).
CMat dilation_matrix(const HalfLineBasis& basis, double lambda);

}  // namespace bdcalc
