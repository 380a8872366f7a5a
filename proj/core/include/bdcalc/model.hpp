#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bdcalc/halfline.hpp"
#include "bdcalc/types.hpp"

namespace bdcalc {

// Laplace-type model operator on the half-space: interior symbol
// xi_n^2 + q(xi') with q(xi') Hermitian positive definite (default |xi'|^2 I),
// resolvent parameter e^{i theta} mu^2 along the ray angle theta in (0, 2pi).
struct LaplaceTypeModel {
  int n = 2;       // space dimension (boundary dimension n-1)
  int L = 1;       // fiber dimension
  double theta = M_PI;
  int order = 2;   // d; fixed 2 for the model problem
  std::function<CMat(const RVec& xi)> q;       // default |xi'|^2 I_L
  CMat leading_normal_coeff;                    // a_{0,d}, default I_L

  static LaplaceTypeModel standard(int n, int L = 1, double theta = M_PI);
  CMat q_at(const RVec& xi) const;
};

enum class BcKind { dirichlet, neumann, robin, projection, general };

// Boundary condition T = Pi S.  For the order-2 model the data are the
// idempotent pi^(0)(xi') and the first order symbol b^(1)(xi'); Dirichlet,
// Neumann and Robin are the obvious specializations.  The `general` kind
// carries lower-triangular families Pi_{jk}, S_{jk} of orders j-k.
struct ProjectionBC {
  BcKind kind = BcKind::dirichlet;
  std::function<CMat(const RVec& xi)> pi;  // idempotent, homogeneous degree 0
  std::function<CMat(const RVec& xi)> b;   // first-order symbol
  // general-d data: entries [j][k], k <= j, callables of xi'; m_j row sizes.
  std::vector<std::vector<std::function<CMat(const RVec&)>>> Pi_lower;
  std::vector<std::vector<std::function<CMat(const RVec&)>>> S_lower;
  std::vector<int> m;

  static ProjectionBC dirichlet();
  static ProjectionBC neumann();
  static ProjectionBC robin(std::function<CMat(const RVec&)> b);
  static ProjectionBC projection(std::function<CMat(const RVec&)> pi,
                                 std::function<CMat(const RVec&)> b = nullptr);

  CMat pi_at(const RVec& xi, int L) const;
  CMat b_at(const RVec& xi, int L) const;
};

struct ConditionResult {
  std::string name;
  bool pass = false;
  double min_sv = 0.0;
  RVec witness_xi;
  double witness_mu = 0.0;
  double witness_xin = 0.0;  // E1 only
  double threshold = 1e-6;
};

struct EllipticityReport {
  std::vector<ConditionResult> conditions;
  bool overall() const {
    for (const auto& c : conditions)
      if (!c.pass) return false;
    return !conditions.empty();
  }
};

struct EllipticityGrids {
  int e1_sphere = 40;      // product grid resolution on the (xi,mu)-sphere
  int pi2_arc = 60;        // points on the punctured quarter circle
  int pi2_directions = 16; // xi'-directions
  int pi3_directions = 16;
  int modes = 64;          // Laguerre modes for operator-level checks
  double threshold = 1e-6;
};

// Principal-branch square root of q(xi') - e^{i theta} mu^2 (spectral
// calculus in the matrix case); Re sigma > 0 for theta in (0, 2pi).
CMat sigma_root(const LaplaceTypeModel& model, const RVec& xi, double mu);
Complex sigma_root_scalar(const LaplaceTypeModel& model, const RVec& xi,
                          double mu);

// Rows of the boundary condition applied to the decaying mode e^{-sigma t} z,
// merged into one L x L matrix for the standard kinds:
//   pi + (1 - pi)(-sigma + b).
// Its invertibility is equivalent to the bijectivity of the stacked map.
CMat reduced_bc_matrix(const LaplaceTypeModel& model, const ProjectionBC& bc,
                       const RVec& xi, double mu);

struct BoundarySolveResult {
  HalfLineFunction u;
  double residual;  // L^2 of (e^{i theta} mu^2 - q + d^2) u - f
};

// Solve (e^{i theta} mu^2 - q(xi') + d_t^2) u = f with bc rows equal to data.
BoundarySolveResult boundary_symbol_solve(const LaplaceTypeModel& model,
                                          const ProjectionBC& bc,
                                          const RVec& xi, double mu,
                                          const HalfLineFunction& f,
                                          const CVec& data);

// Compression P_N R(xi',mu) P_N of the zero-data solution operator on the
// given basis, from a single factorization (columns = solves per mode).
CMat boundary_solve_compression(const LaplaceTypeModel& model,
                                const ProjectionBC& bc, const RVec& xi,
                                double mu, const BasisPtr& basis);

// (E1): the interior principal symbol e^{i theta} mu^d - q(xi') - xi_n^2 is
// invertible on the unit (xi,mu)-sphere; report carries the grid minimum of
// the smallest singular value and a locally refined witness.
ConditionResult check_E1(const LaplaceTypeModel& model,
                         const EllipticityGrids& grids = {});

// (Pi2): boundary-symbol invertibility on {|xi',mu| = 1, xi' != 0}: Re sigma,
// reduced matrix and the discretized boundary-symbol operator.
ConditionResult check_Pi2(const LaplaceTypeModel& model, const ProjectionBC& bc,
                          const EllipticityGrids& grids = {}, double s_order = 2.0);

// (Pi3): bijectivity of the limit-symbol rows on the nullspace of
// e^{i theta} - a_{0,d} D_t^d, frequency by frequency.
ConditionResult check_Pi3(const LaplaceTypeModel& model, const ProjectionBC& bc,
                          const EllipticityGrids& grids = {});

EllipticityReport assemble_report(const LaplaceTypeModel& model,
                                  const ProjectionBC& bc,
                                  const EllipticityGrids& grids = {});

// Decaying nullspace data of the limit interior operator e^{i theta} + d_t^2:
// the mode exp(-rho t), rho = e^{i (theta - pi)/2}.
Complex limit_mode_rate(double theta);

// Smallest singular values of the discretized limit operator
// e^{i theta} + D_t^2 on N modes (ascending, first `count` values), plus the
// alignment |<v_min, e^{-rho t}>| / norms of the most singular vector.
struct LimitNullspaceProbe {
  std::vector<double> smallest;
  double alignment = 0.0;
  int null_dim = 0;
};
LimitNullspaceProbe limit_nullspace_probe(const LaplaceTypeModel& model,
                                          const BasisPtr& basis, int count = 4);

}  // namespace bdcalc
