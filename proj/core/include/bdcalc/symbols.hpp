#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bdcalc/smoothed_norm.hpp"
#include "bdcalc/types.hpp"

namespace bdcalc {

// Matrix-valued function of (x', xi', mu).
using SymbolEval = std::function<CMat(const RVec& x, const RVec& xi, double mu)>;

// One twisted-homogeneous component: p(x', l*xi', l*mu) = l^degree p(x', xi', mu).
struct HomogeneousComponent {
  double degree = 0.0;
  std::optional<double> regularity;  // nu, if finite
  int rows = 1, cols = 1;
  SymbolEval eval;

  CMat operator()(const RVec& x, const RVec& xi, double mu) const {
    return eval(x, xi, mu);
  }

  // Build from values on the unit semi-sphere |(xi',mu)| = 1; homogeneity of
  // the given degree then holds by construction.
  static HomogeneousComponent from_unit_sphere(double degree,
                                               std::optional<double> regularity,
                                               int rows, int cols,
                                               SymbolEval sphere_eval);
};

// Relative homogeneity defect max over trials of
// |p(l*pt) - l^d p(pt)| / |l^d p(pt)|; trials draw pt and l in [0.5,10].
double homogeneity_defect(const HomogeneousComponent& h, int dim_xi,
                          int n_trials = 100, unsigned seed = 7u);

// Finite ladder of homogeneous components of degrees d, d-1, ...
struct PolyHomSymbol {
  double order = 0.0;
  double regularity = 0.0;
  std::vector<HomogeneousComponent> components;
  double excision_radius = 1.0;

  PolyHomSymbol() = default;
  PolyHomSymbol(double order_, double regularity_,
                std::vector<HomogeneousComponent> comps,
                double excision_radius_ = 1.0);
};

// Sum_{j<n_terms} chi(|xi',mu|) p^{(d-j)}(pt); chi vanishes inside the
// excision radius and equals 1 outside twice the radius.
CMat eval_polyhom(const PolyHomSymbol& p, const ParamPoint& pt, int n_terms);

// Limit-symbol coefficients p^inf_{[d,nu+j]}(x',xi'), j = 0,1,...
struct LimitExpansion {
  double anchor_order = 0.0;       // d
  double anchor_regularity = 0.0;  // nu
  std::vector<SymbolEval> coefficients;
};

// Estimated |xi'|-growth exponent of a boundary symbol on dyadic samples;
// used to check that limit-expansion coefficient j has order nu + j.
double growth_order_estimate(const SymbolEval& p, const RVec& x,
                             const RVec& direction, double r0 = 1.0,
                             int n_doublings = 10);

struct LadderReport {
  bool converged = false;
  std::vector<double> differences;  // successive ladder differences
  std::string note;
};

struct LimitSymbolResult {
  CMat value;
  LadderReport report;
};

// Numerical principal limit-symbol: Richardson-style estimate of
// lim_{mu->inf} [xi',mu]^(nu-d) p(x',xi',mu) along the given mu ladder.
// Convergence is declared when successive differences decay by >= decay_factor.
LimitSymbolResult principal_limit_symbol(const SymbolEval& p, double order,
                                         double regularity, const RVec& x,
                                         const RVec& xi,
                                         const std::vector<double>& mu_ladder,
                                         double decay_factor = 1.5);

// Default geometric ladder mu_k = 10 * 2^k, k = 0..10.
std::vector<double> default_mu_ladder();

struct AngularSymbolResult {
  CMat value;
  LadderReport report;
};

// Numerical principal angular symbol
//   |xi'|^nu lim_{r->0+} r^-nu h(x', r xi'/|xi'|, sqrt(1-r^2)).
// Divergence along the ladder signals an overstated regularity number.
AngularSymbolResult principal_angular_symbol(const HomogeneousComponent& h,
                                             const RVec& x, const RVec& xi,
                                             const std::vector<double>& r_ladder);

std::vector<double> default_r_ladder();

// ---------------------------------------------------------------------------
// Interior symbols in all n variables (xi', xi_n) and the transmission check.

using InteriorEval =
    std::function<CMat(const RVec& x, double xn, const RVec& xi, double xin,
                       double mu)>;

struct InteriorComponent {
  double degree = 0.0;
  InteriorEval eval;
};

struct InteriorSymbol {
  double order = 0.0;  // d (integer for the transmission condition)
  std::vector<InteriorComponent> components;  // degrees d, d-1, ...
};

struct TransmissionDepth {
  int max_xn = 1;      // k
  int max_xi = 1;      // |alpha'|
  int max_mu = 1;      // j
  int max_level = -1;  // l; -1 means all stored components
};

struct TransmissionViolation {
  int level = 0;  // l
  int k = 0, j = 0;
  std::vector<int> alpha;
  Complex at_plus, at_minus;
  double defect = 0.0;
};

struct TransmissionReport {
  bool pass = true;
  double worst_defect = 0.0;
  std::vector<TransmissionViolation> violations;
  int checks = 0;
};

// Verifies the parity relations
//   D^k_xn D^a_xi' D^j_mu a^(d-l)(x',0,xi',+1,mu)|_{(xi',mu)=0}
//     = (-1)^(d-l-|a|-j) * (same at xi_n = -1)
// by finite differences for all index tuples within the given depth.
TransmissionReport check_transmission(const InteriorSymbol& a, int dim_xi,
                                      const TransmissionDepth& depth = {},
                                      const RVec& x = RVec(),
                                      double fd_step = 1e-5,
                                      double rel_tol = 1e-4);

}  // namespace bdcalc
