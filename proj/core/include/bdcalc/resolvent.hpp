#pragma once

#include <vector>

#include "bdcalc/green.hpp"
#include "bdcalc/model.hpp"

namespace bdcalc {

// Symmetric boundary-frequency grid: uniform core plus a geometrically
// stretched tail out to the cutoff, with trapezoid weights for d(xi).
struct FrequencyGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double cutoff = 0.0;
  double core_spacing = 0.0;

  static FrequencyGrid make(double scale, double core_halfwidth = 40.0,
                            double h0 = 0.01, double stretch = 1.05,
                            double cutoff_factor = 1e8);
};

struct GridTailError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Whole-space resolvent kernel r(t,s) = -e^{-sigma|t-s|} / (2 sigma),
// matrix case through the spectral decomposition of q.
struct FreeKernel {
  CMat U;      // eigenvectors of q
  CVec sigma;  // channel roots
  CMat at(double t, double s) const;
};

FreeKernel free_resolvent_kernel(const LaplaceTypeModel& model, const RVec& xi,
                                 double mu);

// Separable correction kernel e^{-sigma t} C e^{-sigma s} cancelling the bc
// rows of the full kernel; returned as an exponential-polynomial green kernel.
SymbolKernel green_correction_kernel(const LaplaceTypeModel& model,
                                     const ProjectionBC& bc, const RVec& xi,
                                     double mu);

// Per-frequency record of the decomposition (e^{i theta} mu^d - A_T)^{-1}
// = B_+(mu) + G(mu).
struct FrequencyRecord {
  double xi = 0.0;        // scalar boundary frequency (n = 2)
  double weight = 0.0;    // quadrature weight
  CVec sigma;             // channel roots
  Complex trace_plus;     // Tr+ of the correction kernel at this frequency
};

struct ResolventDecomposition {
  double mu = 0.0;
  double theta = 0.0;
  BcKind bc = BcKind::dirichlet;
  std::vector<FrequencyRecord> records;
  double grid_cutoff = 0.0;
  double tail_estimate = 0.0;
};

ResolventDecomposition decompose_resolvent(const LaplaceTypeModel& model,
                                           const ProjectionBC& bc, double mu,
                                           const FrequencyGrid& grid);

// One boundary-Fourier mode of a half-space function.
struct FrequencyFunction {
  double xi = 0.0;
  HalfLineFunction values;
};

// Apply the resolvent frequency by frequency (n = 2 models): each mode is the
// solution of the boundary-symbol problem with zero boundary data.
std::vector<FrequencyFunction> resolvent_apply(
    const LaplaceTypeModel& model, const ProjectionBC& bc,
    const std::vector<FrequencyFunction>& fhat, double mu);

// u(x', t) from frequency data on a grid (inverse transform with d(xi)/2pi).
Complex synthesize(const std::vector<FrequencyFunction>& modes,
                   const FrequencyGrid& grid, double x, double t);

struct NormScanRow {
  double mu = 0.0;
  double scaled_norm = 0.0;  // mu^d * ||R(mu)||
  bool converged = true;
};

struct NormScanOptions {
  int modes = 96;
  int power_iterations = 800;
  double tol = 1e-7;
  std::vector<double> xi_factors = {0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
};

// mu^d ||R(mu)|| estimates: per-frequency operator norms by power iteration
// on the untwisted discretized kernel (unitary conjugation by kappa preserves
// the norm, so a unit-scale basis resolves every frequency).
std::vector<NormScanRow> resolvent_norm_scan(const LaplaceTypeModel& model,
                                             const ProjectionBC& bc,
                                             const std::vector<double>& mu_list,
                                             const NormScanOptions& opts = {});

struct TraceDensityResult {
  Complex value;
  double tail_estimate = 0.0;
  double cutoff = 0.0;
};

// Trace density int Tr+ g(xi', mu) d(xi') of the singular Green correction;
// n = 1 evaluates the single frequency, n = 2 integrates over the grid.
TraceDensityResult trace_density(const LaplaceTypeModel& model,
                                 const ProjectionBC& bc, double mu,
                                 double tail_tolerance = 1e-8,
                                 double cutoff_factor = 1e8);

}  // namespace bdcalc
