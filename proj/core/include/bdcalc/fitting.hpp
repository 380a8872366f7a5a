#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "bdcalc/types.hpp"

namespace bdcalc {

// One basis element mu^exponent or mu^exponent * log(mu).
struct FitBasisElement {
  double exponent = 0.0;
  bool with_log = false;
};

// Two-ladder expansion model: powers mu^{d-j+n-1} and mu^{d-nu-j}, the second
// family optionally with log companions.  Duplicate exponents are merged.
struct ExpansionModel {
  std::vector<double> ladder_a;       // exponents, strictly decreasing
  std::vector<double> ladder_b;       // exponents, strictly decreasing
  std::vector<bool> ladder_b_logs;    // log-companion flags per b exponent

  static ExpansionModel trace_density_model(double d, double nu, int n,
                                            int count_a, int count_b);
  std::vector<FitBasisElement> basis() const;
};

struct FitResult {
  std::vector<FitBasisElement> basis;
  CVec coefficients;
  double residual = 0.0;           // relative to ||samples||
  double condition_number = 0.0;   // of the column-normalized design matrix

  Complex coefficient_at(double exponent, bool with_log = false) const;
};

struct IllPosedFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear least squares on the basis {mu^p, mu^p log mu}; columns are
// normalized before solving.  Throws IllPosedFitError when the normalized
// design exceeds condition 1e12.
FitResult fit_expansion(const std::vector<double>& mu,
                        const std::vector<Complex>& values,
                        const ExpansionModel& model);

std::vector<double> default_fit_grid();  // 24 log-spaced points in [2, 128]

struct LogPresenceResult {
  bool present = false;
  double residual_gain = 0.0;  // residual(without) / residual(with)
  Complex coefficient;
};

// Nested-fit test for a mu^p log mu term: present iff the residual improves
// by >= 10x and the fitted coefficient is not negligible.
LogPresenceResult log_presence_test(const std::vector<double>& mu,
                                    const std::vector<Complex>& values,
                                    const ExpansionModel& model,
                                    double exponent);

// Interior expansion coefficient a_j(x) = int a_hom(x, xi, 1) d(xi)/(2 pi)^n
// by adaptive quadrature; requires integrability (component order < -n).
Complex interior_coefficient(
    const std::function<Complex(const RVec& xi)>& component_at_mu1, int n,
    double component_order, double abs_tol = 1e-10);

// Fitted log-log slope of |values| over the sample range (leading exponent).
double loglog_slope(const std::vector<double>& mu,
                    const std::vector<Complex>& values);

}  // namespace bdcalc
