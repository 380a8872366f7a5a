#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace bdcalc {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr Complex kImagUnit{0.0, 1.0};

// Base point (x', xi', mu) of the boundary cotangent fibration; mu >= 0.
struct ParamPoint {
  RVec x;    // x'  (may be empty for translation invariant data)
  RVec xi;   // xi'
  double mu = 0.0;

  ParamPoint() = default;
  ParamPoint(RVec x_, RVec xi_, double mu_)
      : x(std::move(x_)), xi(std::move(xi_)), mu(mu_) {
    if (mu < 0.0) throw std::invalid_argument("ParamPoint: mu must be >= 0");
  }

  static ParamPoint boundary(RVec xi_, double mu_) {
    return ParamPoint(RVec(), std::move(xi_), mu_);
  }

  // Euclidean norm of the combined covariable (xi', mu).
  double radius() const { return std::sqrt(xi.squaredNorm() + mu * mu); }
};

// Fiber dimensions ((L0,M0),(L1,M1)) of a block operator.
struct WeightDatum {
  int L0 = 1, M0 = 0;
  int L1 = 1, M1 = 0;

  WeightDatum inverse() const { return {L1, M1, L0, M0}; }
  bool composable_after(const WeightDatum& first) const {
    return L0 == first.L1 && M0 == first.M1;
  }
};

}  // namespace bdcalc
