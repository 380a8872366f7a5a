#include "bdcalc/smoothed_norm.hpp"

#include <cmath>

namespace bdcalc {

namespace {
// e(s) = exp(-1/s) for s > 0, extended by 0; the usual flat bump ingredient.
double bump_e(double s) { return s <= 0.0 ? 0.0 : std::exp(-1.0 / s); }
}  // namespace

double norm_blend(double r) {
  if (r <= 0.5) return 0.0;
  if (r >= 1.0) return 1.0;
  const double a = bump_e(r - 0.5);
  const double b = bump_e(1.0 - r);
  return a / (a + b);
}

double smoothed_norm(double y) {
  const double r = std::abs(y);
  const double phi = norm_blend(r);
  return phi * r + (1.0 - phi);
}

double smoothed_norm(const RVec& y) {
  const double r = y.norm();
  const double phi = norm_blend(r);
  return phi * r + (1.0 - phi);
}

double bracket(const ParamPoint& pt) {
  const double r = pt.radius();
  const double phi = norm_blend(r);
  return phi * r + (1.0 - phi);
}

double excision(double r, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("excision: radius must be > 0");
  return norm_blend(r / (2.0 * radius));
}

}  // namespace bdcalc
