#pragma once

#include "bdcalc/types.hpp"

namespace bdcalc {

// Transition profile of the smoothed norm: 0 for r <= 1/2, 1 for r >= 1,
// C^inf monotone in between.
double norm_blend(double r);

// Smoothed norm [y] = phi(|y|)|y| + (1 - phi(|y|)).
// Coincides with |y| for |y| >= 1, equals 1 at the origin, positive everywhere.
double smoothed_norm(const RVec& y);
double smoothed_norm(double y);

// [xi', mu] for a parameter point.
double bracket(const ParamPoint& pt);

// Radial zero-excision factor: 0 for |v| <= radius, 1 for |v| >= 2*radius,
// same transition profile as the smoothed norm.
double excision(double r, double radius);

}  // namespace bdcalc
