#pragma once

#include <random>
#include <stdexcept>

#include "bdcalc/types.hpp"

namespace bdcalc {

// Finite-dimensional Toeplitz-type triple: idempotents pi0, pi1 (not
// necessarily orthogonal) and a with a(1 - pi0) = (1 - pi1) a = 0.
struct ProjectionTriple {
  CMat pi0, pi1, a;

  ProjectionTriple(CMat pi0_, CMat pi1_, CMat a_, double tol = 1e-10);
};

struct NonEllipticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficiencyError : std::runtime_error {
  int numerical_rank = 0;
  int expected_rank = 0;
  RankDeficiencyError(const std::string& what, int got, int want)
      : std::runtime_error(what), numerical_rank(got), expected_rank(want) {}
};

// a0 = a* a + (1 - pi0)* (1 - pi0); invertible iff a restricts bijectively
// to im pi0 -> im pi1.
CMat gap_operator(const ProjectionTriple& t);

bool gap_invertible(const ProjectionTriple& t, double rank_tol = 1e-8);

// b_L = pi0 a0^{-1} a* pi1, satisfying b_L a = pi0.
CMat left_parametrix(const ProjectionTriple& t);

// Right parametrix via the adjoint construction; agrees with b_L.
CMat right_parametrix(const ProjectionTriple& t);

// b with a b = pi1 and b a = pi0, built from the inverse of the restriction
// between ranges (rank-revealing bases for im pi0, im pi1).
CMat toeplitz_invert(const ProjectionTriple& t, double rank_tol = 1e-8);

// Random idempotent P = X (Y X)^{-1} Y of the given rank.
CMat random_idempotent(int dim, int rank, std::mt19937_64& rng);

// Random triple with a bijective (or rank-deficient) restriction.
ProjectionTriple random_triple(int dim, int rank, std::mt19937_64& rng,
                               int defect = 0);

}  // namespace bdcalc
