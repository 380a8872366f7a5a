#include <doctest.h>

#include <random>

#include "bdcalc/toeplitz.hpp"

using namespace bdcalc;

TEST_CASE("gap operator") {
  SUBCASE("identity triple") {
    const CMat id = CMat::Identity(4, 4);
    ProjectionTriple t(id, id, id);
    CHECK((gap_operator(t) - id).norm() < 1e-14);
    CHECK(gap_invertible(t));
  }
  SUBCASE("zero triple: a0 = I") {
    const CMat z = CMat::Zero(4, 4);
    ProjectionTriple t(z, z, z);
    CHECK((gap_operator(t) - CMat::Identity(4, 4)).norm() < 1e-14);
    CHECK(gap_invertible(t));
  }
  SUBCASE("random bijective triple, dim 12 rank 5") {
    std::mt19937_64 rng(42);
    auto t = random_triple(12, 5, rng);
    const CMat a0 = gap_operator(t);
    CHECK(gap_invertible(t));
    Eigen::FullPivLU<CMat> lu(a0);
    CHECK((a0 * lu.inverse() - CMat::Identity(12, 12)).norm() < 1e-9);
  }
}

TEST_CASE("left parametrix") {
  SUBCASE("identity case") {
    const CMat id = CMat::Identity(3, 3);
    ProjectionTriple t(id, id, id);
    CHECK((left_parametrix(t) - id).norm() < 1e-14);
  }
  SUBCASE("rank one case") {
    CMat e = CMat::Zero(3, 3);
    e(0, 0) = 1.0;
    ProjectionTriple t(e, e, e);
    CHECK((left_parametrix(t) - e).norm() < 1e-13);
  }
  SUBCASE("residual on random instances") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      auto t = random_triple(10 + trial % 8, 3 + trial % 5, rng);
      const CMat bl = left_parametrix(t);
      CHECK((bl * t.a - t.pi0).norm() < 1e-9);
    }
  }
  SUBCASE("singular gap is a non-elliptic error") {
    std::mt19937_64 rng(11);
    auto t = random_triple(9, 4, rng, /*defect=*/1);
    CHECK_FALSE(gap_invertible(t));
    CHECK_THROWS_AS(left_parametrix(t), NonEllipticError);
  }
}

TEST_CASE("two-sided inverse on the ranges") {
  SUBCASE("identity case") {
    const CMat id = CMat::Identity(5, 5);
    ProjectionTriple t(id, id, id);
    CHECK((toeplitz_invert(t) - id).norm() < 1e-12);
  }
  SUBCASE("residuals over 500 random instances up to dim 20") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dims(4, 20);
    for (int trial = 0; trial < 500; ++trial) {
      const int dim = dims(rng);
      std::uniform_int_distribution<int> ranks(1, dim - 1);
      const int rank = ranks(rng);
      auto t = random_triple(dim, rank, rng);
      const CMat b = toeplitz_invert(t);
      CHECK((t.a * b - t.pi1).norm() < 1e-9);
      CHECK((b * t.a - t.pi0).norm() < 1e-9);
    }
  }
  SUBCASE("adjoint descent") {
    std::mt19937_64 rng(31);
    auto t = random_triple(14, 6, rng);
    const CMat b = toeplitz_invert(t);
    CHECK((t.a.adjoint() * b.adjoint() - t.pi0.adjoint()).norm() < 1e-9);
    CHECK((b.adjoint() * t.a.adjoint() - t.pi1.adjoint()).norm() < 1e-9);
  }
  SUBCASE("rank-deficient restrictions are reported with rank data") {
    std::mt19937_64 rng(13);
    auto t = random_triple(12, 5, rng, /*defect=*/2);
    try {
      toeplitz_invert(t);
      CHECK(false);
    } catch (const RankDeficiencyError& e) {
      CHECK(e.numerical_rank == 3);
      CHECK(e.expected_rank == 5);
    }
  }
}

TEST_CASE("left and right parametrices agree") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto t = random_triple(12, 4 + trial % 6, rng);
    const CMat bl = left_parametrix(t);
    const CMat br = right_parametrix(t);
    CHECK((bl - br).norm() < 1e-8 * std::max(1.0, bl.norm()));
  }
}

TEST_CASE("invertibility is similarity invariant") {
  // a -> V a U with U, V invertible and commuting with pi0, pi1
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = random_triple(10, 4, rng, trial % 2);  // alternate pass/fail
    // commuting invertibles: polynomials in the projections
    const CMat id = CMat::Identity(10, 10);
    const CMat u = id + 0.37 * t.pi0;
    const CMat v = id - 0.21 * t.pi1;
    ProjectionTriple ts(t.pi0, t.pi1, v * t.a * u);
    CHECK(gap_invertible(t) == gap_invertible(ts));
  }
}

TEST_CASE("triple validation") {
  const CMat id = CMat::Identity(4, 4);
  CHECK_THROWS_AS(ProjectionTriple(0.5 * id, id, id), std::invalid_argument);
  CMat a = CMat::Zero(4, 4);
  a(0, 1) = 1.0;
  CMat pi = CMat::Zero(4, 4);
  pi(0, 0) = 1.0;
  // a (1 - pi0) != 0 with pi0 = pi
  CHECK_THROWS_AS(ProjectionTriple(pi, pi, a), std::invalid_argument);
}
