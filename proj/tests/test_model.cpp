#include <doctest.h>

#include <random>

#include "bdcalc/model.hpp"
#include "oracles.hpp"

using namespace bdcalc;

namespace {

RVec vec1(double a) {
  RVec v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("sigma root on the model rays") {
  auto model = LaplaceTypeModel::standard(2, 1, M_PI);
  CHECK(std::abs(sigma_root_scalar(model, vec1(0.0), 1.0) - Complex(1, 0)) <
        1e-14);
  CHECK(std::abs(sigma_root_scalar(model, vec1(1.0), 0.0) - Complex(1, 0)) <
        1e-14);
  auto quarter = LaplaceTypeModel::standard(2, 1, M_PI / 2.0);
  CHECK(std::abs(sigma_root_scalar(quarter, vec1(0.0), 1.0) -
                 std::polar(1.0, -M_PI / 4.0)) < 1e-14);
}

TEST_CASE("Re sigma stays positive along admissible rays") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0.05, 2.0 * M_PI - 0.05);
  std::uniform_real_distribution<double> amp(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto model = LaplaceTypeModel::standard(2, 1, ang(rng));
    const double x = amp(rng), mu = std::abs(amp(rng));
    if (std::abs(x) + mu < 1e-6) continue;
    CHECK(sigma_root_scalar(model, vec1(x), mu).real() > 0.0);
  }
}

TEST_CASE("reduced boundary matrices") {
  auto model = LaplaceTypeModel::standard(2, 1, M_PI);
  const Complex sigma = sigma_root_scalar(model, vec1(0.6), 0.8);

  SUBCASE("Dirichlet gives the identity") {
    const CMat r = reduced_bc_matrix(model, ProjectionBC::dirichlet(),
                                     vec1(0.6), 0.8);
    CHECK((r - CMat::Identity(1, 1)).norm() < 1e-14);
  }
  SUBCASE("Neumann gives -sigma") {
    const CMat r = reduced_bc_matrix(model, ProjectionBC::neumann(), vec1(0.6),
                                     0.8);
    CHECK(std::abs(r(0, 0) + sigma) < 1e-14);
  }
  SUBCASE("split projection in two channels") {
    auto model2 = LaplaceTypeModel::standard(2, 2, M_PI);
    auto bc = ProjectionBC::projection([](const RVec&) {
      CMat p = CMat::Zero(2, 2);
      p(0, 0) = 1.0;
      return p;
    });
    const CMat r = reduced_bc_matrix(model2, bc, vec1(0.6), 0.8);
    const Complex s2 = sigma_root_scalar(model, vec1(0.6), 0.8);
    CHECK(std::abs(r(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(r(1, 1) + s2) < 1e-14);
    CHECK(std::abs(r(0, 1)) + std::abs(r(1, 0)) < 1e-14);
  }
  SUBCASE("general lower-triangular data reproduces the split condition") {
    // Pi_00 = pi, Pi_11 = 1 - pi, S_00 = S_11 = 1, S_10 = B: stacked rows
    // [pi; (1-pi)(B - sigma)] have the same kernel as the merged matrix
    auto model2 = LaplaceTypeModel::standard(2, 2, M_PI / 2.0);
    auto pi_fun = [](const RVec&) {
      CMat p(2, 2);
      p << 1.0, 0.4, 0.0, 0.0;
      return p;
    };
    auto b_fun = [](const RVec& xi_) {
      return CMat(Complex(0.3, 0.1) * xi_.norm() * CMat::Identity(2, 2));
    };
    ProjectionBC gen;
    gen.kind = BcKind::general;
    gen.m = {2, 2};
    auto one = [](const RVec&) { return CMat(CMat::Identity(2, 2)); };
    auto pi_row = [pi_fun](const RVec& xi_) { return pi_fun(xi_); };
    auto co_pi = [pi_fun](const RVec& xi_) {
      return CMat(CMat::Identity(2, 2) - pi_fun(xi_));
    };
    auto co_pi_b = [pi_fun, b_fun](const RVec& xi_) {
      return CMat((CMat::Identity(2, 2) - pi_fun(xi_)) * b_fun(xi_));
    };
    (void)one;
    gen.Pi_lower = {{pi_row}, {co_pi_b, co_pi}};
    gen.S_lower = {{one}, {nullptr, one}};
    // rows j=1: Pi_10 S_00 gamma_0 + Pi_11 S_11 gamma_1 with Pi_10 = (1-pi)B

    const CMat stacked = reduced_bc_matrix(model2, gen, vec1(0.7), 0.5);
    REQUIRE(stacked.rows() == 4);
    auto merged = ProjectionBC::projection(pi_fun, b_fun);
    const CMat square = reduced_bc_matrix(model2, merged, vec1(0.7), 0.5);
    // same kernel: x solves stacked x = 0 iff square x = 0
    Eigen::JacobiSVD<CMat> ss(stacked), sq(square);
    CHECK((ss.singularValues().minCoeff() > 1e-6) ==
          (sq.singularValues().minCoeff() > 1e-6));
    // and the stacked rows are exactly [pi; (1-pi)(b - sigma)]
    const CMat sigma2 = sigma_root(model2, vec1(0.7), 0.5);
    const CMat expect_top = pi_fun(vec1(0.7));
    const CMat expect_bot =
        (CMat::Identity(2, 2) - pi_fun(vec1(0.7))) *
        (b_fun(vec1(0.7)) - sigma2);
    CHECK((stacked.topRows(2) - expect_top).norm() < 1e-12);
    CHECK((stacked.bottomRows(2) - expect_bot).norm() < 1e-12);
  }

  SUBCASE("invertibility is unitary-conjugation invariant") {
    // pi -> U pi U* with U commuting with q leaves pass/fail unchanged
    auto model2 = LaplaceTypeModel::standard(2, 2, M_PI / 2.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
    for (int trial = 0; trial < 10; ++trial) {
      const double a = ph(rng);
      CMat u = CMat::Zero(2, 2);  // diagonal unitary commutes with q = |xi|^2 I
      u(0, 0) = std::polar(1.0, a);
      u(1, 1) = std::polar(1.0, -0.3 * a);
      auto pi0 = [](const RVec&) {
        CMat p(2, 2);
        p << 1.0, 0.7, 0.0, 0.0;  // non-orthogonal idempotent
        return p;
      };
      auto pi1 = [u, pi0](const RVec& xi) { return CMat(u * pi0(xi) * u.adjoint()); };
      const CMat r0 = reduced_bc_matrix(model2, ProjectionBC::projection(pi0),
                                        vec1(0.5), 0.5);
      const CMat r1 = reduced_bc_matrix(model2, ProjectionBC::projection(pi1),
                                        vec1(0.5), 0.5);
      Eigen::JacobiSVD<CMat> s0(r0), s1(r1);
      const bool inv0 = s0.singularValues().minCoeff() > 1e-6;
      const bool inv1 = s1.singularValues().minCoeff() > 1e-6;
      CHECK(inv0 == inv1);
    }
  }
}

TEST_CASE("boundary symbol solve") {
  auto model = LaplaceTypeModel::standard(2, 1, M_PI);
  const auto basis = make_basis(128);
  const RVec xi = vec1(0.6);
  const double mu = 0.8;
  const Complex sigma = sigma_root_scalar(model, xi, mu);
  const auto zero_f = HalfLineFunction(basis, CMat::Zero(128, 1));

  SUBCASE("f = 0 with Dirichlet data reproduces e^{-sigma t} g") {
    auto r = boundary_symbol_solve(model, ProjectionBC::dirichlet(), xi, mu,
                                   zero_f, CVec::Constant(1, Complex(2.0, 1.0)));
    CHECK(r.residual < 1e-8);
    for (double t : {0.0, 0.5, 1.5})
      CHECK(std::abs(r.u.at(t)(0) -
                     Complex(2.0, 1.0) * std::exp(-sigma * t)) < 1e-8);
  }
  SUBCASE("f = 0 with Neumann data reproduces -(1/sigma) e^{-sigma t} g") {
    auto r = boundary_symbol_solve(model, ProjectionBC::neumann(), xi, mu,
                                   zero_f, CVec::Ones(1));
    for (double t : {0.0, 0.7})
      CHECK(std::abs(r.u.at(t)(0) + std::exp(-sigma * t) / sigma) < 1e-8);
  }
  SUBCASE("f = e^{-t}, sigma = 2, Dirichlet 0 matches the collocation oracle") {
    auto m2 = LaplaceTypeModel::standard(2, 1, M_PI);
    const RVec xs = vec1(std::sqrt(2.0));  // q = 2
    const double mus = std::sqrt(2.0);     // e^{i pi} mu^2 = -2, sigma^2 = 4
    CHECK(std::abs(sigma_root_scalar(m2, xs, mus) - Complex(2.0, 0.0)) < 1e-12);
    const auto f = project_function(
        basis, [](double t) { return CVec::Constant(1, std::exp(-t)); }, 1);
    auto r = boundary_symbol_solve(m2, ProjectionBC::dirichlet(), xs, mus, f,
                                   CVec::Zero(1));
    CHECK(r.residual < 1e-8);
    for (double t : {0.3, 1.0, 2.0}) {
      const Complex expected = oracle::collocation_dirichlet(
          [](double s) { return Complex(std::exp(-s), 0.0); }, Complex(4.0, 0.0),
          Complex(0.0, 0.0), 40.0, t);
      CHECK(std::abs(r.u.at(t)(0) - expected) < 1e-7);
    }
  }
  SUBCASE("singular reduced matrix is reported") {
    // -sigma + b = 0 at this point
    auto bad = ProjectionBC::robin([](const RVec& xi_) {
      return CMat::Constant(1, 1, Complex(xi_.norm(), 0.0));
    });
    CHECK_THROWS_AS(boundary_symbol_solve(model, bad, vec1(1.0), 0.0, zero_f,
                                          CVec::Zero(1)),
                    std::runtime_error);
  }
}

TEST_CASE("E1 over the parameter sphere") {
  SUBCASE("theta = pi: minimum modulus 1") {
    auto rep = check_E1(LaplaceTypeModel::standard(2, 1, M_PI));
    CHECK(rep.pass);
    CHECK(rep.min_sv == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("theta = 0 fails with a refined witness") {
    auto rep = check_E1(LaplaceTypeModel::standard(2, 1, 0.0));
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_sv <= 1e-10);
  }
  SUBCASE("theta = pi/2: minimum is 1/sqrt(2)") {
    // grid-minimization oracle over |i s - (1-s)|, s in [0,1]
    double expect = 1e9;
    for (int i = 0; i <= 100000; ++i) {
      const double s = i / 100000.0;
      expect = std::min(expect, std::abs(Complex(-(1.0 - s), s)));
    }
    auto rep = check_E1(LaplaceTypeModel::standard(2, 1, M_PI / 2.0));
    CHECK(rep.pass);
    CHECK(rep.min_sv == doctest::Approx(expect).epsilon(1e-6));
    CHECK(rep.min_sv == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  }
}

TEST_CASE("Pi2 on the punctured quarter circle") {
  auto model = LaplaceTypeModel::standard(2, 1, M_PI);
  SUBCASE("Dirichlet passes with reduced matrix minimum 1") {
    auto rep = check_Pi2(model, ProjectionBC::dirichlet());
    CHECK(rep.pass);
  }
  SUBCASE("Neumann passes; |sigma| > 0 on the grid") {
    auto rep = check_Pi2(model, ProjectionBC::neumann());
    CHECK(rep.pass);
  }
  SUBCASE("b = |xi'| fails at mu = 0") {
    auto bad = ProjectionBC::robin([](const RVec& xi_) {
      return CMat::Constant(1, 1, Complex(xi_.norm(), 0.0));
    });
    auto rep = check_Pi2(model, bad);
    CHECK_FALSE(rep.pass);
    CHECK(std::abs(rep.witness_mu) < 1e-9);
  }
}

TEST_CASE("Pi3 frequency-diagonal reduction") {
  SUBCASE("theta = pi Dirichlet: rho = 1 and the matrix is [1]") {
    auto rep = check_Pi3(LaplaceTypeModel::standard(2, 1, M_PI),
                         ProjectionBC::dirichlet());
    CHECK(rep.pass);
    CHECK(rep.min_sv == doctest::Approx(1.0));
    CHECK(std::abs(limit_mode_rate(M_PI) - Complex(1.0, 0.0)) < 1e-15);
  }
  SUBCASE("split condition passes for every theta in (0, 2pi)") {
    auto model = LaplaceTypeModel::standard(2, 2, M_PI);
    auto bc = ProjectionBC::projection([](const RVec&) {
      CMat p = CMat::Zero(2, 2);
      p(0, 0) = 1.0;
      return p;
    });
    for (double theta : {0.3, M_PI / 2, M_PI, 1.5 * M_PI, 6.0}) {
      auto m = LaplaceTypeModel::standard(2, 2, theta);
      auto rep = check_Pi3(m, bc);
      CHECK(rep.pass);
    }
  }
  SUBCASE("non-idempotent pi is a precondition error") {
    auto bc = ProjectionBC::projection([](const RVec&) {
      return CMat::Constant(2, 2, Complex(0.7, 0.0));
    });
    CHECK_THROWS_AS(check_Pi3(LaplaceTypeModel::standard(2, 2, M_PI), bc),
                    std::invalid_argument);
  }
  SUBCASE("pass/fail is stable across Laguerre truncations") {
    auto model = LaplaceTypeModel::standard(2, 1, M_PI / 2.0);
    for (int n : {64, 128, 256}) {
      EllipticityGrids grids;
      grids.modes = n;
      CHECK(check_Pi3(model, ProjectionBC::neumann(), grids).pass);
    }
  }
}

TEST_CASE("discretized limit operator nullspace") {
  auto model = LaplaceTypeModel::standard(2, 1, M_PI / 2.0);
  const auto basis = make_basis(128);
  auto probe = limit_nullspace_probe(model, basis);
  CHECK(probe.null_dim == 1);
  CHECK(probe.alignment > 1.0 - 1e-6);
  REQUIRE(probe.smallest.size() >= 2);
  // exactly one near-null direction: clear gap to the next singular value
  CHECK(probe.smallest[0] < 1e-8 * probe.smallest.back());
  CHECK(probe.smallest[1] > 1e-4);
}

TEST_CASE("assembled reports") {
  SUBCASE("Dirichlet and Neumann pass for the four sample rays") {
    for (double theta : {M_PI / 4, M_PI / 2, M_PI, 1.5 * M_PI}) {
      auto model = LaplaceTypeModel::standard(2, 1, theta);
      CHECK(assemble_report(model, ProjectionBC::dirichlet()).overall());
      CHECK(assemble_report(model, ProjectionBC::neumann()).overall());
    }
  }
  SUBCASE("theta = 0 fails") {
    auto model = LaplaceTypeModel::standard(2, 1, 0.0);
    CHECK_FALSE(assemble_report(model, ProjectionBC::dirichlet()).overall());
  }
  SUBCASE("the constructed Pi2 failure fails overall") {
    auto model = LaplaceTypeModel::standard(2, 1, M_PI);
    auto bad = ProjectionBC::robin([](const RVec& xi_) {
      return CMat::Constant(1, 1, Complex(xi_.norm(), 0.0));
    });
    CHECK_FALSE(assemble_report(model, bad).overall());
  }
}
