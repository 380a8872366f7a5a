#include <doctest.h>

#include "bdcalc/green.hpp"
#include "oracles.hpp"

using namespace bdcalc;

namespace {

HalfLineFunction bump_mode(const BasisPtr& b) {
  // t^2 e^{-t}: vanishes at 0, decays well inside the window
  return project_function(
      b, [](double t) { return CVec::Constant(1, t * t * std::exp(-t)); }, 1);
}

ParamPoint unit_pt() {
  RVec xi(1);
  xi[0] = 0.8;
  return ParamPoint::boundary(xi, 0.6);
}

}  // namespace

TEST_CASE("op+ with a constant multiplier is the identity") {
  const auto basis = make_basis(128);
  const auto f = bump_mode(basis);
  const auto g = op_plus([](double) { return Complex(1.0, 0.0); }, f);
  CHECK((g.coeffs - f.coeffs).norm() < 1e-6);
}

TEST_CASE("op+ with i xi_n differentiates") {
  const auto basis = make_basis(128);
  const auto f = bump_mode(basis);
  const auto g =
      op_plus([](double xin) { return Complex(0.0, xin); }, f);
  const auto fp = derivative_plus(f);
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0, 4.0, 8.0})
    worst = std::max(worst, std::abs(g.at(t)(0) - fp.at(t)(0)));
  CHECK(worst < 1e-6);
}

TEST_CASE("op+ with (1+xi_n^2)^{-1} matches the convolution oracle") {
  const auto basis = make_basis(128);
  const auto f = project_function(
      basis, [](double t) { return CVec::Constant(1, t * std::exp(-t)); }, 1);
  const auto g = op_plus(
      [](double xin) { return Complex(1.0, 0.0) / (1.0 + xin * xin); }, f);
  // kernel of the multiplier is e^{-|tau|}/2
  for (double t : {0.4, 1.0, 2.5, 5.0}) {
    const Complex expected = oracle::dense_convolution(
        [](double tau) { return Complex(0.5 * std::exp(-std::abs(tau)), 0.0); },
        [](double s) { return Complex(s * std::exp(-s), 0.0); }, t);
    CHECK(std::abs(g.at(t)(0) - expected) < 1e-5);
  }
}

TEST_CASE("aliasing guard flags under-resolved inputs") {
  // the top basis mode oscillates past the lowpass edge of a coarse grid
  const auto basis = make_basis(128);
  CMat c = CMat::Zero(128, 1);
  c(127, 0) = 1.0;
  HalfLineFunction f(basis, c);
  OpPlusOptions coarse;
  coarse.grid = 256;
  CHECK_THROWS_AS(op_plus([](double) { return Complex(1.0, 0.0); }, f, coarse),
                  AliasingError);
}

TEST_CASE("order-reduction symbol values") {
  const auto pt = unit_pt();
  SUBCASE("d = 0 gives 1") {
    CHECK(order_reduction_symbol(0, 3.7, pt) == Complex(1.0, 0.0));
  }
  SUBCASE("lambda^1_- behaves like -i xi_n at large |xi_n|") {
    for (double xin : {3e3, 1e4, 1e5}) {
      const Complex v = order_reduction_symbol(1, xin, pt);
      const Complex ref = Complex(0.0, -xin);
      CHECK(std::abs(v / ref - 1.0) < 2e-3 * 3e3 / xin + 1e-6);
    }
  }
  SUBCASE("profile data: psi(0) = 1 and c > 2 sup|psi'|") {
    const auto& prof = MinusProfile::instance();
    CHECK(std::abs(prof.psi(0.0) - Complex(1.0, 0.0)) < 1e-12);
    CHECK(prof.c > 2.0 * prof.sup_dpsi);
    CHECK(prof.sup_dpsi == doctest::Approx(1.5).epsilon(1e-3));
  }
  SUBCASE("negative powers have a nonzero base") {
    CHECK(std::abs(order_reduction_symbol(-1, 0.0, pt)) > 0.0);
  }
}

TEST_CASE("op+(lambda^1_-) inverts op+(lambda^{-1}_-)") {
  const auto basis = make_basis(128);
  const auto pt = unit_pt();
  std::vector<HalfLineFunction> tests;
  tests.push_back(bump_mode(basis));
  tests.push_back(project_function(
      basis, [](double t) { return CVec::Constant(1, t * std::exp(-1.5 * t)); },
      1));
  for (const auto& f : tests) {
    const auto step = op_plus_order_reduction(-1, pt, f);
    const auto back = op_plus_order_reduction(+1, pt, step);
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0, 4.0})
      worst = std::max(worst, std::abs(back.at(t)(0) - f.at(t)(0)));
    CHECK(worst < 1e-4);
  }
}
