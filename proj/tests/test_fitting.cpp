#include <doctest.h>

#include <random>

#include "bdcalc/fitting.hpp"
#include "bdcalc/resolvent.hpp"

using namespace bdcalc;

TEST_CASE("fit recovers constructed expansions") {
  const auto grid = default_fit_grid();

  SUBCASE("3/mu + 5/mu^2") {
    std::vector<Complex> vals;
    for (double mu : grid) vals.push_back(3.0 / mu + 5.0 / (mu * mu));
    ExpansionModel em;
    em.ladder_a = {-1.0, -2.0};
    auto fit = fit_expansion(grid, vals, em);
    CHECK(fit.residual < 1e-10);
    CHECK(std::abs(fit.coefficient_at(-1.0) - 3.0) < 1e-8);
    CHECK(std::abs(fit.coefficient_at(-2.0) - 5.0) < 1e-8);
  }
  SUBCASE("2 mu^{-2} log mu lands on the log element") {
    std::vector<Complex> vals;
    for (double mu : grid) vals.push_back(2.0 * std::log(mu) / (mu * mu));
    ExpansionModel em;
    em.ladder_a = {-1.0};
    em.ladder_b = {-2.0};
    em.ladder_b_logs = {true};
    auto fit = fit_expansion(grid, vals, em);
    CHECK(fit.residual < 1e-10);
    CHECK(std::abs(fit.coefficient_at(-2.0, true) - 2.0) < 1e-8);
    CHECK(std::abs(fit.coefficient_at(-1.0)) < 1e-8);
  }
  SUBCASE("any basis member is reproduced exactly") {
    ExpansionModel em = ExpansionModel::trace_density_model(-2.0, 0.0, 2, 3, 2);
    const auto basis = em.basis();
    for (const auto& e : basis) {
      std::vector<Complex> vals;
      for (double mu : grid) {
        double v = std::pow(mu, e.exponent);
        if (e.with_log) v *= std::log(mu);
        vals.push_back(Complex(v, 0.0));
      }
      auto fit = fit_expansion(grid, vals, em);
      CHECK(fit.residual < 1e-10);
    }
  }
}

TEST_CASE("fit of the Dirichlet trace density") {
  // oracle: densities from the resolvent module
  auto model = LaplaceTypeModel::standard(2, 1, M_PI);
  const auto grid = default_fit_grid();
  std::vector<Complex> vals;
  for (double mu : grid)
    vals.push_back(trace_density(model, ProjectionBC::dirichlet(), mu).value);

  ExpansionModel em = ExpansionModel::trace_density_model(-2.0, 0.0, 2, 3, 3);
  auto fit = fit_expansion(grid, vals, em);
  CHECK(std::abs(fit.coefficient_at(-1.0) - 0.125) < 1e-4);
  CHECK(loglog_slope(grid, vals) == doctest::Approx(-1.0).epsilon(1e-3));

  auto logtest = log_presence_test(grid, vals, em, em.ladder_b.front());
  CHECK_FALSE(logtest.present);
}

TEST_CASE("log presence detector") {
  const auto grid = default_fit_grid();
  ExpansionModel em;
  em.ladder_a = {-1.0};
  em.ladder_b = {-2.0};
  em.ladder_b_logs = {true};

  SUBCASE("pure powers: no log") {
    std::vector<Complex> vals;
    for (double mu : grid) vals.push_back(1.7 / mu + 0.4 / (mu * mu));
    CHECK_FALSE(log_presence_test(grid, vals, em, -2.0).present);
  }
  SUBCASE("genuine log term is detected") {
    std::vector<Complex> vals;
    for (double mu : grid)
      vals.push_back(1.7 / mu + 0.9 * std::log(mu) / (mu * mu));
    auto r = log_presence_test(grid, vals, em, -2.0);
    CHECK(r.present);
    CHECK(std::abs(r.coefficient - 0.9) < 1e-6);
  }
}

TEST_CASE("fit diagnostics") {
  const auto grid = default_fit_grid();
  SUBCASE("near-duplicate exponents are ill posed") {
    std::vector<Complex> vals;
    for (double mu : grid) vals.push_back(Complex(1.0 / mu, 0.0));
    ExpansionModel em;
    em.ladder_a = {-1.0, -1.0 - 1e-10, -1.0 - 2e-10};
    CHECK_THROWS_AS(fit_expansion(grid, vals, em), IllPosedFitError);
  }
  SUBCASE("too few samples are rejected") {
    std::vector<double> mu{2.0, 4.0, 8.0};
    std::vector<Complex> vals{{1, 0}, {1, 0}, {1, 0}};
    ExpansionModel em;
    em.ladder_a = {-1.0, -2.0};
    CHECK_THROWS_AS(fit_expansion(mu, vals, em), std::invalid_argument);
  }
  SUBCASE("perturbations stay within the conditioning bound") {
    ExpansionModel em;
    em.ladder_a = {-1.0, -2.0, -3.0};
    std::vector<Complex> vals;
    for (double mu : grid)
      vals.push_back(2.0 / mu - 1.0 / (mu * mu) + 0.3 / (mu * mu * mu));
    auto base = fit_expansion(grid, vals, em);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> eps(-1e-9, 1e-9);
    auto perturbed = vals;
    double emax = 0.0;
    for (auto& v : perturbed) {
      const double e = eps(rng);
      v += e;
      emax = std::max(emax, std::abs(e));
    }
    auto fit2 = fit_expansion(grid, perturbed, em);
    const double shift = (fit2.coefficients - base.coefficients).norm();
    // coefficients move by at most ~cond * perturbation (columns normalized;
    // allow the sample-count factor)
    CHECK(shift <= base.condition_number * emax * 10.0 *
                       std::sqrt(double(grid.size())));
  }
}

TEST_CASE("interior expansion coefficients") {
  SUBCASE("(xi^2+1)^{-1} in one dimension integrates to 1/2") {
    auto a = [](const RVec& xi) {
      return Complex(1.0, 0.0) / (xi[0] * xi[0] + 1.0);
    };
    CHECK(std::abs(interior_coefficient(a, 1, -2.0) - Complex(0.5, 0.0)) <
          1e-9);
  }
  SUBCASE("zero integrand") {
    auto a = [](const RVec&) { return Complex(0.0, 0.0); };
    CHECK(std::abs(interior_coefficient(a, 1, -2.0)) < 1e-14);
  }
  SUBCASE("(xi^2 - e^{i theta})^{-1} at theta = pi/2") {
    const double theta = M_PI / 2.0;
    auto a = [theta](const RVec& xi) {
      return Complex(1.0, 0.0) /
             (Complex(xi[0] * xi[0], 0.0) - std::polar(1.0, theta));
    };
    const Complex expected = std::polar(0.5, -0.5 * (theta - M_PI));
    CHECK(std::abs(interior_coefficient(a, 1, -2.0) - expected) < 1e-8);
    CHECK(std::abs(expected - 0.5 * std::polar(1.0, M_PI / 4.0)) < 1e-15);
  }
  SUBCASE("order precondition") {
    auto a = [](const RVec& xi) {
      return Complex(1.0, 0.0) / (1.0 + std::abs(xi[0]));
    };
    CHECK_THROWS_AS(interior_coefficient(a, 1, -1.0), std::domain_error);
  }
  SUBCASE("two dimensions: radial Lorentzian") {
    // int (|xi|^2+1)^{-2} dxi / (2pi)^2 = pi/(2pi)^2 = 1/(4 pi)
    auto a = [](const RVec& xi) {
      const double r2 = xi.squaredNorm();
      return Complex(1.0, 0.0) / ((r2 + 1.0) * (r2 + 1.0));
    };
    CHECK(std::abs(interior_coefficient(a, 2, -4.0) -
                   Complex(1.0 / (4.0 * M_PI), 0.0)) < 1e-8);
  }
}
