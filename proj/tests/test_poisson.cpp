#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/poisson.hpp"

using namespace vortexlab;

namespace {

ScalarField constant(const DomainPtr& d, double v) {
  ScalarField f(d);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = v;
  return f;
}

double unit_source_error(int nx, PoissonOptions opts = {}) {
  const auto d = build_domain(DomainSpec::unit_disk(), nx);
  const PoissonSolver solver(d, opts);
  const auto psi = solver.solve(constant(d, 1.0));
  double err = 0.0;
  for (std::size_t c = 0; c < psi.size(); ++c)
    err = std::max(err, std::abs(psi[c] - oracle::unit_source_psi(norm(d->center(static_cast<int>(c))))));
  return err;
}

}  // namespace

TEST_SUITE("poisson") {
  TEST_CASE("f = 1 on the unit disk") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const PoissonSolver solver(d);
    SolveReport rep;
    const auto psi = solver.solve(constant(d, 1.0), &rep);
    CHECK(rep.relative_residual <= solver.options().tolerance);
    CHECK(psi.sample({0, 0}) == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(unit_source_error(128) < 3 * d->h() * d->h());
  }

  TEST_CASE("second-order convergence") {
    const double e64 = unit_source_error(64), e128 = unit_source_error(128);
    CHECK(e64 / e128 >= 3.0);
  }

  TEST_CASE("f = 0 gives psi = 0") {
    const auto d = build_domain(DomainSpec::ellipse(1.5, 1.0), 64);
    const auto psi = PoissonSolver(d).solve(ScalarField(d));
    for (std::size_t c = 0; c < psi.size(); ++c) CHECK(psi[c] == 0.0);
  }

  TEST_CASE("Rankine patch stream function outside the core") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const auto p = patch_from_ball(d, {0, 0}, 100.0);
    const auto psi = PoissonSolver(d).solve(p.field());
    // Scale by the discrete circulation so the check isolates the solver.
    const double got = psi.sample({0.5, 0.0}) / p.total();
    CHECK(std::abs(got - oracle::rankine_psi_outer(0.5)) < 0.01 * oracle::rankine_psi_outer(0.5));
    CHECK(std::abs(psi.sample({0.5, 0.0}) - oracle::rankine_psi_outer(0.5)) < 0.05 * oracle::rankine_psi_outer(0.5));
  }

  TEST_CASE("harmonic boundary data") {
    const auto d = build_domain(DomainSpec::ellipse(1.5, 1.0), 96);
    const PoissonSolver solver(d);
    const BoundaryData g = [](Vec2 p) { return p.x * p.x - p.y * p.y + 0.3 * p.x; };
    const auto psi = solver.solve(ScalarField(d), g);
    double err = 0.0;
    for (std::size_t c = 0; c < psi.size(); ++c) err = std::max(err, std::abs(psi[c] - g(d->center(static_cast<int>(c)))));
    CHECK(err < 1e-3);
    CHECK(solver.relative_residual(psi, ScalarField(d), &g) < 1e-8);
  }

  TEST_CASE("discrete maximum principle") {
    const auto d = build_domain(DomainSpec::disk({0.2, 0.1}, 0.8), 80);
    const PoissonSolver solver(d);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 5; ++t) {
      ScalarField f(d);
      for (std::size_t k = 0; k < f.size(); ++k) f[k] = u(rng) < 0.1 ? 10 * u(rng) : 0.0;
      const auto psi = solver.solve(f);
      for (std::size_t c = 0; c < psi.size(); ++c) REQUIRE(psi[c] >= 0.0);
    }
  }

  TEST_CASE("conjugate gradients agree with the direct solve") {
    const auto d = build_domain(DomainSpec::ellipse(1.2, 0.8), 96);
    PoissonOptions cg;
    cg.method = PoissonOptions::Method::ConjugateGradient;
    const PoissonSolver direct(d), iterative(d, cg);
    const auto f = patch_from_ball(d, {0.2, 0.1}, 30.0).field();
    SolveReport rep;
    const auto a = direct.solve(f);
    const auto b = iterative.solve(f, &rep);
    CHECK(rep.relative_residual <= cg.tolerance);
    CHECK(rep.iterations > 0);
    CHECK(l1_distance(a, b) < 1e-8);
    const auto warm = iterative.solve(f, a, &rep);
    CHECK(l1_distance(a, warm) < 1e-8);
    CHECK(rep.iterations <= 2);
  }

  TEST_CASE("non-convergence carries the residual") {
    const auto d = build_domain(DomainSpec::unit_disk(), 64);
    PoissonOptions opts;
    opts.method = PoissonOptions::Method::ConjugateGradient;
    opts.max_iterations = 2;
    opts.tolerance = 1e-14;
    const PoissonSolver solver(d, opts);
    try {
      solver.solve(constant(d, 1.0));
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(e.residual() > opts.tolerance);
    }
  }

  TEST_CASE("apply is the inverse of solve") {
    const auto d = build_domain(DomainSpec::unit_disk(), 64);
    const PoissonSolver solver(d);
    const auto f = patch_from_ball(d, {-0.2, 0.3}, 20.0).field();
    const auto psi = solver.solve(f);
    auto r = solver.apply(psi);
    r -= f;
    double err = 0.0;
    for (double v : r.values()) err = std::max(err, std::abs(v));
    CHECK(err < 1e-8 * 20.0);
  }
}
