#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vortexlab/energy.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/steady.hpp"

using namespace vortexlab;

namespace {

// The same cells mirrored top to bottom; the disk mask is symmetric.
ScalarField mirror_y(const ScalarField& w) {
  const auto& d = w.dom();
  const auto grid = w.to_grid();
  std::vector<double> out(grid.size());
  for (int j = 0; j < d.ny(); ++j)
    for (int i = 0; i < d.nx(); ++i) out[d.grid_index(i, d.ny() - 1 - j)] = grid[d.grid_index(i, j)];
  return ScalarField::from_grid(w.domain(), out);
}

// A random exact-indicator field with the patch's strength and cell count:
// a whole-cell shift plus a few cells swapped for cells nearby.
Patch jiggle(const Patch& p, std::mt19937_64& rng) {
  const auto& d = *p.dom;
  std::uniform_int_distribution<int> shift(-3, 3), pick(0, static_cast<int>(p.count()) - 1);
  const int di = shift(rng), dj = shift(rng);
  std::vector<char> used(d.cell_count(), 0);
  std::vector<int> cells;
  for (int c : p.cells) {
    const int g = d.grid_of(c);
    const int m = d.cell_of_grid(d.grid_index(d.grid_i(g) + di, d.grid_j(g) + dj));
    cells.push_back(m);
    used[m] = 1;
  }
  std::uniform_int_distribution<int> near(-6, 6);
  const int swaps = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int s = 0; s < swaps; ++s) {
    const int k = pick(rng);
    const int g = d.grid_of(cells[k]);
    const int m = d.cell_of_grid(d.grid_index(d.grid_i(g) + near(rng), d.grid_j(g) + near(rng)));
    if (m < 0 || used[m]) continue;
    used[cells[k]] = 0;
    used[m] = 1;
    cells[k] = m;
  }
  std::sort(cells.begin(), cells.end());
  return Patch{p.dom, p.lambda, cells};
}

}  // namespace

TEST_SUITE("energy") {
  TEST_CASE("kinetic energy oracles") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const PoissonSolver solver(d);
    CHECK(kinetic_energy(solver, ScalarField(d)) == 0.0);
    const auto p = concentrated_patch(d, {0, 0}, 100.0);
    const double e = kinetic_energy(solver, p.field());
    CHECK(oracle::rankine_E(100.0) == doctest::Approx(0.2485).epsilon(1e-3));
    CHECK(std::abs(e - oracle::rankine_E(100.0)) < 0.02 * oracle::rankine_E(100.0));
  }

  TEST_CASE("reflection invariance") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const PoissonSolver solver(d);
    const auto w = patch_from_ball(d, {0.3, 0.2}, 50.0).field();
    const double e = kinetic_energy(solver, w), m = kinetic_energy(solver, mirror_y(w));
    CHECK(e > 0.0);
    CHECK(e == doctest::Approx(m).epsilon(1e-10));
  }

  TEST_CASE("stream-function energy matches the Green double sum") {
    const auto d = build_domain(DomainSpec::unit_disk(), 32);
    const PoissonSolver solver(d);
    for (Vec2 c : {Vec2{0, 0}, Vec2{0.3, -0.1}}) {
      const auto w = patch_from_ball(d, c, 5.0).field();
      const double e = kinetic_energy(solver, w), ds = kinetic_energy_double_sum(w);
      CHECK(std::abs(e - ds) < 0.02 * ds);
    }
    const auto e = build_domain(DomainSpec::ellipse(1.5, 1.0), 32);
    CHECK_THROWS_AS(kinetic_energy_double_sum(ScalarField(e)), InputError);
  }

  TEST_CASE("excess energy of the Rankine patch") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const PoissonSolver solver(d);
    const auto p = concentrated_patch(d, {0, 0}, 100.0);
    const auto w = p.field();
    const auto psi = solver.solve(w);
    const auto rep = excess_energy(w, psi, core_level(psi, p.count()));
    CHECK(std::abs(rep.T - oracle::rankine_T()) < 0.03 * oracle::rankine_T());
    CHECK(rep.identity_residual < 1e-3 * rep.E);
    CHECK(rep.E == doctest::Approx(kinetic_energy(w, psi)).epsilon(1e-14));
  }

  TEST_CASE("core level on psi linear in rank") {
    const auto d = build_domain(DomainSpec::unit_disk(), 32);
    ScalarField psi(d);
    for (std::size_t c = 0; c < psi.size(); ++c) psi[c] = -static_cast<double>(c);
    for (std::size_t k : {4u, 17u, 100u})
      CHECK(core_level(psi, k) == doctest::Approx(-(static_cast<double>(k) - 0.5)).epsilon(1e-12));
  }

  TEST_CASE("top_cells breaks ties by index") {
    const auto d = build_domain(DomainSpec::unit_disk(), 32);
    ScalarField psi(d);
    for (std::size_t c = 0; c < psi.size(); ++c) psi[c] = 1.0;
    psi[40] = 2.0;
    const auto top = top_cells(psi, 5);
    CHECK(top.cells == std::vector<int>{0, 1, 2, 3, 40});
    CHECK(top.threshold == 1.0);
    CHECK(top.ties == static_cast<int>(psi.size()) - 5);
    std::vector<char> adm(psi.size(), 0);
    adm[7] = adm[9] = adm[40] = 1;
    CHECK(top_cells(psi, 2, adm).cells == std::vector<int>{7, 40});
    CHECK_THROWS_AS(top_cells(psi, 4, adm), InputError);
  }

  TEST_CASE("reprojection") {
    const auto d = build_domain(DomainSpec::unit_disk(), 96);
    const PoissonSolver solver(d);
    const auto steady = construct(solver, 50.0, ConstraintClass::global(), {0.1, 0.0});
    REQUIRE(steady.converged);
    const double lam = steady.patch.lambda;
    const auto fixed = reproject_isovortical(solver, steady.patch.field(), lam, steady.K);
    CHECK(fixed.patch.cells == steady.patch.cells);

    std::mt19937_64 rng(21);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
      const auto in = jiggle(steady.patch, rng);
      const auto w = in.field();
      const auto out = reproject_isovortical(solver, w, lam, in.count());
      REQUIRE(out.patch.count() == in.count());
      const double e_in = kinetic_energy(w, out.psi);
      const double e_out = kinetic_energy(solver, out.patch.field());
      CHECK(e_out >= e_in - 1e-6);
      const auto again = reproject_isovortical(solver, out.patch.field(), lam, in.count());
      const auto twice = reproject_isovortical(solver, again.patch.field(), lam, in.count());
      CHECK(twice.patch.cells == again.patch.cells);
      ++checked;
    }
    CHECK(checked == 100);
  }

  TEST_CASE("bathtub inequality on arbitrary fields") {
    const auto d = build_domain(DomainSpec::ellipse(1.4, 1.0), 64);
    const PoissonSolver solver(d);
    const double lam = 30.0;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
      // 0 <= w <= lam with total exactly K lam h^2.
      ScalarField w(d);
      double s = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) s += (w[k] = u(rng) < 0.2 ? lam * u(rng) : 0.0);
      const auto k_cells = static_cast<std::size_t>(s / lam);
      w *= static_cast<double>(k_cells) * lam / s;
      const auto out = reproject_isovortical(solver, w, lam, k_cells);
      auto diff = out.patch.field();
      diff -= w;
      double gain = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) gain += out.psi[k] * diff[k] * d->h() * d->h();
      CHECK(gain >= -1e-12);
      CHECK(kinetic_energy(solver, out.patch.field()) >= kinetic_energy(solver, w) - 1e-12);
    }
  }

  TEST_CASE("steadiness residual") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const PoissonSolver solver(d);
    const auto centered = construct(solver, 100.0, ConstraintClass::global(), {0.1, 0.0}).patch.field();
    ScalarField flat(d);
    for (std::size_t k = 0; k < flat.size(); ++k) flat[k] = 3.0;
    CHECK(steadiness_residual(solver, centered, {flat}) == 0.0);

    const auto battery = default_test_battery(d);
    CHECK(battery.size() >= 4u);
    for (const auto& xi : battery)
      for (std::size_t c = 0; c < xi.size(); ++c)
        if (d->depth(static_cast<int>(c)) <= 4) REQUIRE(xi[c] == 0.0);
    const double r0 = steadiness_residual(solver, centered, battery);
    const double r1 = steadiness_residual(solver, concentrated_patch(d, {0.3, 0}, 100.0).field(), battery);
    CHECK(r0 < 1e-3);
    CHECK(r1 > 10.0 * r0);
  }
}
