#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/euler.hpp"
#include "vortexlab/steady.hpp"

using namespace vortexlab;

namespace {

ScalarField gaussian(const DomainPtr& d, Vec2 c, double s, double amp) {
  ScalarField f(d);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = amp * std::exp(-norm2(d->center(static_cast<int>(k)) - c) / (s * s));
  return f;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_SUITE("euler") {
  TEST_CASE("velocity of a centered patch") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const PoissonSolver solver(d);
    // The ball raster is symmetric under the grid's reflections; its
    // strength is rescaled to unit circulation.
    auto ball = patch_from_ball(d, {0, 0}, 100.0);
    ball.lambda /= ball.total();
    const auto vel = velocity_from_vorticity(solver, ball.field());
    int sampled = 0;
    for (std::size_t k = 0; k < d->cell_count(); k += 7) {
      const Vec2 x = d->center(static_cast<int>(k));
      const double r = norm(x);
      if (r < 2 * oracle::eps(100.0) || d->depth(static_cast<int>(k)) <= 2) continue;
      const Vec2 u{vel.u[k], vel.v[k]};
      REQUIRE(std::abs(dot(u, x) / r) < 1e-2 * norm(u));
      // Counterclockwise for positive vorticity.
      REQUIRE(cross(x, u) > 0.0);
      ++sampled;
    }
    CHECK(sampled > 1000);
    const Vec2 p{0.5, 0.0};
    const double speed = std::hypot(vel.u.sample(p), vel.v.sample(p));
    CHECK(std::abs(speed - 1 / oracle::pi) < 0.03 / oracle::pi);
  }

  TEST_CASE("zero vorticity has zero velocity") {
    const auto d = build_domain(DomainSpec::ellipse(1.5, 1.0), 64);
    const auto vel = velocity_from_vorticity(PoissonSolver(d), ScalarField(d));
    CHECK(vel.max_speed() == 0.0);
  }

  TEST_CASE("tangency at the boundary") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const PoissonSolver solver(d);
    for (Vec2 c : {Vec2{0.5, 0.2}, Vec2{-0.3, -0.6}}) {
      const auto vel = velocity_from_vorticity(solver, gaussian(d, c, 0.15, 10.0));
      double worst = 0.0;
      for (std::size_t k = 0; k < d->cell_count(); ++k) {
        if (d->depth(static_cast<int>(k)) != 1) continue;
        const Vec2 x = d->center(static_cast<int>(k));
        worst = std::max(worst, std::abs(dot(Vec2{vel.u[k], vel.v[k]}, (1.0 / norm(x)) * x)));
      }
      CHECK(worst <= 0.1 * vel.max_speed());
    }
  }

  TEST_CASE("tiny steps barely change the field") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const PoissonSolver solver(d);
    const auto w0 = concentrated_patch(d, {0.3, 0.1}, 50.0).field();
    auto st = make_state(solver, w0);
    step(solver, st, SolverConfig{}, 1e-12);
    CHECK(l1_distance(st.w, w0) < 1e-8);
    CHECK(st.t == 1e-12);
  }

  TEST_CASE("time step rule") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const PoissonSolver solver(d);
    const auto st = make_state(solver, gaussian(d, {0, 0.2}, 0.1, 50.0));
    SolverConfig cfg;
    const double umax = st.vel.max_speed();
    CHECK(choose_dt(st, cfg) == doctest::Approx(std::min(cfg.dt_max, cfg.cfl * d->h() / umax)).epsilon(1e-14));
    CHECK(choose_dt(st, cfg, 1e-4) == 1e-4);
    cfg.cfl = 0.7;
    CHECK_THROWS_AS(choose_dt(st, cfg), InputError);
    cfg.cfl = 0.5;
    cfg.dt_max = 0.0;
    CHECK_THROWS_AS(choose_dt(st, cfg), InputError);
    CHECK_THROWS_AS(evolve(solver, st.w, 0.0, SolverConfig{}), InputError);
  }

  TEST_CASE("zero field stays zero") {
    const auto d = build_domain(DomainSpec::unit_disk(), 64);
    const PoissonSolver solver(d);
    const auto rec = evolve(solver, ScalarField(d), 3.0, SolverConfig{});
    REQUIRE(rec.rows.size() >= 2u);
    for (const auto& r : rec.rows) {
      CHECK(r.E == 0.0);
      CHECK(r.l1_drift == 0.0);
      CHECK(r.diam == 0.0);
      CHECK(r.circulation == 0.0);
      for (double m : r.dist) CHECK(m == 0.0);
    }
    CHECK(rec.final_state.t == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(max_abs(rec.final_state.w) == 0.0);
  }

  TEST_CASE("initial diagnostics of a patch") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const PoissonSolver solver(d);
    const auto p = concentrated_patch(d, {0.2, 0.0}, 50.0);
    const auto st = make_state(solver, p.field());
    const auto row = diagnose(st, p.field(), p.lambda);
    CHECK(row.l1_drift == 0.0);
    CHECK(row.circulation == doctest::Approx(1.0).epsilon(1e-12));
    for (double m : row.dist) CHECK(m == doctest::Approx(p.area()).epsilon(1e-12));
    CHECK(row.E == doctest::Approx(kinetic_energy(solver, p.field())).epsilon(1e-12));
    CHECK(distance(row.centroid, {0.2, 0.0}) < d->h());
  }

  TEST_CASE("range and circulation under evolution") {
    const auto d = build_domain(DomainSpec::unit_disk(), 96);
    const PoissonSolver solver(d);
    const auto p = concentrated_patch(d, {0.3, 0.1}, 30.0);
    for (auto interp : {kernels::Interpolation::Bilinear, kernels::Interpolation::CubicClamped}) {
      SolverConfig cfg;
      cfg.interpolation = interp;
      int steps = 0;
      const auto rec = evolve(solver, p.field(), 3.0, cfg, 0.0, [&](const EvolutionState& s, int) {
        ++steps;
        for (double v : s.w.values()) REQUIRE((v >= 0.0 && v <= p.lambda));
      });
      CHECK(steps == static_cast<int>(rec.dts.size()));
      for (const auto& r : rec.rows) CHECK(std::abs(r.circulation - 1.0) < 1e-12);
    }
  }

  TEST_CASE("circulation conservation") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const PoissonSolver solver(d);
    const auto w0 = gaussian(d, {0.3, 0.0}, 0.12, 20.0);
    const double g0 = total(w0);
    const auto kept = evolve(solver, w0, 10.0, SolverConfig{});
    CHECK(std::abs(total(kept.final_state.w) - g0) < 1e-2 * g0);
    CHECK(std::abs(total(kept.final_state.w) - g0) < 1e-12 * g0);
    // Interpolation alone loses a little circulation each step.
    SolverConfig raw;
    raw.conserve_circulation = false;
    const auto lost = evolve(solver, w0, 10.0, raw);
    CHECK(std::abs(total(lost.final_state.w) - g0) > 1e-6 * g0);
    CHECK(std::abs(total(lost.final_state.w) - g0) < 5e-2 * g0);
  }

  TEST_CASE("semi-group consistency") {
    const auto d = build_domain(DomainSpec::unit_disk(), 96);
    const PoissonSolver solver(d);
    // Weak enough that dt_max, not the CFL bound, sets every step.
    const auto w0 = gaussian(d, {0.2, -0.1}, 0.2, 0.5);
    SolverConfig cfg;
    const auto full = evolve(solver, w0, 1.0, cfg);
    const auto half = evolve(solver, w0, 0.5, cfg);
    const auto rest = evolve(solver, half.final_state.w, 0.5, cfg);
    REQUIRE(full.dts.size() == half.dts.size() + rest.dts.size());
    for (std::size_t k = 0; k < half.dts.size(); ++k) CHECK(full.dts[k] == doctest::Approx(half.dts[k]).epsilon(1e-12));
    for (std::size_t k = 0; k < rest.dts.size(); ++k)
      CHECK(full.dts[half.dts.size() + k] == doctest::Approx(rest.dts[k]).epsilon(1e-12));
    CHECK(l1_distance(full.final_state.w, rest.final_state.w) < 1e-12 * total(w0));
  }

  TEST_CASE("steady patch drifts slowly") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const PoissonSolver solver(d);
    const auto p = construct(solver, 2.0, ConstraintClass::global(), {0, 0});
    REQUIRE(p.converged);
    const auto rec = evolve(solver, p.patch.field(), 10.0, SolverConfig{}, p.patch.lambda);
    CHECK(rec.rows.back().l1_drift / 10.0 < 1e-2);
    const double e0 = rec.rows.front().E;
    for (const auto& r : rec.rows) CHECK(std::abs(r.E - e0) < 1e-2 * e0);
  }

  TEST_CASE("self-drift decreases under refinement") {
    double drift[2];
    int k = 0;
    for (int nx : {128, 256}) {
      const auto d = build_domain(DomainSpec::unit_disk(), nx);
      const PoissonSolver solver(d);
      const auto p = construct(solver, 5.0, ConstraintClass::global(), {0, 0});
      drift[k++] = evolve(solver, p.patch.field(), 5.0, SolverConfig{}, p.patch.lambda).rows.back().l1_drift;
    }
    CHECK(drift[0] >= 1.5 * drift[1]);
  }
}
