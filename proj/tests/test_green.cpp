#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/green.hpp"

using namespace vortexlab;

namespace {

// ellipse(1,1) is the unit disk geometrically but takes the solver path.
DomainPtr solver_disk(int nx) { return build_domain(DomainSpec::ellipse(1.0, 1.0), nx); }

Vec2 random_point(std::mt19937_64& rng, double rmax) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vec2 p{u(rng), u(rng)};
    if (norm(p) < 1.0) return rmax * p;
  }
}

}  // namespace

TEST_SUITE("green") {
  TEST_CASE("disk Green function from the center") {
    const auto d = build_domain(DomainSpec::unit_disk(), 64);
    const PoissonSolver solver(d);
    for (Vec2 y : {Vec2{0.5, 0}, Vec2{-0.2, 0.3}, Vec2{0.0, -0.9}})
      CHECK(green(solver, {0, 0}, y) == doctest::Approx(-std::log(norm(y)) / (2 * oracle::pi)).epsilon(1e-12));
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const Vec2 x = random_point(rng, 0.9), y = random_point(rng, 0.9);
      CHECK(green(solver, x, y) == doctest::Approx(oracle::disk_green(x.x, x.y, y.x, y.y)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(green(solver, {0.1, 0.1}, {0.1, 0.1}), InputError);
    CHECK_THROWS_AS(green(solver, {0.1, 0.1}, {1.5, 0.0}), InputError);
  }

  TEST_CASE("Green function decays at the boundary") {
    const auto d = build_domain(DomainSpec::unit_disk(), 64);
    const PoissonSolver solver(d);
    const Vec2 x{0.3, 0.2};
    for (double a : {0.0, 1.0, 2.5, 4.0}) {
      const Vec2 dir{std::cos(a), std::sin(a)};
      CHECK(std::abs(green(solver, x, 0.999 * dir)) < 1e-2 * std::abs(green(solver, x, 0.5 * dir)));
    }
  }

  TEST_CASE("solver Green function matches the image formula") {
    const auto d = solver_disk(128);
    const PoissonSolver solver(d);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 10; ++t) {
      const Vec2 x = random_point(rng, 0.7), y = random_point(rng, 0.7);
      CHECK(std::abs(green(solver, x, y) - oracle::disk_green(x.x, x.y, y.x, y.y)) < 2e-3);
    }
  }

  TEST_CASE("symmetry on a non-analytic path") {
    const auto d = build_domain(DomainSpec::ellipse(1.5, 1.0), 128);
    const PoissonSolver solver(d);
    std::mt19937_64 rng(13);
    for (int t = 0; t < 10; ++t) {
      const Vec2 x = random_point(rng, 0.8), y = random_point(rng, 0.8);
      CHECK(green(solver, x, y) == doctest::Approx(green(solver, y, x)).epsilon(1e-3));
      const double hxy = regular_part(solver, x).sample_inside(y);
      const double hyx = regular_part(solver, y).sample_inside(x);
      CHECK(std::abs(hxy - hyx) < 1e-3);
    }
  }

  TEST_CASE("green consistency with the regular part") {
    const auto d = build_domain(DomainSpec::ellipse(1.3, 0.9), 64);
    const PoissonSolver solver(d);
    const Vec2 x{0.2, -0.1}, y{-0.4, 0.3};
    const double direct = -std::log(distance(x, y)) / (2 * oracle::pi) - regular_part(solver, x).sample_inside(y);
    CHECK(green(solver, x, y) == doctest::Approx(direct).epsilon(1e-14));
  }

  TEST_CASE("regular part of the disk center vanishes") {
    const auto d = solver_disk(128);
    const PoissonSolver solver(d);
    const auto h0 = regular_part(solver, {0, 0});
    double worst = 0.0;
    for (double v : h0.values()) worst = std::max(worst, std::abs(v));
    CHECK(worst < 3 * d->h() * d->h());
    const double diag = regular_part(solver, {0.5, 0}).sample_inside({0.5, 0});
    CHECK(std::abs(diag - oracle::disk_robin(0.5, 0)) < 1e-3);
    CHECK(oracle::disk_robin(0.5, 0) == doctest::Approx(0.04578).epsilon(1e-4));
  }

  TEST_CASE("Robin function on the disk") {
    const auto d = solver_disk(128);
    const PoissonSolver solver(d);
    RobinOptions opts;
    opts.stride = 2;
    const auto rf = robin(solver, opts);
    CHECK(std::abs(rf.value({0, 0})) < 1e-3);
    CHECK(rf.value({0, 0}) < rf.value({0.5, 0}));
    CHECK(rf.value({0.5, 0}) < rf.value({0.8, 0}));
    const double rise = oracle::disk_robin(0.9, 0) - oracle::disk_robin(0.5, 0);
    CHECK(rf.value({0.9, 0}) - rf.value({0.5, 0}) >= rise - 1e-2);
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
      const Vec2 p = random_point(rng, 0.8);
      CHECK(std::abs(rf.value(p) - rf.value(-p)) < 1e-3);
    }
    CHECK_THROWS_AS(robin(solver, RobinOptions{1, true}), InputError);
    CHECK_THROWS_AS(robin(solver, RobinOptions{0, false}), InputError);
  }

  TEST_CASE("analytic Robin field") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const auto rf = robin(PoissonSolver(d), RobinOptions{1, true});
    std::mt19937_64 rng(19);
    for (int t = 0; t < 20; ++t) {
      const Vec2 p = random_point(rng, 0.8);
      CHECK(std::abs(rf.value(p) - rf.value(-p)) < 1e-6);
      CHECK(std::abs(rf.value(p) - oracle::disk_robin(p.x, p.y)) < 1e-3);
    }
  }

  TEST_CASE("disk critical point") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const auto rf = robin(PoissonSolver(d), RobinOptions{1, true});
    const auto pts = find_critical_points(rf);
    REQUIRE(pts.size() == 1);
    CHECK(norm(pts[0].location) < d->h());
    CHECK(pts[0].kind == CriticalKind::Minimum);
    CHECK(std::string(critical_kind_name(pts[0].kind)) == "nondegenerate-min");
    CHECK(std::abs(pts[0].hessian.xx - 1 / oracle::pi) < 0.1 / oracle::pi);
    CHECK(std::abs(pts[0].hessian.yy - 1 / oracle::pi) < 0.1 / oracle::pi);
    CHECK(std::abs(pts[0].hessian.xy) < 0.1 / oracle::pi);
    const auto flat = find_critical_points(rf, 1e-8, 10.0);
    REQUIRE(flat.size() == 1);
    CHECK(flat[0].kind == CriticalKind::Degenerate);
  }

  TEST_CASE("ellipse minimum matches the grid argmin") {
    const auto d = build_domain(DomainSpec::ellipse(1.5, 1.0), 96);
    const auto rf = robin(PoissonSolver(d), RobinOptions{2, false});
    const auto& H = rf.values();
    std::size_t best = 0;
    for (std::size_t c = 0; c < H.size(); ++c)
      if (H[c] < H[best]) best = c;
    const Vec2 argmin = d->center(static_cast<int>(best));
    const auto pts = find_critical_points(rf);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].kind == CriticalKind::Minimum);
    CHECK(distance(pts[0].location, argmin) < 2 * d->h());
    CHECK(norm(pts[0].location) < d->h());
  }

  TEST_CASE("translated disk minimum") {
    const Vec2 c{0.3, -0.2};
    const auto d = build_domain(DomainSpec::disk(c, 0.7), 64);
    for (bool analytic : {true, false}) {
      const auto rf = robin(PoissonSolver(d), RobinOptions{1, analytic});
      const auto pts = find_critical_points(rf);
      REQUIRE(pts.size() == 1);
      CHECK(pts[0].kind == CriticalKind::Minimum);
      CHECK(distance(pts[0].location, c) < d->h());
    }
  }
}
