#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/field.hpp"

using namespace vortexlab;

namespace {

Patch cells_patch(const DomainPtr& d, double lambda, std::vector<int> cells) {
  std::sort(cells.begin(), cells.end());
  return Patch{d, lambda, std::move(cells)};
}

int cell_at(const DiscreteDomain& d, Vec2 p) { return d.cell_of_grid(*d.locate(p)); }

}  // namespace

TEST_SUITE("field") {
  TEST_CASE("patch_from_ball") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const auto p = patch_from_ball(d, {0, 0}, 100.0);
    CHECK(ball_radius(100.0) == doctest::Approx(oracle::eps(100.0)).epsilon(1e-14));
    const double count_total = static_cast<double>(p.count()) * 100.0 * d->h() * d->h();
    CHECK(std::abs(count_total - 1.0) < 0.05);
    CHECK(total(p.field()) == doctest::Approx(count_total).epsilon(1e-12));
    for (int c : p.cells) CHECK(norm(d->center(c)) < oracle::eps(100.0));
    CHECK(norm(centroid(p.field())) < d->h());
    CHECK_THROWS_AS(patch_from_ball(d, {0.99, 0}, 100.0), InputError);
  }

  TEST_CASE("concentrated_patch has unit circulation") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const auto p = concentrated_patch(d, {0.5, 0.0}, 400.0);
    const double h2 = d->h() * d->h();
    CHECK(p.count() == static_cast<std::size_t>(std::llround(1.0 / (400.0 * h2))));
    CHECK(total(p.field()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(distance(centroid(p.field()), {0.5, 0.0}) < d->h());
  }

  TEST_CASE("l1_distance") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const double h2 = d->h() * d->h();
    const auto a = patch_from_ball(d, {0, 0}, 100.0);
    CHECK(l1_distance(a.field(), a.field()) == 0.0);
    const auto b = patch_from_ball(d, {0.03, 0.01}, 100.0);
    std::vector<int> sym;
    std::set_symmetric_difference(a.cells.begin(), a.cells.end(), b.cells.begin(), b.cells.end(),
                                  std::back_inserter(sym));
    CHECK(l1_distance(a.field(), b.field()) == doctest::Approx(100.0 * h2 * sym.size()).epsilon(1e-12));
    const auto far = patch_from_ball(d, {0.4, 0.0}, 100.0);
    const auto near = patch_from_ball(d, {-0.4, 0.0}, 100.0);
    const double l1 = l1_distance(far.field(), near.field());
    CHECK(l1 == doctest::Approx(far.total() + near.total()).epsilon(1e-12));
    CHECK(std::abs(l1 - 2.0) < 0.1);
    const auto u = concentrated_patch(d, {0.4, 0.0}, 100.0), v = concentrated_patch(d, {-0.4, 0.0}, 100.0);
    CHECK(l1_distance(u.field(), v.field()) == doctest::Approx(2.0).epsilon(1e-12));
    const auto other = build_domain(DomainSpec::unit_disk(), 64);
    CHECK_THROWS_AS(l1_distance(a.field(), ScalarField(other)), InputError);
  }

  TEST_CASE("triangle inequality on random triples") {
    const auto d = build_domain(DomainSpec::unit_disk(), 48);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int t = 0; t < 20; ++t) {
      ScalarField a(d), b(d), c(d);
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = g(rng), b[k] = g(rng), c[k] = g(rng);
      CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12);
      CHECK(l1_distance(a, b) == doctest::Approx(l1_distance(b, a)).epsilon(1e-14));
    }
  }

  TEST_CASE("distribution") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const double lam = 100.0;
    const auto p = patch_from_ball(d, {0, 0}, lam);
    const std::vector<double> levels{0.0, 0.5 * lam, 0.999 * lam, lam, 2 * lam};
    const auto df = distribution(p.field(), levels);
    for (int k = 0; k < 3; ++k) CHECK(df.measures[k] == doctest::Approx(p.area()).epsilon(1e-14));
    CHECK(df.measures[3] == 0.0);
    CHECK(df.measures[4] == 0.0);
    const double e = oracle::eps(lam);
    CHECK(std::abs(df.measures[1] - oracle::pi * e * e) < 0.05 * oracle::pi * e * e);
    const std::vector<double> pos{0.1, 1.0, 10.0};
    for (double m : distribution(ScalarField(d), pos).measures) CHECK(m == 0.0);
    const std::vector<double> unsorted{1.0, 0.0};
    CHECK_THROWS_AS(distribution(p.field(), unsorted), InputError);
  }

  TEST_CASE("distribution is rearrangement-complete") {
    const auto d = build_domain(DomainSpec::unit_disk(), 64);
    std::mt19937_64 rng(3);
    std::vector<int> all(d->cell_count());
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    const auto a = cells_patch(d, 40.0, {all.begin(), all.begin() + 37});
    const auto b = cells_patch(d, 40.0, {all.begin() + 100, all.begin() + 137});
    const std::vector<double> levels{0.0, 10.0, 20.0, 39.9, 40.0};
    CHECK(distribution(a.field(), levels).measures == distribution(b.field(), levels).measures);
    CHECK(isovortical(a.field(), b.field(), 40.0));
    const auto c = cells_patch(d, 40.0, {all.begin(), all.begin() + 36});
    CHECK_FALSE(isovortical(a.field(), c.field(), 40.0));
  }

  TEST_CASE("centroid and diameter") {
    const auto d = build_domain(DomainSpec::unit_disk(), 256);
    const auto p = patch_from_ball(d, {0, 0}, 100.0);
    CHECK(norm(centroid(p.field())) < d->h());
    CHECK(std::abs(support_diameter(p.field()) - 2 * oracle::eps(100.0)) < 2 * d->h());

    const int c0 = cell_at(*d, {0.1, 0.1});
    CHECK(support_diameter(cells_patch(d, 1.0, {c0}).field()) == 0.0);
    const int c1 = cell_at(*d, {0.3, -0.2});
    const double dist = distance(d->center(c0), d->center(c1));
    CHECK(support_diameter(cells_patch(d, 1.0, {c0, c1}).field()) == doctest::Approx(dist).epsilon(1e-14));
    CHECK_THROWS_AS(centroid(ScalarField(d)), InputError);
  }

  TEST_CASE("support diameter is invariant under whole-cell translation") {
    const auto d = build_domain(DomainSpec::unit_disk(), 128);
    const auto p = patch_from_ball(d, {0.1, 0.0}, 50.0);
    for (auto [di, dj] : {std::pair{3, 0}, std::pair{-5, 7}, std::pair{0, -11}}) {
      std::vector<int> moved;
      for (int c : p.cells) {
        const int g = d->grid_of(c);
        moved.push_back(d->cell_of_grid(d->grid_index(d->grid_i(g) + di, d->grid_j(g) + dj)));
      }
      const auto q = cells_patch(d, p.lambda, moved);
      CHECK(support_diameter(q.field()) == doctest::Approx(support_diameter(p.field())).epsilon(1e-12));
    }
  }

  TEST_CASE("large supports use the hull diameter") {
    // A checkerboard makes every occupied cell a rim cell, past the hull threshold.
    const auto d = build_domain(DomainSpec::unit_disk(), 200);
    ScalarField f(d);
    std::vector<Vec2> pts;
    for (std::size_t c = 0; c < d->cell_count(); ++c) {
      const int g = d->grid_of(static_cast<int>(c));
      if ((d->grid_i(g) + d->grid_j(g)) % 2 != 0) continue;
      f[c] = 1.0;
      pts.push_back(d->center(static_cast<int>(c)));
    }
    REQUIRE(pts.size() > 10000u);
    double brute = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) brute = std::max(brute, norm2(pts[a] - pts[b]));
    CHECK(support_diameter(f) == doctest::Approx(std::sqrt(brute)).epsilon(1e-14));
  }

  TEST_CASE("sampling") {
    const auto d = build_domain(DomainSpec::unit_disk(), 64);
    ScalarField f(d);
    for (std::size_t c = 0; c < f.size(); ++c) {
      const Vec2 x = d->center(static_cast<int>(c));
      f[c] = 2.0 * x.x - x.y + 0.5;
    }
    for (Vec2 p : {Vec2{0.1, 0.2}, Vec2{-0.33, 0.41}, Vec2{0.5, -0.5}})
      CHECK(f.sample(p) == doctest::Approx(2.0 * p.x - p.y + 0.5).epsilon(1e-12));
    CHECK(f.sample({5.0, 5.0}) == 0.0);
    const auto grid = f.to_grid();
    const auto back = ScalarField::from_grid(d, grid);
    CHECK(l1_distance(f, back) == 0.0);
  }
}
