#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "vortexlab/domain.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/kernels.hpp"
#include "vortexlab/parallel.hpp"

using namespace vortexlab;
using kernels::Isa;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

template <class Fn>
auto under(Isa isa, Fn&& fn) {
  kernels::ScopedIsa scope(isa);
  return fn();
}

// Sizes that exercise the vector body and every remainder length.
const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 1000, 1003};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar is always available and selectable") {
    CHECK(kernels::isa_available(Isa::Scalar));
    kernels::ScopedIsa scope(Isa::Scalar);
    CHECK(kernels::active_isa() == Isa::Scalar);
    CHECK(std::string(kernels::isa_name(Isa::Scalar)) == "scalar");
  }

  TEST_CASE("reductions agree across ISAs") {
    if (!kernels::isa_available(Isa::Avx2)) {
      MESSAGE("AVX2 not available; equivalence not exercised");
      return;
    }
    std::mt19937_64 rng(1);
    for (std::size_t n : kSizes) {
      const auto a = random_vector(n, rng), b = random_vector(n, rng);
      double mag = 0.0;
      for (std::size_t k = 0; k < n; ++k) mag += std::abs(a[k]) + std::abs(a[k] * b[k]) + std::abs(a[k] - b[k]);
      const double tol = 1e-14 * (1.0 + mag);
      for (auto fn : {+[](std::span<const double> x, std::span<const double> y) { return kernels::dot(x, y); },
                      +[](std::span<const double> x, std::span<const double> y) { return kernels::abs_diff_sum(x, y); },
                      +[](std::span<const double> x, std::span<const double>) { return kernels::sum(x); }}) {
        const double s = under(Isa::Scalar, [&] { return fn(a, b); });
        const double v = under(Isa::Avx2, [&] { return fn(a, b); });
        CHECK(std::abs(s - v) <= tol);
      }
    }
  }

  TEST_CASE("elementwise kernels are bitwise identical across ISAs") {
    if (!kernels::isa_available(Isa::Avx2)) {
      MESSAGE("AVX2 not available; equivalence not exercised");
      return;
    }
    std::mt19937_64 rng(2);
    for (std::size_t n : kSizes) {
      const auto x = random_vector(n, rng), y0 = random_vector(n, rng);
      auto run = [&](Isa isa) {
        kernels::ScopedIsa scope(isa);
        std::vector<double> y1 = y0, y2 = y0, y3(n);
        kernels::axpy(0.37, x, y1);
        kernels::xpay(x, -1.21, y2);
        kernels::multiply(x, y0, y3);
        return std::vector<std::vector<double>>{y1, y2, y3};
      };
      const auto s = run(Isa::Scalar), v = run(Isa::Avx2);
      for (int k = 0; k < 3; ++k) CHECK(bitwise_equal(s[k], v[k]));
    }
  }

  TEST_CASE("stencil is bitwise identical across ISAs") {
    if (!kernels::isa_available(Isa::Avx2)) {
      MESSAGE("AVX2 not available; equivalence not exercised");
      return;
    }
    std::mt19937_64 rng(3);
    for (auto [nx, ny] : {std::pair{6, 5}, std::pair{17, 9}, std::pair{64, 70}}) {
      const std::size_t n = static_cast<std::size_t>(nx) * ny;
      auto diag = random_vector(n, rng), mask = random_vector(n, rng);
      for (auto& d : diag) d = 4.0 + std::abs(d);
      for (auto& m : mask) m = m > -0.3 ? 1.0 : 0.0;
      const kernels::StencilView view{nx, ny, 123.0, diag.data(), mask.data()};
      const auto in = random_vector(n, rng);
      auto run = [&](Isa isa) {
        kernels::ScopedIsa scope(isa);
        std::vector<double> out(n, 7.0);
        kernels::apply_stencil(view, in, out);
        return out;
      };
      const auto s = run(Isa::Scalar);
      CHECK(bitwise_equal(s, run(Isa::Avx2)));
      // Outer ring is written as zero.
      for (int i = 0; i < nx; ++i) CHECK(s[i] == 0.0);
      // Interior value from the definition.
      const int g = 2 * nx + 3;
      const double expect = mask[g] * (diag[g] * in[g] - (in[g - 1] + in[g + 1] + in[g - nx] + in[g + nx])) * 123.0;
      CHECK(s[g] == doctest::Approx(expect).epsilon(1e-14));
    }
  }

  TEST_CASE("advection is bitwise identical across ISAs") {
    if (!kernels::isa_available(Isa::Avx2)) {
      MESSAGE("AVX2 not available; equivalence not exercised");
      return;
    }
    std::mt19937_64 rng(4);
    const auto d = build_domain(DomainSpec::ellipse(1.3, 1.0), 61);
    const std::size_t n = d->grid_size();
    std::vector<double> omega(n, 0.0);
    const auto vals = random_vector(n, rng);
    for (int g : d->cells()) omega[g] = vals[g];
    auto u = random_vector(n, rng), v = random_vector(n, rng);
    for (auto& x : u) x *= 40.0;
    for (auto& x : v) x *= 40.0;
    std::vector<int> nearest(n);
    for (std::size_t g = 0; g < n; ++g) nearest[g] = d->grid_of(d->nearest_cell()[g]);
    for (auto interp : {kernels::Interpolation::Bilinear, kernels::Interpolation::CubicClamped}) {
      for (int iters : {1, 2, 5}) {
        kernels::AdvectionView view;
        view.nx = d->nx();
        view.ny = d->ny();
        view.omega = omega.data();
        view.u = u.data();
        view.v = v.data();
        view.nearest = nearest.data();
        view.cells = d->cells().data();
        view.count = d->cell_count();
        view.dt = 0.05;
        view.interp = interp;
        view.backtrack_iterations = iters;
        auto run = [&](Isa isa) {
          kernels::ScopedIsa scope(isa);
          std::vector<double> out(d->cell_count());
          kernels::advect(view, out);
          return out;
        };
        CHECK(bitwise_equal(run(Isa::Scalar), run(Isa::Avx2)));
      }
    }
  }

  TEST_CASE("advection with zero velocity copies the field") {
    const auto d = build_domain(DomainSpec::unit_disk(), 32);
    const std::size_t n = d->grid_size();
    std::mt19937_64 rng(5);
    std::vector<double> omega(n, 0.0), zero(n, 0.0);
    const auto vals = random_vector(n, rng);
    for (int g : d->cells()) omega[g] = vals[g];
    std::vector<int> nearest(n);
    for (std::size_t g = 0; g < n; ++g) nearest[g] = d->grid_of(d->nearest_cell()[g]);
    for (Isa isa : {Isa::Scalar, Isa::Avx2}) {
      if (!kernels::isa_available(isa)) continue;
      kernels::ScopedIsa scope(isa);
      kernels::AdvectionView view{d->nx(), d->ny(), omega.data(), zero.data(), zero.data(), nearest.data(),
                                  d->cells().data(), d->cell_count(), 0.1, kernels::Interpolation::CubicClamped, 2};
      std::vector<double> out(d->cell_count());
      kernels::advect(view, out);
      for (std::size_t c = 0; c < out.size(); ++c) CHECK(out[c] == omega[d->grid_of(static_cast<int>(c))]);
    }
  }

  TEST_CASE("parallel_for covers every index and rethrows") {
    const unsigned saved = thread_count();
    for (unsigned t : {1u, 3u}) {
      set_thread_count(t);
      std::vector<int> hits(1000, 0);
      parallel_for(hits.size(), [&](std::size_t k) { hits[k] += 1; });
      for (int h : hits) REQUIRE(h == 1);
      CHECK_THROWS_AS(parallel_for(50, [](std::size_t k) {
                        if (k == 17) throw InputError("boom");
                      }),
                      InputError);
    }
    set_thread_count(saved);
  }
}
