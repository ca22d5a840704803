#include "vortexlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vortexlab/error.hpp"
#include "vortexlab/green.hpp"
#include "vortexlab/kernels.hpp"

namespace vortexlab {

double kinetic_energy(const ScalarField& w, const ScalarField& psi) {
  if (w.domain() != psi.domain()) throw InputError("fields live on different domains");
  const double h = w.dom().h();
  return 0.5 * kernels::dot(w.values(), psi.values()) * h * h;
}

double kinetic_energy(const PoissonSolver& solver, const ScalarField& w) {
  return kinetic_energy(w, solver.solve(w));
}

double kinetic_energy_double_sum(const ScalarField& w) {
  const auto& d = w.dom();
  const auto& spec = d.spec();
  if (spec.kind() != DomainKind::Disk) throw InputError("double-sum energy needs the disk Green function");
  const double h = d.h();
  // Mean of ln|x-y| over pairs of points in one square cell of side h.
  const double self_log = std::log(h) - 25.0 / 12.0 + kPi / 3.0 + std::log(2.0) / 3.0;
  std::vector<int> support;
  for (std::size_t c = 0; c < w.size(); ++c)
    if (w[c] != 0.0) support.push_back(static_cast<int>(c));
  double acc = 0.0;
  for (int a : support) {
    const Vec2 x = d.center(a);
    for (int b : support) {
      const double g = a == b ? -self_log / kTwoPi - disk_formula::regular(spec, x, x)
                              : disk_formula::green(spec, x, d.center(b));
      acc += g * w[a] * w[b];
    }
  }
  return 0.5 * acc * h * h * h * h;
}

EnergyReport excess_energy(const ScalarField& w, const ScalarField& psi, double mu) {
  EnergyReport r;
  r.E = kinetic_energy(w, psi);
  r.mu = mu;
  const double h = w.dom().h();
  double t = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) t += std::max(psi[c] - mu, 0.0) * w[c];
  r.T = 0.5 * t * h * h;
  r.identity_residual = std::abs(r.E - r.T - 0.5 * r.mu);
  return r;
}

TopCells top_cells(const ScalarField& psi, std::size_t k, const std::vector<char>& admissible) {
  std::vector<int> order;
  order.reserve(psi.size());
  for (std::size_t c = 0; c < psi.size(); ++c)
    if (admissible.empty() || admissible[c]) order.push_back(static_cast<int>(c));
  if (k == 0 || k > order.size()) throw InputError("target cell count exceeds the admissible cells");
  auto before = [&](int a, int b) { return psi[a] > psi[b] || (psi[a] == psi[b] && a < b); };
  const std::size_t head = std::min(k + 1, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(head), order.end(), before);
  TopCells out;
  out.cells.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  out.threshold = psi[order[k - 1]];
  out.next_value = k < order.size() ? psi[order[k]] : out.threshold;
  for (std::size_t m = k; m < order.size(); ++m)
    if (psi[order[m]] == out.threshold) ++out.ties;
  std::sort(out.cells.begin(), out.cells.end());
  return out;
}

Reprojection reproject_isovortical(const PoissonSolver& solver, const ScalarField& w, double lambda,
                                   std::size_t target_cells, const std::vector<char>& admissible) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  Reprojection r{Patch{solver.domain(), lambda, {}}, solver.solve(w), 0.0, 0};
  auto top = top_cells(r.psi, target_cells, admissible);
  r.patch.cells = std::move(top.cells);
  r.nu = top.threshold;
  r.ties = top.ties;
  return r;
}

namespace {

double bump1(double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

}  // namespace

ScalarField bump_field(const DomainPtr& dom, Vec2 c, double r) {
  ScalarField f(dom);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const Vec2 p = dom->center(static_cast<int>(k)) - c;
    f[k] = bump1(p.x / r) * bump1(p.y / r);
  }
  return f;
}

std::vector<ScalarField> default_test_battery(const DomainPtr& dom, int margin_cells) {
  const auto& box = dom->spec().box();
  const Vec2 mid{0.5 * (box.x0 + box.x1), 0.5 * (box.y0 + box.y1)};
  const double s = std::min(box.width(), box.height()) / 8.0;
  // Neighboring supports overlap, so every interior point sees a bump with
  // a nonzero gradient; with half-width s they would tile the box and leave
  // flat seams through the center.
  const double r = 1.4 * s;
  std::vector<ScalarField> out;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      const Vec2 c = mid + Vec2{(a - 1.5) * s, (b - 1.5) * s};
      ScalarField f = bump_field(dom, c, r);
      bool near_boundary = false;
      for (std::size_t k = 0; k < f.size() && !near_boundary; ++k)
        near_boundary = f[k] != 0.0 && dom->depth(static_cast<int>(k)) <= margin_cells;
      if (!near_boundary) out.push_back(std::move(f));
    }
  }
  return out;
}

void central_gradient(const ScalarField& f, std::vector<Vec2>& out) {
  const auto& d = f.dom();
  const double inv2h = 0.5 / d.h();
  out.assign(f.size(), Vec2{});
  auto at = [&](int i, int j) {
    const int c = d.cell_of_grid(d.grid_index(i, j));
    return c < 0 ? 0.0 : f[c];
  };
  for (std::size_t c = 0; c < f.size(); ++c) {
    const int g = d.grid_of(static_cast<int>(c));
    const int i = d.grid_i(g), j = d.grid_j(g);
    out[c] = {(at(i + 1, j) - at(i - 1, j)) * inv2h, (at(i, j + 1) - at(i, j - 1)) * inv2h};
  }
}

double steadiness_residual(const ScalarField& w, const ScalarField& psi, const std::vector<ScalarField>& battery) {
  if (w.domain() != psi.domain()) throw InputError("fields live on different domains");
  const double h2 = w.dom().h() * w.dom().h();
  std::vector<Vec2> gpsi, gxi;
  central_gradient(psi, gpsi);
  double psi_norm = 0.0;
  for (const Vec2& v : gpsi) psi_norm += norm2(v);
  psi_norm = std::sqrt(psi_norm * h2);
  double wmax = 0.0;
  for (double v : w.values()) wmax = std::max(wmax, std::abs(v));
  double worst = 0.0;
  for (const auto& xi : battery) {
    if (xi.domain() != w.domain()) throw InputError("test field lives on a different domain");
    central_gradient(xi, gxi);
    double acc = 0.0, xi_norm = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) {
      acc += w[c] * cross(gxi[c], gpsi[c]);
      xi_norm += norm2(gxi[c]);
    }
    xi_norm = std::sqrt(xi_norm * h2);
    const double scale = wmax * xi_norm * psi_norm;
    if (scale > 0.0) worst = std::max(worst, std::abs(acc * h2) / scale);
  }
  return worst;
}

double steadiness_residual(const PoissonSolver& solver, const ScalarField& w,
                           const std::vector<ScalarField>& battery) {
  return steadiness_residual(w, solver.solve(w), battery);
}

}  // namespace vortexlab
