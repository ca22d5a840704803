#include "vortexlab/steady.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

#include "vortexlab/error.hpp"
#include "vortexlab/parallel.hpp"
#include "vortexlab/random.hpp"

namespace vortexlab {

std::string ConstraintClass::describe() const {
  std::ostringstream os;
  if (kind == Kind::Global) {
    os << "global";
  } else {
    os << "local(" << center.x << "," << center.y << ";" << radius << ")";
  }
  return os.str();
}

std::vector<char> admissible_cells(const DiscreteDomain& dom, const ConstraintClass& cls) {
  std::vector<char> adm(dom.cell_count(), 1);
  if (cls.kind == ConstraintClass::Kind::Global) return adm;
  if (!(cls.radius > 0.0)) throw InputError("local constraint radius must be positive");
  constexpr int kRing = 256;
  for (int k = 0; k < kRing; ++k) {
    const double a = kTwoPi * k / kRing;
    if (!dom.spec().inside(cls.center + cls.radius * Vec2{std::cos(a), std::sin(a)}))
      throw InputError("local constraint ball is not contained in the domain");
  }
  const double r2 = cls.radius * cls.radius;
  for (std::size_t c = 0; c < adm.size(); ++c)
    adm[c] = norm2(dom.center(static_cast<int>(c)) - cls.center) < r2 ? 1 : 0;
  return adm;
}

namespace {

std::uint64_t hash_cells(const std::vector<int>& cells) {
  std::uint64_t h = 1469598103934665603ull;
  for (int c : cells) {
    h ^= static_cast<std::uint32_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::size_t symmetric_difference(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return a.size() + b.size() - 2 * common;
}

// Shift every cell by (di, dj); empty if any lands outside the admissible set.
std::vector<int> translate_cells(const DiscreteDomain& d, const std::vector<int>& cells, int di, int dj,
                                 const std::vector<char>& adm) {
  std::vector<int> out;
  out.reserve(cells.size());
  for (int c : cells) {
    const int g = d.grid_of(c);
    const int i = d.grid_i(g) + di, j = d.grid_j(g) + dj;
    if (i < 0 || j < 0 || i >= d.nx() || j >= d.ny()) return {};
    const int m = d.cell_of_grid(d.grid_index(i, j));
    if (m < 0 || !adm[m]) return {};
    out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The k cells of `pool` nearest to c, ties broken by index, sorted.
std::vector<int> nearest_cells(const DiscreteDomain& d, std::vector<int> pool, std::size_t k, Vec2 c) {
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(), [&](int a, int b) {
    const double da = norm2(d.center(a) - c), db = norm2(d.center(b) - c);
    return da < db || (da == db && a < b);
  });
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

double core_level(const ScalarField& psi, std::size_t k, const std::vector<char>& admissible) {
  std::vector<double> v;
  v.reserve(psi.size());
  for (std::size_t c = 0; c < psi.size(); ++c)
    if (admissible.empty() || admissible[c]) v.push_back(psi[c]);
  if (k == 0 || k > v.size()) throw InputError("core size exceeds the admissible cells");
  const auto w = std::max<std::size_t>(2, (k + 3) / 4);
  const std::size_t lo = k > w ? k - w : 1;
  const std::size_t hi = std::min(k + w, v.size());
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(hi), v.end(), std::greater<>());
  double sn = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t n = lo; n <= hi; ++n) {
    const double x = static_cast<double>(n) - static_cast<double>(k), y = v[n - 1];
    sn += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = sn * sxx - sx * sx;
  if (!(den > 0.0)) return v[k - 1];
  const double b = (sn * sxy - sx * sy) / den;
  const double a = (sy - b * sx) / sn;
  return a + 0.5 * b;
}

SteadyPatch construct(const PoissonSolver& solver, double lambda, const ConstraintClass& cls, Vec2 init_center,
                      const SteadyOptions& options) {
  const auto& dom = solver.domain();
  const auto& d = *dom;
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  if (!(lambda * d.area() > 1.0)) throw InputError("lambda*|D| must exceed 1 for the constraint class to be non-empty");
  if (options.max_iterations < 1) throw InputError("max-iter must be positive");
  const double h2 = d.h() * d.h();
  const auto k_cells = static_cast<std::size_t>(std::llround(1.0 / (lambda * h2)));
  if (k_cells < 4) {
    std::ostringstream os;
    os << "lambda too large for resolution (K = " << k_cells << " < 4)";
    throw InputError(os.str());
  }
  const auto adm = admissible_cells(d, cls);
  std::vector<int> pool;
  for (std::size_t c = 0; c < adm.size(); ++c)
    if (adm[c]) pool.push_back(static_cast<int>(c));
  if (k_cells > pool.size()) throw InputError("constraint class holds fewer than K cells");
  if (cls.kind == ConstraintClass::Kind::Local && !(distance(init_center, cls.center) < cls.radius))
    throw InputError("initial center lies outside the local constraint ball");

  SteadyPatch out;
  out.lambda_nominal = lambda;
  out.K = k_cells;
  const double lam = 1.0 / (static_cast<double>(k_cells) * h2);

  // First iterate: the K admissible cells closest to the initial center.
  std::vector<int> cells = nearest_cells(d, pool, k_cells, init_center);

  struct Seen {
    std::uint64_t hash;
    int iteration;
    std::vector<int> cells;
  };
  std::deque<Seen> window;
  constexpr std::size_t kWindow = 50;

  ScalarField psi;
  TopCells top;
  int it = 0;
  for (;;) {
    const ScalarField w = Patch{dom, lam, cells}.field();
    psi = solver.solve(w);
    const double energy = kinetic_energy(w, psi);
    out.energy_history.push_back(energy);
    top = top_cells(psi, k_cells, adm);

    if (top.cells == cells) {
      if (options.escape_pinning) {
        // Candidates: the eight one-cell translations, and the patch
        // re-rounded about its centroid (and about the cell holding it),
        // which frees shapes that are fixed points only because of the raster.
        std::vector<std::vector<int>> candidates;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di)
            if (di != 0 || dj != 0) candidates.push_back(translate_cells(d, cells, di, dj, adm));
        Vec2 mid{};
        for (int c : cells) mid += d.center(c);
        mid *= 1.0 / static_cast<double>(cells.size());
        candidates.push_back(nearest_cells(d, pool, k_cells, mid));
        if (const auto g = d.locate(mid); g && d.cell_of_grid(*g) >= 0)
          candidates.push_back(nearest_cells(d, pool, k_cells, d.center(d.cell_of_grid(*g))));
        std::vector<int> best;
        double best_energy = energy;
        for (auto& moved : candidates) {
          if (moved.empty() || moved == cells) continue;
          const double e = kinetic_energy(solver, Patch{dom, lam, moved}.field());
          if (e > best_energy) {
            best_energy = e;
            best = std::move(moved);
          }
        }
        if (!best.empty() && best_energy > energy + 1e-12 * std::abs(energy)) {
          cells = std::move(best);
          ++out.escapes;
          ++it;
          window.clear();
          if (it >= options.max_iterations) {
            out.status = "max-iter exceeded";
            break;
          }
          continue;
        }
      }
      out.converged = true;
      out.status = "fixed point";
      break;
    }
    if (it >= options.max_iterations) {
      out.status = "max-iter exceeded";
      break;
    }
    const double change = static_cast<double>(symmetric_difference(top.cells, cells)) * lam * h2;
    if (change < options.tolerance) {
      out.status = "L1 change below tolerance";
      break;
    }
    window.push_back({hash_cells(cells), it, cells});
    if (window.size() > kWindow) window.pop_front();
    cells = std::move(top.cells);
    ++it;
    const std::uint64_t hash = hash_cells(cells);
    const auto hit = std::find_if(window.begin(), window.end(),
                                  [&](const Seen& s) { return s.hash == hash && s.cells == cells; });
    if (hit != window.end()) {
      out.cycle_length = it - hit->iteration;
      std::ostringstream os;
      os << "cycle of length " << out.cycle_length;
      out.status = os.str();
      // Report the state matching the last recorded energy.
      cells = window.back().cells;
      break;
    }
  }

  out.patch = Patch{dom, lam, cells};
  out.psi = std::move(psi);
  out.mu_kth = top.threshold;
  out.mu = core_level(out.psi, k_cells, adm);
  out.iterations = it;
  if (cls.kind == ConstraintClass::Kind::Local) {
    std::vector<char> in_patch(d.cell_count(), 0);
    for (int c : cells) in_patch[c] = 1;
    for (int c : cells) {
      const int g = d.grid_of(c);
      for (int dir = 0; dir < 4; ++dir) {
        const int m = d.cell_of_grid(d.grid_index(d.grid_i(g) + kDi[dir], d.grid_j(g) + kDj[dir]));
        if (m >= 0 && !adm[m]) out.touches_constraint = true;
      }
    }
  }
  return out;
}

EnergyReport excess_energy(const SteadyPatch& p) { return excess_energy(p.patch.field(), p.psi, p.mu); }

std::vector<SweepRow> asymptotics_sweep(const PoissonSolver& solver, const std::vector<double>& lambdas,
                                        const ConstraintClass& cls, Vec2 init_center, Vec2 target,
                                        const SteadyOptions& options) {
  if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw InputError("lambda list must be increasing");
  std::vector<SweepRow> rows(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.lambda_nominal = lambdas[k];
    try {
      const auto sp = construct(solver, lambdas[k], cls, init_center, options);
      const auto rep = excess_energy(sp);
      row.lambda_effective = sp.patch.lambda;
      row.K = sp.K;
      row.eps = ball_radius(sp.patch.lambda);
      row.diam_over_eps = support_diameter(*sp.patch.dom, sp.patch.cells) / row.eps;
      row.centroid_err = distance(centroid(sp.patch.field()), target);
      row.T = rep.T;
      row.E_plus_logterm = rep.E + std::log(row.eps) / (2.0 * kTwoPi);
      row.mu_plus_logterm = rep.mu + std::log(row.eps) / kTwoPi;
      row.iterations = sp.iterations;
      row.converged = sp.converged;
      if (!sp.converged) row.error = sp.status;
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return rows;
}

ProbeReport uniqueness_probe(const PoissonSolver& solver, double lambda, const ConstraintClass& cls, int n_starts,
                             std::uint64_t seed, const SteadyOptions& options) {
  if (n_starts < 1) throw InputError("n-starts must be at least 1");
  const auto& d = *solver.domain();
  const auto adm = admissible_cells(d, cls);
  std::vector<int> pool;
  for (std::size_t c = 0; c < adm.size(); ++c)
    if (adm[c]) pool.push_back(static_cast<int>(c));
  if (pool.empty()) throw InputError("constraint class has no admissible cells");

  ProbeReport report;
  report.runs.resize(static_cast<std::size_t>(n_starts));
  std::vector<std::optional<SteadyPatch>> results(report.runs.size());
  parallel_for(report.runs.size(), [&](std::size_t k) {
    auto rng = trial_rng(seed, k);
    const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size()));
    ProbeRun& run = report.runs[k];
    run.start = static_cast<int>(k);
    run.init_center = d.center(pool[std::min(pick, pool.size() - 1)]);
    try {
      auto sp = construct(solver, lambda, cls, run.init_center, options);
      run.converged = sp.converged;
      run.energy = sp.energy_history.back();
      if (!sp.converged) run.error = sp.status;
      results[k] = std::move(sp);
    } catch (const Error& e) {
      run.error = e.what();
    }
  });

  std::vector<ScalarField> reps;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k] || !results[k]->converged) continue;
    const ScalarField w = results[k]->patch.field();
    const double h2 = d.h() * d.h();
    const double slack = 4.0 * results[k]->patch.lambda * h2;
    int found = -1;
    for (std::size_t m = 0; m < reps.size() && found < 0; ++m)
      if (l1_distance(reps[m], w) < slack) found = static_cast<int>(m);
    if (found < 0) {
      found = static_cast<int>(reps.size());
      reps.push_back(w);
      report.members.emplace_back();
    }
    report.runs[k].cluster = found;
    report.members[static_cast<std::size_t>(found)].push_back(static_cast<int>(k));
  }
  report.cluster_count = static_cast<int>(reps.size());
  return report;
}

}  // namespace vortexlab
