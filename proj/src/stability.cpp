#include "vortexlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vortexlab/energy.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/parallel.hpp"
#include "vortexlab/random.hpp"

namespace vortexlab {

namespace {

double max_value(const ScalarField& w) {
  double m = 0.0;
  for (double v : w.values()) m = std::max(m, v);
  return m;
}

double measure_above(const ScalarField& w, double level) {
  const double lv[1] = {level};
  return distribution(w, lv).measures[0];
}

double relative_change(double now, double before) {
  return before > 0.0 ? std::abs(now - before) / before : 0.0;
}

// Mass lost or gained by more than this fraction means the map pushed
// support across the boundary.
constexpr double kMassTolerance = 0.02;

void check_mass(const ScalarField& in, const ScalarField& out) {
  double ref = 0.0;
  for (double v : in.values()) ref += std::abs(v);
  if (std::abs(total(out) - total(in)) > kMassTolerance * ref * in.dom().h() * in.dom().h())
    throw NumericalError("perturbation pushes the support out of the domain");
}

Perturbed finish(const ScalarField& in, ScalarField out) {
  check_mass(in, out);
  const double half = 0.5 * max_value(in);
  Perturbed p;
  if (half > 0.0) p.distribution_drift = relative_change(measure_above(out, half), measure_above(in, half));
  p.w = std::move(out);
  return p;
}

Perturbed translate(const ScalarField& w, Vec2 offset) {
  const auto& d = w.dom();
  const double si = offset.x / d.h(), sj = offset.y / d.h();
  const double ri = std::round(si), rj = std::round(sj);
  ScalarField out(w.domain());
  if (std::abs(si - ri) < 1e-9 && std::abs(sj - rj) < 1e-9) {
    const int di = static_cast<int>(ri), dj = static_cast<int>(rj);
    for (std::size_t c = 0; c < w.size(); ++c) {
      if (w[c] == 0.0) continue;
      const int g = d.grid_of(static_cast<int>(c));
      const int i = d.grid_i(g) + di, j = d.grid_j(g) + dj;
      const int target = (i < 0 || j < 0 || i >= d.nx() || j >= d.ny()) ? -1 : d.cell_of_grid(d.grid_index(i, j));
      if (target < 0) throw NumericalError("translation pushes the support out of the domain");
      out[target] = w[c];
    }
    return finish(w, std::move(out));
  }
  for (std::size_t c = 0; c < w.size(); ++c) out[c] = w.sample(d.center(static_cast<int>(c)) - offset);
  return finish(w, std::move(out));
}

Perturbed flow_map(const ScalarField& w, const ScalarField& xi, double t) {
  if (xi.domain() != w.domain()) throw InputError("xi lives on a different domain");
  const auto& d = w.dom();
  if (t == 0.0) return finish(w, w);
  std::vector<Vec2> grad;
  central_gradient(xi, grad);
  ScalarField ux(w.domain()), uy(w.domain());
  for (std::size_t c = 0; c < grad.size(); ++c) {
    const Vec2 u = rotate_cw(grad[c]);
    ux[c] = u.x;
    uy[c] = u.y;
  }
  auto vel = [&](Vec2 p) { return Vec2{ux.sample(p), uy.sample(p)}; };
  constexpr int kSubsteps = 8;
  const double dt = t / kSubsteps;
  ScalarField out(w.domain());
  bool escaped = false;
  for (std::size_t c = 0; c < w.size(); ++c) {
    Vec2 p = d.center(static_cast<int>(c));
    for (int s = 0; s < kSubsteps; ++s) {
      const Vec2 k1 = vel(p);
      const Vec2 k2 = vel(p + 0.5 * dt * k1);
      const Vec2 k3 = vel(p + 0.5 * dt * k2);
      const Vec2 k4 = vel(p + dt * k3);
      p += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!d.spec().inside(p)) {
      escaped = true;
      continue;
    }
    out[c] = w.sample(p);
  }
  if (escaped) throw NumericalError("flow map carries points out of the domain");
  return finish(w, std::move(out));
}

struct Fit {
  double slope = 0.0;
  double stderr_ = 0.0;
};

Fit final_third_slope(const std::vector<double>& t, const std::vector<double>& y, double horizon) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= horizon * (2.0 / 3.0) - 1e-12 * horizon) {
      xs.push_back(t[k]);
      ys.push_back(y[k]);
    }
  }
  Fit f;
  const std::size_t n = xs.size();
  if (n < 2) return f;
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = ys[k] - (my + f.slope * (xs[k] - mx));
      sse += r * r;
    }
    f.stderr_ = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

// Evolves w0 and fills the drift series and summary statistics of `rec`.
void run_trial(const PoissonSolver& solver, const SteadyPatch& steady, const ScalarField& w0,
               const StabilityOptions& opts, StabilityRecord& rec) {
  const ScalarField ref = steady.patch.field();
  const double lambda = steady.patch.lambda;
  const double levels[3] = {0.25 * lambda, 0.5 * lambda, 0.75 * lambda};
  const auto initial = distribution(w0, levels);

  auto sample = [&](const ScalarField& w, double t) {
    rec.times.push_back(t);
    rec.drift.push_back(l1_distance(w, ref));
    const auto dist = distribution(w, levels);
    for (int q = 0; q < 3; ++q)
      rec.distribution_drift = std::max(rec.distribution_drift, relative_change(dist.measures[q], initial.measures[q]));
    double bd = std::numeric_limits<double>::infinity();
    try {
      bd = boundary_neighborhood(w, steady.patch, levels[1]);
    } catch (const Error&) {
      // The level set vanished: the core smeared below lambda/2.
    }
    rec.boundary_delta = std::max(rec.boundary_delta, bd);
  };

  sample(w0, 0.0);
  const int stride = opts.solver.diagnostic_stride;
  const auto result = evolve(solver, w0, opts.horizon, opts.solver, lambda, [&](const EvolutionState& s, int k) {
    if (k % stride == 0) sample(s.w, s.t);
  });
  if (rec.times.back() < result.final_state.t) sample(result.final_state.w, result.final_state.t);

  rec.sup_drift = *std::max_element(rec.drift.begin(), rec.drift.end());
  rec.end_drift = rec.drift.back();
  const Fit fit = final_third_slope(rec.times, rec.drift, opts.horizon);
  rec.drift_slope = fit.slope;
  rec.drift_slope_stderr = fit.stderr_;
}

void check_inputs(const SteadyPatch& steady, const StabilityOptions& opts) {
  if (!steady.converged) throw InputError("stability experiments need a converged steady patch");
  if (!(opts.horizon > 0.0)) throw InputError("horizon must be positive");
  if (opts.trials < 1) throw InputError("trials must be positive");
}

}  // namespace

Perturbed perturb_isovortical(const ScalarField& w, const PerturbationSpec& spec) {
  if (spec.kind == PerturbationSpec::Kind::Translation) return translate(w, spec.offset);
  return flow_map(w, spec.xi, spec.amplitude);
}

ScalarField random_xi(const DomainPtr& dom, Vec2 center, double eps, std::mt19937_64& rng) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  ScalarField xi(dom);
  for (int b = 0; b < 3; ++b) {
    const double r = eps * (0.5 + uniform01(rng));
    const double a = kTwoPi * uniform01(rng);
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    ScalarField bump = bump_field(dom, center + r * Vec2{std::cos(a), std::sin(a)}, 2.0 * eps);
    bump *= sign;
    xi += bump;
  }
  for (std::size_t c = 0; c < xi.size(); ++c)
    if (dom->depth(static_cast<int>(c)) <= 4) xi[c] = 0.0;
  return xi;
}

Calibration calibrate_flow_map(const ScalarField& w, const ScalarField& xi, double delta, double rel_tol) {
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  if (!(rel_tol > 0.0)) throw InputError("calibration tolerance must be positive");
  std::vector<Vec2> grad;
  central_gradient(xi, grad);
  double gmax = 0.0;
  for (const Vec2& g : grad) gmax = std::max(gmax, norm(g));
  if (!(gmax > 0.0)) throw NumericalError("xi is constant; delta is unreachable");

  auto at = [&](double t) {
    Calibration c;
    c.amplitude = t;
    c.result = flow_map(w, xi, t);
    c.delta_in = l1_distance(c.result.w, w);
    return c;
  };
  auto close = [&](const Calibration& c) { return std::abs(c.delta_in - delta) <= rel_tol * delta; };

  // Start from a map that moves points by about a tenth of a cell.
  Calibration lo{0.0, 0.0, {w, 0.0}};
  Calibration hi = at(0.1 * w.dom().h() / gmax);
  try {
    for (int k = 0; k < 40 && hi.delta_in < delta; ++k) {
      if (close(hi)) return hi;
      lo = hi;
      hi = at(2.0 * hi.amplitude);
    }
  } catch (const NumericalError&) {
  }
  if (close(hi)) return hi;
  if (hi.delta_in < delta) {
    std::ostringstream os;
    os << "delta " << delta << " is unreachable by this perturbation (reached " << std::max(lo.delta_in, hi.delta_in)
       << ")";
    throw NumericalError(os.str());
  }
  for (int k = 0; k < 60; ++k) {
    Calibration mid = at(0.5 * (lo.amplitude + hi.amplitude));
    if (close(mid)) return mid;
    (mid.delta_in < delta ? lo : hi) = std::move(mid);
  }
  std::ostringstream os;
  os << "calibration for delta " << delta << " did not converge";
  throw NumericalError(os.str());
}

double boundary_neighborhood(const ScalarField& w, const Patch& reference, double level) {
  if (reference.cells.empty()) throw InputError("reference patch is empty");
  if (w.domain() != reference.dom) throw InputError("field and patch live on different domains");
  const auto& d = w.dom();
  const int nx = d.nx(), ny = d.ny();
  std::vector<char> in_patch(d.grid_size(), 0);
  for (int c : reference.cells) in_patch[d.grid_of(c)] = 1;
  const auto grid = w.to_grid();

  std::vector<Vec2> edges, crossings;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int g = d.grid_index(i, j);
      const Vec2 p = d.grid_center(i, j);
      for (int dir = 0; dir < 2; ++dir) {
        const int i2 = i + (dir == 0), j2 = j + (dir == 1);
        if (i2 >= nx || j2 >= ny) continue;
        const int g2 = d.grid_index(i2, j2);
        const Vec2 q = d.grid_center(i2, j2);
        if (in_patch[g] != in_patch[g2]) edges.push_back(0.5 * (p + q));
        const double a = grid[g] - level, b = grid[g2] - level;
        if ((a >= 0.0) != (b >= 0.0)) crossings.push_back(p + (a / (a - b)) * (q - p));
      }
    }
  }
  if (crossings.empty()) throw NumericalError("level set is empty");
  double worst = 0.0;
  for (const Vec2& x : crossings) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& e : edges) best = std::min(best, norm2(x - e));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

StabilityRecord diffusion_budget(const PoissonSolver& solver, const SteadyPatch& steady, const StabilityOptions& opts) {
  check_inputs(steady, opts);
  StabilityRecord rec;
  rec.lambda = steady.patch.lambda;
  rec.horizon = opts.horizon;
  rec.seed = opts.seed;
  run_trial(solver, steady, steady.patch.field(), opts, rec);
  return rec;
}

void subtract_budget(StabilityRecord& rec, const StabilityRecord& budget) {
  if (!rec.ok()) return;
  if (budget.times.empty()) throw InputError("budget record has no samples");
  rec.excess.resize(rec.drift.size());
  for (std::size_t k = 0; k < rec.drift.size(); ++k) {
    const double t = rec.times[k];
    const auto it = std::lower_bound(budget.times.begin(), budget.times.end(), t);
    double b;
    if (it == budget.times.begin()) {
      b = budget.drift.front();
    } else if (it == budget.times.end()) {
      b = budget.drift.back();
    } else {
      const auto j = static_cast<std::size_t>(it - budget.times.begin());
      const double t0 = budget.times[j - 1], t1 = budget.times[j];
      const double a = t1 > t0 ? (t - t0) / (t1 - t0) : 1.0;
      b = (1.0 - a) * budget.drift[j - 1] + a * budget.drift[j];
    }
    rec.excess[k] = rec.drift[k] - b;
  }
  rec.excess_sup = *std::max_element(rec.excess.begin(), rec.excess.end());
  const Fit fit = final_third_slope(rec.times, rec.excess, rec.horizon);
  rec.excess_slope = fit.slope;
  rec.excess_slope_stderr = fit.stderr_;
}

std::vector<StabilityRecord> stability_experiment(const PoissonSolver& solver, const SteadyPatch& steady,
                                                  const std::vector<double>& deltas, const StabilityOptions& opts) {
  check_inputs(steady, opts);
  const ScalarField w = steady.patch.field();
  const Vec2 center = centroid(w);
  const double eps = ball_radius(steady.patch.lambda);
  const auto trials = static_cast<std::size_t>(opts.trials);
  std::vector<StabilityRecord> out(deltas.size() * trials);
  parallel_for(out.size(), [&](std::size_t k) {
    StabilityRecord& rec = out[k];
    rec.lambda = steady.patch.lambda;
    rec.delta = deltas[k / trials];
    rec.trial = static_cast<int>(k % trials);
    rec.seed = opts.seed;
    rec.horizon = opts.horizon;
    try {
      auto rng = trial_rng(opts.seed, static_cast<std::uint64_t>(rec.trial));
      const ScalarField xi = random_xi(w.domain(), center, eps, rng);
      ScalarField w0 = w;
      if (rec.delta > 0.0) {
        Calibration cal = calibrate_flow_map(w, xi, rec.delta);
        rec.amplitude = cal.amplitude;
        rec.delta_in = cal.delta_in;
        w0 = std::move(cal.result.w);
      }
      run_trial(solver, steady, w0, opts, rec);
    } catch (const Error& e) {
      rec.error = e.what();
    }
  });
  return out;
}

}  // namespace vortexlab
