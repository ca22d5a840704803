#include "vortexlab/euler.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vortexlab/energy.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/kernels.hpp"

namespace vortexlab {

double VelocityField::max_speed() const {
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) m = std::max(m, std::hypot(u[k], v[k]));
  return m;
}

VelocityField velocity_from_stream(const ScalarField& psi) {
  const auto& dom = psi.domain();
  const auto& d = *dom;
  const double h = d.h();
  // Distance fraction to the boundary along each cut link; 1 elsewhere.
  std::vector<std::array<double, 4>> frac(d.cell_count(), {1.0, 1.0, 1.0, 1.0});
  for (const auto& cut : d.cuts()) frac[cut.cell][cut.dir] = cut.theta;

  VelocityField out{ScalarField(dom), ScalarField(dom)};
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const int g = d.grid_of(static_cast<int>(c));
    const int i = d.grid_i(g), j = d.grid_j(g);
    auto derivative = [&](int plus, int minus) {
      const int cp = d.cell_of_grid(d.grid_index(i + kDi[plus], j + kDj[plus]));
      const int cm = d.cell_of_grid(d.grid_index(i + kDi[minus], j + kDj[minus]));
      const double a = frac[c][minus] * h, b = frac[c][plus] * h;
      const double fp = cp >= 0 ? psi[cp] : 0.0;
      const double fm = cm >= 0 ? psi[cm] : 0.0;
      const double f0 = psi[c];
      if (cp >= 0 && cm >= 0) return (fp - fm) / (2 * h);
      return (a * a * fp - b * b * fm - (a * a - b * b) * f0) / (a * b * (a + b));
    };
    const double dx = derivative(kEast, kWest);
    const double dy = derivative(kNorth, kSouth);
    out.u[c] = dy;
    out.v[c] = -dx;
  }
  return out;
}

VelocityField velocity_from_vorticity(const PoissonSolver& solver, const ScalarField& w, ScalarField* psi_out) {
  ScalarField psi = solver.solve(w);
  auto vel = velocity_from_stream(psi);
  if (psi_out) *psi_out = std::move(psi);
  return vel;
}

EvolutionState make_state(const PoissonSolver& solver, ScalarField w0, double t0) {
  if (w0.domain() != solver.domain()) throw InputError("vorticity lives on a different domain than the solver");
  EvolutionState s;
  s.w = std::move(w0);
  s.t = t0;
  s.vel = velocity_from_vorticity(solver, s.w, &s.psi);
  return s;
}

double choose_dt(const EvolutionState& state, const SolverConfig& config, double limit) {
  if (!(config.dt_max > 0.0)) throw InputError("dt-max must be positive");
  if (!(config.cfl > 0.0 && config.cfl <= 0.5)) throw InputError("cfl must lie in (0, 0.5]");
  double dt = config.dt_max;
  const double speed = state.vel.max_speed();
  if (speed > 0.0) dt = std::min(dt, config.cfl * state.w.dom().h() / speed);
  if (limit >= 0.0) dt = std::min(dt, limit);
  return dt;
}

namespace {

void restore_circulation(std::span<const double> before, std::span<double> after) {
  double lo = 0.0, hi = 0.0;
  for (double v : before) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double target = kernels::sum(before);
  std::vector<double> weight(after.size());
  for (int pass = 0; pass < 8; ++pass) {
    const double deficit = target - kernels::sum(after);
    if (std::abs(deficit) <= 1e-14 * std::max(1.0, std::abs(target))) return;
    double wsum = 0.0;
    for (std::size_t k = 0; k < after.size(); ++k) {
      weight[k] = std::max(0.0, (after[k] - lo) * (hi - after[k]));
      wsum += weight[k];
    }
    if (!(wsum > 0.0)) return;
    const double scale = deficit / wsum;
    for (std::size_t k = 0; k < after.size(); ++k)
      after[k] = std::clamp(after[k] + scale * weight[k], lo, hi);
  }
}

}  // namespace

void step(const PoissonSolver& solver, EvolutionState& state, const SolverConfig& config, double dt) {
  const auto& d = state.w.dom();
  const std::size_t n = d.grid_size();
  const double inv_h = 1.0 / d.h();
  std::vector<double> omega = state.w.to_grid();
  std::vector<double> u(n), v(n);
  std::vector<int> nearest(n);
  const auto near = d.nearest_cell();
  // Velocity is extended outside the domain by the nearest domain cell, so
  // the midpoint lookup never reads an undefined value.
  for (std::size_t g = 0; g < n; ++g) {
    const int c = near[g];
    nearest[g] = d.grid_of(c);
    u[g] = state.vel.u[c] * inv_h;
    v[g] = state.vel.v[c] * inv_h;
  }
  kernels::AdvectionView view;
  view.nx = d.nx();
  view.ny = d.ny();
  view.omega = omega.data();
  view.u = u.data();
  view.v = v.data();
  view.nearest = nearest.data();
  view.cells = d.cells().data();
  view.count = d.cell_count();
  view.dt = dt;
  view.interp = config.interpolation;
  view.backtrack_iterations = config.backtrack_iterations;
  std::vector<double> next(d.cell_count());
  kernels::advect(view, next);
  if (config.conserve_circulation) restore_circulation(state.w.values(), next);
  state.w = ScalarField(state.w.domain(), std::move(next));
  state.t += dt;
  state.vel = velocity_from_vorticity(solver, state.w, &state.psi);
}

void step(const PoissonSolver& solver, EvolutionState& state, const SolverConfig& config) {
  step(solver, state, config, choose_dt(state, config));
}

DiagnosticRow diagnose(const EvolutionState& state, const ScalarField& w0, double lambda) {
  DiagnosticRow r;
  r.t = state.t;
  r.E = kinetic_energy(state.w, state.psi);
  r.l1_drift = l1_distance(state.w, w0);
  r.circulation = total(state.w);
  r.centroid = r.circulation != 0.0 ? centroid(state.w) : Vec2{};
  r.diam = support_diameter(state.w);
  const double levels[3] = {0.25 * lambda, 0.5 * lambda, 0.75 * lambda};
  const auto df = distribution(state.w, levels);
  for (int k = 0; k < 3; ++k) r.dist[k] = df.measures[k];
  return r;
}

ExperimentRecord evolve(const PoissonSolver& solver, const ScalarField& w0, double horizon,
                        const SolverConfig& config, double lambda,
                        const std::function<void(const EvolutionState&, int)>& observer) {
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  if (config.diagnostic_stride < 1) throw InputError("diagnostic stride must be positive");
  if (config.backtrack_iterations < 1) throw InputError("backtrack iterations must be positive");
  ExperimentRecord rec;
  if (lambda <= 0.0) {
    for (double v : w0.values()) lambda = std::max(lambda, v);
  }
  rec.lambda = lambda;
  EvolutionState state = make_state(solver, w0, 0.0);
  rec.rows.push_back(diagnose(state, w0, lambda));
  int steps = 0;
  // Relative slack so round-off in t never produces a sliver step.
  const double eps_t = 1e-12 * horizon;
  while (state.t < horizon - eps_t) {
    double dt = choose_dt(state, config, horizon - state.t);
    if (horizon - (state.t + dt) <= eps_t) dt = horizon - state.t;
    step(solver, state, config, dt);
    rec.dts.push_back(dt);
    ++steps;
    if (observer) observer(state, steps);
    if (steps % config.diagnostic_stride == 0 || state.t >= horizon - eps_t) rec.rows.push_back(diagnose(state, w0, lambda));
  }
  rec.final_state = std::move(state);
  return rec;
}

}  // namespace vortexlab
