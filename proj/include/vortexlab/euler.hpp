#pragma once

#include <functional>
#include <vector>

#include "vortexlab/kernels.hpp"
#include "vortexlab/poisson.hpp"

namespace vortexlab {

struct VelocityField {
  ScalarField u;  // x component
  ScalarField v;  // y component
  double max_speed() const;
};

// u = J grad psi = (d2 psi, -d1 psi) by central differences. Next to the
// boundary the difference uses the Dirichlet value psi = 0 at the crossing
// point (three-point formula on the uneven spacing).
VelocityField velocity_from_stream(const ScalarField& psi);
VelocityField velocity_from_vorticity(const PoissonSolver& solver, const ScalarField& w,
                                      ScalarField* psi_out = nullptr);

struct SolverConfig {
  double dt_max = 0.05;
  double cfl = 0.5;
  int diagnostic_stride = 10;  // steps between diagnostic rows
  kernels::Interpolation interpolation = kernels::Interpolation::CubicClamped;
  // Fixed-point sweeps of the midpoint backtrack; 1 is the explicit rule.
  int backtrack_iterations = 2;
  // Restore the pre-step circulation after each gather, adding the
  // deficit in proportion to (w - lo)(hi - w) so values at the range
  // bounds, plateaus and empty regions are left alone.
  bool conserve_circulation = true;
};

struct EvolutionState {
  ScalarField w;
  double t = 0.0;
  ScalarField psi;
  VelocityField vel;
};

EvolutionState make_state(const PoissonSolver& solver, ScalarField w0, double t0 = 0.0);

// Time step actually used: min(dt_max, cfl h / max|u|), and no further than
// `limit` if given.
double choose_dt(const EvolutionState& state, const SolverConfig& config, double limit = -1.0);

// One semi-Lagrangian step of length dt; psi and u are refreshed afterwards.
void step(const PoissonSolver& solver, EvolutionState& state, const SolverConfig& config, double dt);
// Step with the CFL-limited dt.
void step(const PoissonSolver& solver, EvolutionState& state, const SolverConfig& config);

struct DiagnosticRow {
  double t = 0.0;
  double E = 0.0;
  double l1_drift = 0.0;
  Vec2 centroid{};
  double diam = 0.0;
  double dist[3] = {0.0, 0.0, 0.0};  // |{w > q lambda}| for q = 1/4, 1/2, 3/4
  double circulation = 0.0;
};

struct ExperimentRecord {
  double lambda = 0.0;  // level scale for the distribution columns
  std::vector<DiagnosticRow> rows;
  std::vector<double> dts;
  EvolutionState final_state;
};

DiagnosticRow diagnose(const EvolutionState& state, const ScalarField& w0, double lambda);

// Runs to t = horizon (the last step is shortened to land on it). lambda
// sets the distribution levels; 0 means max(w0). `observer`, if set, sees
// the state after every step.
ExperimentRecord evolve(const PoissonSolver& solver, const ScalarField& w0, double horizon,
                        const SolverConfig& config, double lambda = 0.0,
                        const std::function<void(const EvolutionState&, int)>& observer = {});

}  // namespace vortexlab
