#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vortexlab/euler.hpp"
#include "vortexlab/steady.hpp"

namespace vortexlab {

// Area-preserving rearrangement of a field, either by the time-`amplitude`
// flow of u = J grad(xi) or by a rigid translation.
struct PerturbationSpec {
  enum class Kind { FlowMap, Translation };

  Kind kind = Kind::FlowMap;
  ScalarField xi;
  double amplitude = 0.0;
  Vec2 offset{};
  std::uint64_t seed = 0;
};

struct Perturbed {
  ScalarField w;
  double distribution_drift = 0.0;  // relative change of |{w > max/2}|
};

// w o Phi: every cell center is carried along the flow (RK4, 8 substeps) and
// w is sampled bilinearly at the end point. Cell-aligned translations shift
// whole cells and are exactly isovortical. Throws NumericalError when the
// support would leave the domain.
Perturbed perturb_isovortical(const ScalarField& w, const PerturbationSpec& spec);

// Sum of three smooth bumps of radius 2 eps with random signs, centered at
// distance [eps/2, 3eps/2) from `center`, zeroed within 4 cells of the boundary.
ScalarField random_xi(const DomainPtr& dom, Vec2 center, double eps, std::mt19937_64& rng);

// Amplitude t with |perturb(w, t xi) - w|_1 within `rel_tol` of delta,
// by doubling then bisection. Throws NumericalError if delta is unreachable.
struct Calibration {
  double amplitude = 0.0;
  double delta_in = 0.0;
  Perturbed result;
};
Calibration calibrate_flow_map(const ScalarField& w, const ScalarField& xi, double delta, double rel_tol = 0.05);

// Largest distance from the marching-squares crossings of {w = level} to the
// reference patch boundary (midpoints of patch/non-patch cell edges).
double boundary_neighborhood(const ScalarField& w, const Patch& reference, double level);

struct StabilityRecord {
  double lambda = 0.0;
  double delta = 0.0;  // requested
  double delta_in = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  double amplitude = 0.0;
  double sup_drift = 0.0;
  double end_drift = 0.0;
  double drift_slope = 0.0;  // least squares over the final third
  double drift_slope_stderr = 0.0;
  double boundary_delta = 0.0;
  double distribution_drift = 0.0;
  std::vector<double> times;
  std::vector<double> drift;
  // Drift minus the unperturbed drift at the same time; set by subtract_budget.
  std::vector<double> excess;
  double excess_sup = 0.0;
  double excess_slope = 0.0;
  double excess_slope_stderr = 0.0;
  std::string error;  // nonempty when the trial was skipped

  bool ok() const { return error.empty(); }
  // Slope not significantly positive: slope - 2 stderr <= 0.
  bool plateaued() const { return drift_slope - 2.0 * drift_slope_stderr <= 0.0; }
  bool excess_plateaued() const { return excess_slope - 2.0 * excess_slope_stderr <= 0.0; }
};

struct StabilityOptions {
  double horizon = 10.0;
  int trials = 5;
  std::uint64_t seed = 1;
  SolverConfig solver{};
};

// Evolves the steady patch unperturbed; its drift is the scheme's diffusion budget.
StabilityRecord diffusion_budget(const PoissonSolver& solver, const SteadyPatch& steady, const StabilityOptions& opts);

// Fills the excess fields of `rec`, interpolating the budget series linearly in time.
void subtract_budget(StabilityRecord& rec, const StabilityRecord& budget);

// One record per (delta, trial). Trial t draws xi from trial_rng(seed, t), so
// the same seeds give the same perturbation shapes across deltas.
std::vector<StabilityRecord> stability_experiment(const PoissonSolver& solver, const SteadyPatch& steady,
                                                  const std::vector<double>& deltas, const StabilityOptions& opts);

}  // namespace vortexlab
