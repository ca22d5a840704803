#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/energy.hpp"

namespace vortexlab {

struct ConstraintClass {
  enum class Kind { Global, Local };
  Kind kind = Kind::Global;
  Vec2 center{};       // local only
  double radius = 0.0; // local only

  static ConstraintClass global() { return {}; }
  static ConstraintClass local(Vec2 c, double r) { return {Kind::Local, c, r}; }
  std::string describe() const;
};

struct SteadyOptions {
  double tolerance = 0.0;  // stop when the L1 change of an update falls below this
  int max_iterations = 500;
  // At a cell-set fixed point, try one-cell translations of the patch and
  // the K cells nearest its centroid, and continue from any candidate that
  // strictly raises the energy.
  bool escape_pinning = true;
};

struct SteadyPatch {
  Patch patch;             // lambda is the effective strength 1/(K h^2)
  ScalarField psi;
  double mu = 0.0;         // core level, see core_level()
  double mu_kth = 0.0;     // K-th largest admissible psi
  double lambda_nominal = 0.0;
  std::size_t K = 0;
  int iterations = 0;
  std::vector<double> energy_history;
  bool converged = false;
  int cycle_length = 0;    // > 1 when the iteration entered a cycle
  int escapes = 0;         // accepted translation moves
  bool touches_constraint = false;  // local class: core adjacent to the ball edge
  std::string status;
};

// Builds the admissible-cell mask; throws if a local ball is not inside D.
std::vector<char> admissible_cells(const DiscreteDomain& dom, const ConstraintClass& cls);

// Level of the core boundary {psi = mu} for a K-cell core: a least-squares
// line through the sorted admissible psi values at ranks K +- ceil(K/4),
// evaluated at rank K + 1/2 (where the cumulative cell area equals K h^2).
// psi is linear in area rank across the edge of a uniform core, and the fit
// averages out the jumps between raster shells that make the raw K-th value
// noisy.
double core_level(const ScalarField& psi, std::size_t k, const std::vector<char>& admissible = {});

// Rearrangement fixed-point iteration. The first iterate is the K admissible
// cells nearest to init_center.
SteadyPatch construct(const PoissonSolver& solver, double lambda, const ConstraintClass& cls, Vec2 init_center,
                      const SteadyOptions& options = {});

EnergyReport excess_energy(const SteadyPatch& p);

struct SweepRow {
  double lambda_nominal = 0.0;
  double lambda_effective = 0.0;
  std::size_t K = 0;
  double eps = 0.0;
  double diam_over_eps = 0.0;
  double centroid_err = 0.0;
  double T = 0.0;
  double E_plus_logterm = 0.0;
  double mu_plus_logterm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string error;  // set when construction failed
};

// One construction per lambda (run concurrently), measured against the
// concentration point `target`.
std::vector<SweepRow> asymptotics_sweep(const PoissonSolver& solver, const std::vector<double>& lambdas,
                                        const ConstraintClass& cls, Vec2 init_center, Vec2 target,
                                        const SteadyOptions& options = {});

struct ProbeRun {
  int start = 0;
  Vec2 init_center{};
  bool converged = false;
  double energy = 0.0;
  int cluster = -1;
  std::string error;
};

struct ProbeReport {
  std::vector<ProbeRun> runs;
  int cluster_count = 0;
  std::vector<std::vector<int>> members;  // run indices per cluster
};

// Seeded random starts drawn uniformly from admissible cells. Converged
// fixed points within L1 distance 4 lambda h^2 share a cluster.
ProbeReport uniqueness_probe(const PoissonSolver& solver, double lambda, const ConstraintClass& cls, int n_starts,
                             std::uint64_t seed, const SteadyOptions& options = {});

}  // namespace vortexlab
