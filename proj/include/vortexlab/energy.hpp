#pragma once

#include <vector>

#include "vortexlab/poisson.hpp"

namespace vortexlab {

// E = 1/2 sum w psi h^2 for a given stream function.
double kinetic_energy(const ScalarField& w, const ScalarField& psi);
// Solves for psi first.
double kinetic_energy(const PoissonSolver& solver, const ScalarField& w);

// 1/2 sum_x sum_y G(x,y) w(x) w(y) h^4 with the closed-form disk Green
// function; the diagonal uses the cell-averaged logarithm. O(N^2), for
// cross-checking kinetic_energy on coarse grids.
double kinetic_energy_double_sum(const ScalarField& w);

struct EnergyReport {
  double E = 0.0;
  double T = 0.0;
  double mu = 0.0;
  double identity_residual = 0.0;  // |E - T - mu/2|
};

// T = 1/2 sum max(psi - mu, 0) w h^2.
EnergyReport excess_energy(const ScalarField& w, const ScalarField& psi, double mu);

// The K admissible cells with the largest psi, ties broken by ascending cell
// index. `admissible` may be empty (all cells admissible). Returns the
// chosen cells sorted by index.
struct TopCells {
  std::vector<int> cells;
  double threshold = 0.0;      // K-th largest psi
  double next_value = 0.0;     // (K+1)-th largest psi, or threshold if none
  int ties = 0;                // cells tied with the threshold beyond the K-th
};
TopCells top_cells(const ScalarField& psi, std::size_t k, const std::vector<char>& admissible = {});

struct Reprojection {
  Patch patch;
  ScalarField psi;  // stream function of the input
  double nu = 0.0;  // area quantile of psi
  int ties = 0;
};

// lambda times the indicator of the target_cells admissible cells of largest
// psi, with psi the stream function of w.
Reprojection reproject_isovortical(const PoissonSolver& solver, const ScalarField& w, double lambda,
                                   std::size_t target_cells, const std::vector<char>& admissible = {});

// Smooth compactly supported test functions: tensor products of
// exp(-1/(1-t^2)) with half-width 1.4 s on a 4x4 lattice of centers with
// spacing s = box/8, dropping any bump whose support comes within
// `margin_cells` of the boundary.
std::vector<ScalarField> default_test_battery(const DomainPtr& dom, int margin_cells = 4);

// Tensor-product bump of half-width r centered at c.
ScalarField bump_field(const DomainPtr& dom, Vec2 c, double r);

// max over xi of |sum w (d1 xi d2 psi - d2 xi d1 psi) h^2| divided by
// max|w| * ||grad xi|| * ||grad psi|| (L2 grid norms, central differences).
double steadiness_residual(const ScalarField& w, const ScalarField& psi, const std::vector<ScalarField>& battery);
double steadiness_residual(const PoissonSolver& solver, const ScalarField& w,
                           const std::vector<ScalarField>& battery);

// Central-difference gradient on domain cells; neighbors outside the domain
// are taken as zero (the Dirichlet value).
void central_gradient(const ScalarField& f, std::vector<Vec2>& out);

}  // namespace vortexlab
