#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "vortexlab/field.hpp"

namespace vortexlab {

struct PoissonOptions {
  enum class Method { Direct, ConjugateGradient };

  double tolerance = 1e-10;    // relative residual, L2 grid norm
  int max_iterations = 20000;  // CG iterations, or refinement sweeps for Direct
  Method method = Method::Direct;
};

struct SolveReport {
  double relative_residual = 0.0;
  int iterations = 0;
};

using BoundaryData = std::function<double(Vec2)>;

// Dirichlet problem -Lap(psi) = f on a DiscreteDomain with the five-point
// stencil. Cells next to the boundary use a linear ghost value through the
// boundary crossing point (distance theta*h), which keeps the operator
// symmetric positive definite and the solution second-order accurate.
//
// Instances are immutable after construction and may be shared by threads.
class PoissonSolver {
 public:
  explicit PoissonSolver(DomainPtr dom, PoissonOptions options = {});
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;

  const DomainPtr& domain() const { return dom_; }
  const PoissonOptions& options() const { return options_; }

  // psi = 0 on the boundary. Throws SolverError if the residual contract
  // cannot be met.
  ScalarField solve(const ScalarField& f, SolveReport* report = nullptr) const;
  // psi = g on the boundary.
  ScalarField solve(const ScalarField& f, const BoundaryData& g, SolveReport* report = nullptr) const;
  // Warm-started variant (used by CG; the direct path ignores the guess).
  ScalarField solve(const ScalarField& f, const ScalarField& guess, SolveReport* report) const;

  // -Lap_h(psi) with zero boundary data.
  ScalarField apply(const ScalarField& psi) const;
  // ||-Lap_h psi - rhs|| / ||rhs|| for the problem with data (f, g).
  double relative_residual(const ScalarField& psi, const ScalarField& f, const BoundaryData* g = nullptr) const;

  // Operator diagonal (in units of 1/h^2) on the dense grid; zero outside.
  const std::vector<double>& stencil_diagonal() const;

 private:
  struct Impl;
  DomainPtr dom_;
  PoissonOptions options_;
  std::unique_ptr<Impl> impl_;

  std::vector<double> rhs(const ScalarField& f, const BoundaryData* g) const;
  ScalarField solve_impl(const std::vector<double>& b, const ScalarField* guess, SolveReport* report) const;
};

}  // namespace vortexlab
