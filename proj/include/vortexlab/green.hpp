#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vortexlab/poisson.hpp"

namespace vortexlab {

// Closed forms for a disk of center c and radius R (image method), with
// x' = x - c and complex arithmetic on points.
namespace disk_formula {
double green(const DomainSpec& disk, Vec2 x, Vec2 y);
double regular(const DomainSpec& disk, Vec2 x, Vec2 y);
double robin(const DomainSpec& disk, Vec2 x);
Vec2 robin_gradient(const DomainSpec& disk, Vec2 x);
}  // namespace disk_formula

// G(x, y). Disk domains use the image formula; other kinds use
// (1/2pi) ln(1/|x-y|) - h(x, y) with h from regular_part. Throws if x == y
// or either point is outside the domain.
double green(const PoissonSolver& solver, Vec2 x, Vec2 y);

// h(x, .): discrete-harmonic field with boundary values (1/2pi) ln(1/|x-b|).
ScalarField regular_part(const PoissonSolver& solver, Vec2 x);

struct RobinOptions {
  int stride = 1;          // sample every stride-th grid cell in each direction
  bool analytic = false;   // use the disk closed form (disk domains only)
};

// H(x) = h(x, x) on every domain cell plus its central-difference gradient.
class RobinField {
 public:
  RobinField(DomainPtr dom, ScalarField values, int stride, bool analytic);

  const DomainPtr& domain() const { return dom_; }
  const ScalarField& values() const { return h_; }
  const ScalarField& gradient_x() const { return gx_; }
  const ScalarField& gradient_y() const { return gy_; }
  int stride() const { return stride_; }
  bool analytic() const { return analytic_; }

  // Bilinear interpolation of H.
  double value(Vec2 p) const;
  // Bilinear interpolation of the cell gradients.
  Vec2 gradient(Vec2 p) const;
  // Bicubic (Catmull-Rom) interpolant of H and its exact gradient, so a
  // Hamiltonian flow built on them conserves smooth_value. Valid where the
  // 4x4 stencil lies in the domain; nullopt otherwise.
  std::optional<double> smooth_value(Vec2 p) const;
  std::optional<Vec2> smooth_gradient(Vec2 p) const;

 private:
  DomainPtr dom_;
  ScalarField h_, gx_, gy_;
  int stride_;
  bool analytic_;
};

RobinField robin(const PoissonSolver& solver, const RobinOptions& options = {});

enum class CriticalKind { Minimum, Saddle, Maximum, Degenerate };
const char* critical_kind_name(CriticalKind kind);

struct CriticalPoint {
  Vec2 location;
  double gradient_norm = 0.0;
  Sym2 hessian;
  CriticalKind kind = CriticalKind::Degenerate;
};

inline constexpr double kDefaultDegeneracyTol = 1e-2 / kPi;

// Zeros of the interpolated gradient on cells at least three steps from the
// boundary, found by Newton's method inside each 2x2 block of cell centers
// where both gradient components change sign. Points closer than h are
// merged.
std::vector<CriticalPoint> find_critical_points(const RobinField& rf, double grad_tol = 1e-8,
                                                double degeneracy_tol = kDefaultDegeneracyTol);

}  // namespace vortexlab
