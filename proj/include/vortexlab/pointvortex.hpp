#pragma once

#include <vector>

#include "vortexlab/green.hpp"

namespace vortexlab {

// Source of H and grad H for the single-vortex Kirchhoff-Routh system: the
// closed form on disks, or a RobinField (bicubic interpolant) elsewhere.
class KirchhoffRouth {
 public:
  static KirchhoffRouth analytic_disk(DomainPtr dom);
  static KirchhoffRouth from_robin(const RobinField& rf);

  const DomainPtr& domain() const { return dom_; }
  bool analytic() const { return rf_ == nullptr; }

  // Throws InputError when x is within 2h of the boundary.
  double hamiltonian(Vec2 x) const;
  Vec2 grad_h(Vec2 x) const;
  // dx/dt = -1/2 J grad H(x).
  Vec2 velocity(Vec2 x) const;

 private:
  KirchhoffRouth(DomainPtr dom, const RobinField* rf) : dom_(std::move(dom)), rf_(rf) {}
  void check_clearance(Vec2 x) const;

  DomainPtr dom_;
  const RobinField* rf_ = nullptr;  // not owned
};

Vec2 kr_velocity(const KirchhoffRouth& model, Vec2 x);

struct VortexTrajectory {
  std::vector<double> times;
  std::vector<Vec2> positions;
  std::vector<double> H;
  int rejected_steps = 0;
};

// Classical RK4. A step whose |dH| exceeds step_tol * (1 + |H|) is retried
// with half the step (up to 20 halvings, then NumericalError). step_tol <= 0
// picks 1e-6 for analytic models and 1e-5 otherwise.
VortexTrajectory integrate(const KirchhoffRouth& model, Vec2 x0, double horizon, double dt, double step_tol = 0.0);

// Time of the first full revolution of the trajectory about `center`,
// interpolated linearly in the unwrapped angle; negative if it never closes.
double orbit_period(const VortexTrajectory& traj, Vec2 center);

}  // namespace vortexlab
