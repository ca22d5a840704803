#include "vortexlab/pointvortex.hpp"

#include <cmath>

#include "vortexlab/error.hpp"

namespace vortexlab {

KirchhoffRouth KirchhoffRouth::analytic_disk(DomainPtr dom) {
  if (dom->spec().kind() != DomainKind::Disk) throw InputError("analytic Kirchhoff-Routh model needs a disk domain");
  return KirchhoffRouth(std::move(dom), nullptr);
}

KirchhoffRouth KirchhoffRouth::from_robin(const RobinField& rf) { return KirchhoffRouth(rf.domain(), &rf); }

void KirchhoffRouth::check_clearance(Vec2 x) const {
  const auto& d = *dom_;
  const double h = d.h();
  bool ok;
  if (d.spec().kind() == DomainKind::Disk) {
    ok = distance(x, d.spec().center()) < d.spec().semi_axis_a() - 2 * h;
  } else {
    const auto g = d.locate(x);
    const int c = g ? d.cell_of_grid(*g) : -1;
    ok = c >= 0 && d.depth(c) > 2;
  }
  if (!ok) throw InputError("point vortex is within 2h of the boundary");
}

double KirchhoffRouth::hamiltonian(Vec2 x) const {
  check_clearance(x);
  if (!rf_) return disk_formula::robin(dom_->spec(), x);
  const auto v = rf_->smooth_value(x);
  return v ? *v : rf_->value(x);
}

Vec2 KirchhoffRouth::grad_h(Vec2 x) const {
  check_clearance(x);
  if (!rf_) return disk_formula::robin_gradient(dom_->spec(), x);
  const auto g = rf_->smooth_gradient(x);
  return g ? *g : rf_->gradient(x);
}

Vec2 KirchhoffRouth::velocity(Vec2 x) const { return -0.5 * rotate_cw(grad_h(x)); }

Vec2 kr_velocity(const KirchhoffRouth& model, Vec2 x) { return model.velocity(x); }

VortexTrajectory integrate(const KirchhoffRouth& model, Vec2 x0, double horizon, double dt, double step_tol) {
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  if (!(dt > 0.0)) throw InputError("dt must be positive");
  if (step_tol <= 0.0) step_tol = model.analytic() ? 1e-6 : 1e-5;
  VortexTrajectory tr;
  Vec2 x = x0;
  double t = 0.0;
  double hval = model.hamiltonian(x);
  tr.times.push_back(t);
  tr.positions.push_back(x);
  tr.H.push_back(hval);
  const double eps_t = 1e-12 * horizon;
  while (t < horizon - eps_t) {
    double step = std::min(dt, horizon - t);
    int halvings = 0;
    for (;;) {
      const Vec2 k1 = model.velocity(x);
      const Vec2 k2 = model.velocity(x + 0.5 * step * k1);
      const Vec2 k3 = model.velocity(x + 0.5 * step * k2);
      const Vec2 k4 = model.velocity(x + step * k3);
      const Vec2 xn = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double hn = model.hamiltonian(xn);
      if (std::abs(hn - hval) <= step_tol * (1.0 + std::abs(hval))) {
        x = xn;
        hval = hn;
        t += step;
        break;
      }
      ++tr.rejected_steps;
      if (++halvings > 20) throw NumericalError("point-vortex step rejected: H drift exceeds tolerance");
      step *= 0.5;
    }
    tr.times.push_back(t);
    tr.positions.push_back(x);
    tr.H.push_back(hval);
  }
  return tr;
}

double orbit_period(const VortexTrajectory& traj, Vec2 center) {
  if (traj.positions.size() < 2) return -1.0;
  auto angle = [&](std::size_t k) {
    const Vec2 r = traj.positions[k] - center;
    return std::atan2(r.y, r.x);
  };
  double prev = angle(0), total = 0.0;
  for (std::size_t k = 1; k < traj.positions.size(); ++k) {
    const double a = angle(k);
    double da = a - prev;
    if (da > kPi) da -= kTwoPi;
    if (da < -kPi) da += kTwoPi;
    const double next = total + da;
    if (std::abs(next) >= kTwoPi) {
      const double f = (kTwoPi - std::abs(total)) / std::abs(da);
      return traj.times[k - 1] + f * (traj.times[k] - traj.times[k - 1]);
    }
    total = next;
    prev = a;
  }
  return -1.0;
}

}  // namespace vortexlab
