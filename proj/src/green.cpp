#include "vortexlab/green.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "vortexlab/error.hpp"
#include "vortexlab/parallel.hpp"

namespace vortexlab {

namespace {

using Complex = std::complex<double>;

Complex as_complex(Vec2 p) { return {p.x, p.y}; }

double free_space(Vec2 x, Vec2 y) { return -std::log(distance(x, y)) / kTwoPi; }

bool is_disk(const DomainSpec& s) { return s.kind() == DomainKind::Disk; }

void require_inside(const DiscreteDomain& d, Vec2 p, const char* what) {
  if (!d.spec().inside(p)) throw InputError(std::string(what) + " lies outside the domain");
}

}  // namespace

namespace disk_formula {

double green(const DomainSpec& disk, Vec2 x, Vec2 y) {
  const double r = disk.semi_axis_a();
  const Complex xs = as_complex(x - disk.center()), ys = as_complex(y - disk.center());
  return std::log(std::abs((r * r - xs * std::conj(ys)) / (r * (xs - ys)))) / kTwoPi;
}

double regular(const DomainSpec& disk, Vec2 x, Vec2 y) {
  const double r = disk.semi_axis_a();
  const Complex xs = as_complex(x - disk.center()), ys = as_complex(y - disk.center());
  return -std::log(std::abs(r * r - xs * std::conj(ys)) / r) / kTwoPi;
}

double robin(const DomainSpec& disk, Vec2 x) {
  const double r = disk.semi_axis_a();
  return -std::log((r * r - norm2(x - disk.center())) / r) / kTwoPi;
}

Vec2 robin_gradient(const DomainSpec& disk, Vec2 x) {
  const double r = disk.semi_axis_a();
  const Vec2 xs = x - disk.center();
  return xs * (1.0 / (kPi * (r * r - norm2(xs))));
}

}  // namespace disk_formula

ScalarField regular_part(const PoissonSolver& solver, Vec2 x) {
  const auto& d = *solver.domain();
  require_inside(d, x, "source point");
  const BoundaryData g = [x](Vec2 b) { return free_space(x, b); };
  return solver.solve(ScalarField(solver.domain()), g);
}

double green(const PoissonSolver& solver, Vec2 x, Vec2 y) {
  const auto& d = *solver.domain();
  require_inside(d, x, "first point");
  require_inside(d, y, "second point");
  if (x == y) throw InputError("green is singular at x == y; use robin for the diagonal");
  if (is_disk(d.spec())) return disk_formula::green(d.spec(), x, y);
  return free_space(x, y) - regular_part(solver, x).sample_inside(y);
}

RobinField::RobinField(DomainPtr dom, ScalarField values, int stride, bool analytic)
    : dom_(std::move(dom)), h_(std::move(values)), gx_(dom_), gy_(dom_), stride_(stride), analytic_(analytic) {
  const auto& d = *dom_;
  const double h = d.h();
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const int g = d.grid_of(static_cast<int>(c));
    const int i = d.grid_i(g), j = d.grid_j(g);
    auto diff = [&](int di, int dj) {
      const int p = d.cell_of_grid(d.grid_index(i + di, j + dj));
      const int m = d.cell_of_grid(d.grid_index(i - di, j - dj));
      if (p >= 0 && m >= 0) return (h_[p] - h_[m]) / (2 * h);
      if (p >= 0) return (h_[p] - h_[c]) / h;
      if (m >= 0) return (h_[c] - h_[m]) / h;
      return 0.0;
    };
    gx_[c] = diff(1, 0);
    gy_[c] = diff(0, 1);
  }
}

double RobinField::value(Vec2 p) const { return h_.sample_inside(p); }

Vec2 RobinField::gradient(Vec2 p) const { return {gx_.sample_inside(p), gy_.sample_inside(p)}; }

namespace {

void catmull_rom(double t, double w[4], double dw[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
  dw[0] = 0.5 * (-3 * t2 + 4 * t - 1);
  dw[1] = 0.5 * (9 * t2 - 10 * t);
  dw[2] = 0.5 * (-9 * t2 + 8 * t + 1);
  dw[3] = 0.5 * (3 * t2 - 2 * t);
}

struct Bicubic {
  double value;
  Vec2 gradient;
};

std::optional<Bicubic> bicubic(const DiscreteDomain& d, const ScalarField& f, Vec2 p) {
  const double fx = (p.x - d.origin().x) / d.h() - 0.5;
  const double fy = (p.y - d.origin().y) / d.h() - 0.5;
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  if (i0 < 1 || j0 < 1 || i0 + 2 >= d.nx() || j0 + 2 >= d.ny()) return std::nullopt;
  double wx[4], wy[4], dwx[4], dwy[4];
  catmull_rom(fx - i0, wx, dwx);
  catmull_rom(fy - j0, wy, dwy);
  Bicubic out{0.0, {}};
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      const int c = d.cell_of_grid(d.grid_index(i0 - 1 + a, j0 - 1 + b));
      if (c < 0) return std::nullopt;
      out.value += wx[a] * wy[b] * f[c];
      out.gradient.x += dwx[a] * wy[b] * f[c];
      out.gradient.y += wx[a] * dwy[b] * f[c];
    }
  }
  out.gradient *= 1.0 / d.h();
  return out;
}

}  // namespace

std::optional<double> RobinField::smooth_value(Vec2 p) const {
  const auto b = bicubic(*dom_, h_, p);
  if (!b) return std::nullopt;
  return b->value;
}

std::optional<Vec2> RobinField::smooth_gradient(Vec2 p) const {
  const auto b = bicubic(*dom_, h_, p);
  if (!b) return std::nullopt;
  return b->gradient;
}

RobinField robin(const PoissonSolver& solver, const RobinOptions& options) {
  if (options.stride < 1) throw InputError("robin sample stride must be at least 1");
  const auto& dom = solver.domain();
  const auto& d = *dom;
  ScalarField values(dom);
  if (options.analytic) {
    if (!is_disk(d.spec())) throw InputError("analytic Robin function is only available on disks");
    for (std::size_t c = 0; c < d.cell_count(); ++c)
      values[c] = disk_formula::robin(d.spec(), d.center(static_cast<int>(c)));
    return RobinField(dom, std::move(values), options.stride, true);
  }

  const int s = options.stride;
  auto on_lattice = [&](int g) { return d.grid_i(g) % s == 0 && d.grid_j(g) % s == 0; };
  // Lattice corners of the block holding cell g that are domain cells.
  auto corners = [&](int g, int out[4]) {
    const int i0 = d.grid_i(g) - d.grid_i(g) % s, j0 = d.grid_j(g) - d.grid_j(g) % s;
    int k = 0;
    for (int b = 0; b < 2; ++b) {
      for (int a = 0; a < 2; ++a) {
        const int i = i0 + a * s, j = j0 + b * s;
        out[k++] = (i < d.nx() && j < d.ny()) ? d.cell_of_grid(d.grid_index(i, j)) : -1;
      }
    }
  };

  std::vector<int> direct;  // domain cells that get their own solve
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const int g = d.grid_of(static_cast<int>(c));
    if (on_lattice(g)) {
      direct.push_back(static_cast<int>(c));
      continue;
    }
    int cs[4];
    corners(g, cs);
    if (std::all_of(cs, cs + 4, [](int v) { return v < 0; })) direct.push_back(static_cast<int>(c));
  }
  std::vector<char> known(d.cell_count(), 0);
  parallel_for(direct.size(), [&](std::size_t k) {
    const int c = direct[k];
    values[c] = regular_part(solver, d.center(c))[c];
  });
  for (int c : direct) known[c] = 1;

  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    if (known[c]) continue;
    const int g = d.grid_of(static_cast<int>(c));
    const double tx = static_cast<double>(d.grid_i(g) % s) / s;
    const double ty = static_cast<double>(d.grid_j(g) % s) / s;
    int cs[4];
    corners(g, cs);
    const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    double acc = 0.0, wsum = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (cs[k] < 0) continue;
      acc += w[k] * values[cs[k]];
      wsum += w[k];
    }
    if (wsum > 1e-12) {
      values[c] = acc / wsum;
    } else {
      // Only corners with zero weight are present; use the closest one.
      for (int k = 0; k < 4; ++k) {
        if (cs[k] >= 0) {
          values[c] = values[cs[k]];
          break;
        }
      }
    }
  }
  return RobinField(dom, std::move(values), s, false);
}

const char* critical_kind_name(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::Minimum: return "nondegenerate-min";
    case CriticalKind::Saddle: return "nondegenerate-saddle";
    case CriticalKind::Maximum: return "nondegenerate-max";
    case CriticalKind::Degenerate: return "degenerate";
  }
  return "degenerate";
}

std::vector<CriticalPoint> find_critical_points(const RobinField& rf, double grad_tol, double degeneracy_tol) {
  const auto& d = *rf.domain();
  const double h = d.h();
  const auto& gx = rf.gradient_x();
  const auto& gy = rf.gradient_y();
  std::vector<CriticalPoint> found;

  for (int j = 0; j + 1 < d.ny(); ++j) {
    for (int i = 0; i + 1 < d.nx(); ++i) {
      int c[4];
      bool ok = true;
      for (int k = 0; k < 4 && ok; ++k) {
        c[k] = d.cell_of_grid(d.grid_index(i + (k & 1), j + (k >> 1)));
        ok = c[k] >= 0 && d.depth(c[k]) >= 3;
      }
      if (!ok) continue;
      const double ax[4] = {gx[c[0]], gx[c[1]], gx[c[2]], gx[c[3]]};
      const double ay[4] = {gy[c[0]], gy[c[1]], gy[c[2]], gy[c[3]]};
      auto straddles = [](const double* v) {
        return *std::min_element(v, v + 4) <= 0.0 && *std::max_element(v, v + 4) >= 0.0;
      };
      if (!straddles(ax) || !straddles(ay)) continue;

      // Newton on the bilinear gradient over the block, local coords in [0,1]^2.
      auto eval = [](const double* v, double s, double t) {
        return (1 - s) * (1 - t) * v[0] + s * (1 - t) * v[1] + (1 - s) * t * v[2] + s * t * v[3];
      };
      double s = 0.5, t = 0.5;
      bool converged = false;
      for (int it = 0; it < 50; ++it) {
        const double fx = eval(ax, s, t), fy = eval(ay, s, t);
        const double xs = (1 - t) * (ax[1] - ax[0]) + t * (ax[3] - ax[2]);
        const double xt = (1 - s) * (ax[2] - ax[0]) + s * (ax[3] - ax[1]);
        const double ys = (1 - t) * (ay[1] - ay[0]) + t * (ay[3] - ay[2]);
        const double yt = (1 - s) * (ay[2] - ay[0]) + s * (ay[3] - ay[1]);
        const double det = xs * yt - xt * ys;
        if (det == 0.0 || !std::isfinite(det)) break;
        const double ds = (fx * yt - fy * xt) / det;
        const double dt = (xs * fy - ys * fx) / det;
        s -= ds;
        t -= dt;
        if (std::abs(ds) + std::abs(dt) < 1e-14) {
          converged = true;
          break;
        }
      }
      constexpr double kSlack = 1e-9;
      if (!converged || s < -kSlack || s > 1 + kSlack || t < -kSlack || t > 1 + kSlack) continue;
      const Vec2 p = d.grid_center(i, j) + Vec2{s * h, t * h};
      const Vec2 g = rf.gradient(p);
      const double gn = norm(g);
      if (!(gn < grad_tol)) continue;

      const auto H = [&](double dx, double dy) { return rf.value(p + Vec2{dx, dy}); };
      CriticalPoint cp;
      cp.location = p;
      cp.gradient_norm = gn;
      cp.hessian.xx = (H(h, 0) - 2 * H(0, 0) + H(-h, 0)) / (h * h);
      cp.hessian.yy = (H(0, h) - 2 * H(0, 0) + H(0, -h)) / (h * h);
      cp.hessian.xy = (H(h, h) - H(h, -h) - H(-h, h) + H(-h, -h)) / (4 * h * h);
      double lo, hi;
      cp.hessian.eigenvalues(lo, hi);
      if (std::abs(lo) < degeneracy_tol || std::abs(hi) < degeneracy_tol)
        cp.kind = CriticalKind::Degenerate;
      else if (lo > 0)
        cp.kind = CriticalKind::Minimum;
      else if (hi < 0)
        cp.kind = CriticalKind::Maximum;
      else
        cp.kind = CriticalKind::Saddle;

      const bool duplicate = std::any_of(found.begin(), found.end(),
                                         [&](const CriticalPoint& q) { return distance(q.location, p) < h; });
      if (!duplicate) found.push_back(cp);
    }
  }
  return found;
}

}  // namespace vortexlab
