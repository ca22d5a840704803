#include "vortexlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <sstream>

#include "vortexlab/error.hpp"

namespace vortexlab {

namespace {

constexpr double kBoxPad = 1.1;
// Smallest boundary fraction kept in the stencil; closer cuts are moved out
// to this distance so the operator diagonal stays bounded.
constexpr double kMinTheta = 1e-3;

}  // namespace

DomainSpec DomainSpec::disk(Vec2 center, double radius) {
  if (!(radius > 0.0)) throw InputError("disk radius must be positive");
  DomainSpec s;
  s.kind_ = DomainKind::Disk;
  s.center_ = center;
  s.a_ = s.b_ = radius;
  s.box_ = {center.x - kBoxPad * radius, center.y - kBoxPad * radius,
            center.x + kBoxPad * radius, center.y + kBoxPad * radius};
  return s;
}

DomainSpec DomainSpec::ellipse(double a, double b, Vec2 center) {
  if (!(a > 0.0 && b > 0.0)) throw InputError("ellipse semi-axes must be positive");
  DomainSpec s;
  s.kind_ = DomainKind::Ellipse;
  s.center_ = center;
  s.a_ = a;
  s.b_ = b;
  s.box_ = {center.x - kBoxPad * a, center.y - kBoxPad * b,
            center.x + kBoxPad * a, center.y + kBoxPad * b};
  return s;
}

DomainSpec DomainSpec::from_mask(MaskBitmap bitmap) {
  if (bitmap.nx <= 0 || bitmap.ny <= 0 || !(bitmap.h > 0.0) ||
      bitmap.bits.size() != static_cast<std::size_t>(bitmap.nx) * bitmap.ny) {
    throw InputError("malformed mask bitmap");
  }
  DomainSpec s;
  s.kind_ = DomainKind::Mask;
  s.box_ = {bitmap.x0, bitmap.y0, bitmap.x0 + bitmap.nx * bitmap.h,
            bitmap.y0 + bitmap.ny * bitmap.h};
  s.center_ = {0.5 * (s.box_.x0 + s.box_.x1), 0.5 * (s.box_.y0 + s.box_.y1)};
  s.mask_ = std::make_shared<const MaskBitmap>(std::move(bitmap));
  return s;
}

bool DomainSpec::inside(Vec2 p) const {
  switch (kind_) {
    case DomainKind::Disk:
    case DomainKind::Ellipse: {
      const double u = (p.x - center_.x) / a_;
      const double v = (p.y - center_.y) / b_;
      return u * u + v * v < 1.0;
    }
    case DomainKind::Mask: {
      const auto& m = *mask_;
      const double fi = (p.x - m.x0) / m.h;
      const double fj = (p.y - m.y0) / m.h;
      if (fi < 0.0 || fj < 0.0) return false;
      const int i = static_cast<int>(fi);
      const int j = static_cast<int>(fj);
      if (i >= m.nx || j >= m.ny) return false;
      return m.at(i, j);
    }
  }
  return false;
}

double DomainSpec::exit_fraction(Vec2 p, Vec2 step) const {
  if (kind_ == DomainKind::Mask) return 0.5;
  const double px = (p.x - center_.x) / a_;
  const double py = (p.y - center_.y) / b_;
  const double sx = step.x / a_;
  const double sy = step.y / b_;
  const double qa = sx * sx + sy * sy;
  const double qb = 2.0 * (px * sx + py * sy);
  const double qc = px * px + py * py - 1.0;  // < 0 inside
  const double disc = std::sqrt(std::max(0.0, qb * qb - 4.0 * qa * qc));
  // Positive root of qa t^2 + qb t + qc, written without cancellation.
  const double t = qb > 0.0 ? -2.0 * qc / (qb + disc) : (-qb + disc) / (2.0 * qa);
  return std::clamp(t, 0.0, 1.0);
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case DomainKind::Disk:
      os << "disk(center=" << center_.x << "," << center_.y << " radius=" << a_ << ")";
      break;
    case DomainKind::Ellipse:
      os << "ellipse(center=" << center_.x << "," << center_.y << " a=" << a_ << " b=" << b_
         << ")";
      break;
    case DomainKind::Mask:
      os << "mask(" << mask_->nx << "x" << mask_->ny << " h=" << mask_->h << ")";
      break;
  }
  return os.str();
}

MaskBitmap read_mask(std::istream& in) {
  MaskBitmap m;
  std::string header;
  if (!std::getline(in, header)) throw InputError("mask file: missing header line");
  std::istringstream hs(header);
  if (!(hs >> m.nx >> m.ny >> m.x0 >> m.y0 >> m.h) || m.nx <= 0 || m.ny <= 0 || !(m.h > 0.0)) {
    throw InputError("mask file: header must be 'nx ny x0 y0 h'");
  }
  m.bits.assign(static_cast<std::size_t>(m.nx) * m.ny, 0);
  std::string row;
  for (int j = 0; j < m.ny; ++j) {
    if (!std::getline(in, row)) throw InputError("mask file: expected " + std::to_string(m.ny) + " rows");
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (static_cast<int>(row.size()) != m.nx) {
      throw InputError("mask file: row " + std::to_string(j) + " has wrong length");
    }
    for (int i = 0; i < m.nx; ++i) {
      if (row[i] != '0' && row[i] != '1') throw InputError("mask file: characters must be 0 or 1");
      m.bits[static_cast<std::size_t>(j) * m.nx + i] = row[i] == '1';
    }
  }
  return m;
}

MaskBitmap read_mask_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mask file: " + path);
  return read_mask(in);
}

CellClass DiscreteDomain::cell_class(int i, int j) const {
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return CellClass::Exterior;
  return classes_[grid_index(i, j)];
}

std::size_t DiscreteDomain::interior_count() const {
  return static_cast<std::size_t>(
      std::count(classes_.begin(), classes_.end(), CellClass::Interior));
}

std::optional<int> DiscreteDomain::locate(Vec2 p) const {
  const double fi = (p.x - origin_.x) / h_;
  const double fj = (p.y - origin_.y) / h_;
  if (!(fi >= 0.0 && fj >= 0.0 && fi < nx_ && fj < ny_)) return std::nullopt;
  return grid_index(static_cast<int>(fi), static_cast<int>(fj));
}

bool DiscreteDomain::contains(Vec2 p) const {
  const auto g = locate(p);
  return g && classes_[*g] == CellClass::Interior;
}

namespace {

// Foreground 4-connected, background 8-connected and reachable from the
// outer ring: the digital analogue of a simply-connected region.
void check_simply_connected(const DiscreteDomain& dom, const std::vector<std::uint8_t>& in) {
  const int nx = dom.nx();
  const int ny = dom.ny();
  std::vector<std::uint8_t> seen(in.size(), 0);
  std::deque<int> queue;

  const auto cells = dom.cells();
  queue.push_back(cells.front());
  seen[cells.front()] = 1;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const int g = queue.front();
    queue.pop_front();
    ++reached;
    const int i = g % nx, j = g / nx;
    for (int d = 0; d < 4; ++d) {
      const int ii = i + kDi[d], jj = j + kDj[d];
      if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
      const int n = jj * nx + ii;
      if (in[n] && !seen[n]) {
        seen[n] = 1;
        queue.push_back(n);
      }
    }
  }
  if (reached != cells.size()) {
    throw InputError("domain is not simply connected: region has " +
                     std::string("more than one component"));
  }

  std::fill(seen.begin(), seen.end(), 0);
  std::size_t outside = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int g = j * nx + i;
      if (in[g]) continue;
      ++outside;
      if ((i == 0 || j == 0 || i == nx - 1 || j == ny - 1) && !seen[g]) {
        seen[g] = 1;
        queue.push_back(g);
      }
    }
  }
  reached = 0;
  while (!queue.empty()) {
    const int g = queue.front();
    queue.pop_front();
    ++reached;
    const int i = g % nx, j = g / nx;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
        const int n = jj * nx + ii;
        if (!in[n] && !seen[n]) {
          seen[n] = 1;
          queue.push_back(n);
        }
      }
    }
  }
  if (reached != outside) throw InputError("domain is not simply connected: region has a hole");
}

}  // namespace

DomainPtr build_domain(const DomainSpec& spec, int nx) {
  if (nx < 16) throw InputError("nx must be at least 16");
  std::shared_ptr<DiscreteDomain> dom(new DiscreteDomain());
  dom->spec_ = spec;
  dom->nx_ = nx;

  if (spec.kind() == DomainKind::Mask) {
    const auto& m = *spec.bitmap();
    if (m.nx != nx) {
      throw InputError("mask domains are resolution-locked: nx must equal the raster width " +
                       std::to_string(m.nx));
    }
    dom->ny_ = m.ny;
    dom->h_ = m.h;
    dom->origin_ = {m.x0, m.y0};
  } else {
    const Box& box = spec.box();
    dom->h_ = box.width() / nx;
    dom->ny_ = static_cast<int>(std::ceil(box.height() / dom->h_ - 1e-9));
    const double cy = 0.5 * (box.y0 + box.y1);
    dom->origin_ = {box.x0, cy - 0.5 * dom->ny_ * dom->h_};
  }

  const int ny = dom->ny_;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  std::vector<std::uint8_t> in(n, 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const bool inside = spec.kind() == DomainKind::Mask ? spec.bitmap()->at(i, j)
                                                          : spec.inside(dom->grid_center(i, j));
      if (!inside) continue;
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) {
        throw InputError("bounding box does not strictly contain the region");
      }
      in[static_cast<std::size_t>(j) * nx + i] = 1;
    }
  }

  dom->classes_.assign(n, CellClass::Exterior);
  dom->cell_of_grid_.assign(n, -1);
  for (int g = 0; g < static_cast<int>(n); ++g) {
    if (!in[g]) continue;
    const int i = g % nx, j = g / nx;
    bool boundary = false;
    for (int d = 0; d < 4; ++d) boundary |= !in[(j + kDj[d]) * nx + i + kDi[d]];
    dom->classes_[g] = boundary ? CellClass::Boundary : CellClass::Interior;
    dom->cell_of_grid_[g] = static_cast<int>(dom->cells_.size());
    dom->cells_.push_back(g);
    dom->centers_.push_back(dom->grid_center(i, j));
  }
  if (dom->cells_.empty()) throw InputError("region is empty at this resolution");

  check_simply_connected(*dom, in);

  // Boundary cuts.
  const double h = dom->h_;
  for (int c = 0; c < static_cast<int>(dom->cells_.size()); ++c) {
    const int g = dom->cells_[c];
    const int i = g % nx, j = g / nx;
    for (int d = 0; d < 4; ++d) {
      if (in[(j + kDj[d]) * nx + i + kDi[d]]) continue;
      const Vec2 p = dom->centers_[c];
      const Vec2 step{kDi[d] * h, kDj[d] * h};
      const double theta = std::max(kMinTheta, spec.exit_fraction(p, step));
      dom->cuts_.push_back({c, d, theta, p + theta * step});
    }
  }

  // Depth by breadth-first search from the exterior.
  dom->depth_.assign(dom->cells_.size(), 0);
  std::vector<int> dist(n, -1);
  std::deque<int> queue;
  for (int g = 0; g < static_cast<int>(n); ++g) {
    if (!in[g]) {
      dist[g] = 0;
      queue.push_back(g);
    }
  }
  while (!queue.empty()) {
    const int g = queue.front();
    queue.pop_front();
    const int i = g % nx, j = g / nx;
    for (int d = 0; d < 4; ++d) {
      const int ii = i + kDi[d], jj = j + kDj[d];
      if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
      const int m = jj * nx + ii;
      if (dist[m] < 0) {
        dist[m] = dist[g] + 1;
        queue.push_back(m);
      }
    }
  }
  for (std::size_t c = 0; c < dom->cells_.size(); ++c) dom->depth_[c] = dist[dom->cells_[c]];

  // Nearest domain cell for every grid cell (8-connected front).
  dom->nearest_cell_.assign(n, -1);
  for (std::size_t c = 0; c < dom->cells_.size(); ++c) {
    dom->nearest_cell_[dom->cells_[c]] = static_cast<int>(c);
    queue.push_back(dom->cells_[c]);
  }
  while (!queue.empty()) {
    const int g = queue.front();
    queue.pop_front();
    const int i = g % nx, j = g / nx;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
        const int m = jj * nx + ii;
        if (dom->nearest_cell_[m] < 0) {
          dom->nearest_cell_[m] = dom->nearest_cell_[g];
          queue.push_back(m);
        }
      }
    }
  }
  return dom;
}

}  // namespace vortexlab
