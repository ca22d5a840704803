#include "vortexlab/field.hpp"

#include <algorithm>
#include <cmath>

#include "vortexlab/error.hpp"
#include "vortexlab/kernels.hpp"

namespace vortexlab {

ScalarField::ScalarField(DomainPtr dom) : dom_(std::move(dom)), values_(dom_->cell_count(), 0.0) {}

ScalarField::ScalarField(DomainPtr dom, std::vector<double> values)
    : dom_(std::move(dom)), values_(std::move(values)) {
  if (values_.size() != dom_->cell_count()) throw InputError("field size does not match domain");
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericalError("field values must be finite");
  }
}

std::vector<double> ScalarField::to_grid() const {
  std::vector<double> grid(dom_->grid_size(), 0.0);
  const auto cells = dom_->cells();
  for (std::size_t k = 0; k < cells.size(); ++k) grid[cells[k]] = values_[k];
  return grid;
}

ScalarField ScalarField::from_grid(DomainPtr dom, std::span<const double> grid) {
  ScalarField f(dom);
  const auto cells = dom->cells();
  for (std::size_t k = 0; k < cells.size(); ++k) f.values_[k] = grid[cells[k]];
  return f;
}

double ScalarField::sample(Vec2 p) const {
  const auto& d = *dom_;
  const double fx = (p.x - d.origin().x) / d.h() - 0.5;
  const double fy = (p.y - d.origin().y) / d.h() - 0.5;
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  const double tx = fx - i0;
  const double ty = fy - j0;
  auto value = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= d.nx() || j >= d.ny()) return 0.0;
    const int c = d.cell_of_grid(d.grid_index(i, j));
    return c < 0 ? 0.0 : values_[c];
  };
  return (1 - ty) * ((1 - tx) * value(i0, j0) + tx * value(i0 + 1, j0)) +
         ty * ((1 - tx) * value(i0, j0 + 1) + tx * value(i0 + 1, j0 + 1));
}

double ScalarField::sample_inside(Vec2 p) const {
  const auto& d = *dom_;
  const double fx = (p.x - d.origin().x) / d.h() - 0.5;
  const double fy = (p.y - d.origin().y) / d.h() - 0.5;
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  const double tx = fx - i0;
  const double ty = fy - j0;
  double acc = 0.0, wsum = 0.0;
  for (int b = 0; b < 2; ++b) {
    for (int a = 0; a < 2; ++a) {
      const int i = i0 + a, j = j0 + b;
      if (i < 0 || j < 0 || i >= d.nx() || j >= d.ny()) continue;
      const int c = d.cell_of_grid(d.grid_index(i, j));
      if (c < 0) continue;
      const double w = (a ? tx : 1 - tx) * (b ? ty : 1 - ty);
      acc += w * values_[c];
      wsum += w;
    }
  }
  if (wsum > 1e-12) return acc / wsum;
  const int ic = std::clamp(static_cast<int>(std::lround(fx)), 0, d.nx() - 1);
  const int jc = std::clamp(static_cast<int>(std::lround(fy)), 0, d.ny() - 1);
  return values_[d.nearest_cell()[d.grid_index(ic, jc)]];
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  if (o.dom_ != dom_) throw InputError("field domains differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  if (o.dom_ != dom_) throw InputError("field domains differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField Patch::field() const {
  ScalarField f(dom);
  for (int c : cells) f[c] = lambda;
  return f;
}

double ball_radius(double lambda) { return 1.0 / std::sqrt(lambda * kPi); }

Patch patch_from_ball(const DomainPtr& dom, Vec2 center, double lambda) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  const double eps = ball_radius(lambda);
  // Containment: the ball must sit inside the region. Checked on a ring of
  // points for analytic kinds and on cell centers for masks.
  const auto& spec = dom->spec();
  constexpr int kRing = 256;
  for (int k = 0; k < kRing; ++k) {
    const double a = kTwoPi * k / kRing;
    if (!spec.inside(center + eps * Vec2{std::cos(a), std::sin(a)})) {
      throw InputError("ball of radius " + std::to_string(eps) + " is not contained in the domain");
    }
  }
  Patch p{dom, lambda, {}};
  const double r2 = eps * eps;
  for (std::size_t c = 0; c < dom->cell_count(); ++c) {
    if (norm2(dom->center(static_cast<int>(c)) - center) < r2) p.cells.push_back(static_cast<int>(c));
  }
  if (p.cells.empty()) throw InputError("ball is not resolved at this grid spacing");
  return p;
}

Patch concentrated_patch(const DomainPtr& dom, Vec2 center, double lambda) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  const double h2 = dom->h() * dom->h();
  const auto k = static_cast<std::size_t>(std::llround(1.0 / (lambda * h2)));
  if (k < 1) throw InputError("patch is not resolved at this grid spacing");
  if (k > dom->cell_count()) throw InputError("patch is larger than the domain");
  std::vector<int> order(dom->cell_count());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = static_cast<int>(c);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), [&](int a, int b) {
    const double da = norm2(dom->center(a) - center), db = norm2(dom->center(b) - center);
    return da < db || (da == db && a < b);
  });
  Patch p{dom, 1.0 / (static_cast<double>(k) * h2), {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k)}};
  std::sort(p.cells.begin(), p.cells.end());
  return p;
}

namespace {

void require_same_domain(const ScalarField& a, const ScalarField& b) {
  if (a.domain() != b.domain()) throw InputError("fields live on different domains");
}

}  // namespace

double l1_distance(const ScalarField& a, const ScalarField& b) {
  require_same_domain(a, b);
  const double h = a.dom().h();
  return kernels::abs_diff_sum(a.values(), b.values()) * h * h;
}

DistributionFunction distribution(const ScalarField& w, std::span<const double> levels) {
  if (!std::is_sorted(levels.begin(), levels.end())) throw InputError("levels must be sorted");
  DistributionFunction df;
  df.levels.assign(levels.begin(), levels.end());
  df.measures.assign(levels.size(), 0.0);
  std::vector<double> sorted(w.values().begin(), w.values().end());
  std::sort(sorted.begin(), sorted.end());
  const double h2 = w.dom().h() * w.dom().h();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), levels[k]);
    df.measures[k] = static_cast<double>(above) * h2;
  }
  return df;
}

double total(const ScalarField& w) {
  const double h = w.dom().h();
  return kernels::sum(w.values()) * h * h;
}

Vec2 centroid(const ScalarField& w) {
  double m = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] == 0.0) continue;
    const Vec2 p = w.dom().center(static_cast<int>(c));
    m += w[c];
    mx += w[c] * p.x;
    my += w[c] * p.y;
  }
  if (m == 0.0) throw InputError("centroid of a field with zero total is undefined");
  return {mx / m, my / m};
}

double support_diameter(const DiscreteDomain& dom, std::span<const int> cells) {
  if (cells.size() < 2) return 0.0;
  // The farthest pair is attained on cells with a 4-neighbor outside the
  // set, so only those are compared pairwise.
  std::vector<std::uint8_t> in(dom.grid_size(), 0);
  for (int c : cells) in[dom.grid_of(c)] = 1;
  std::vector<Vec2> rim;
  for (int c : cells) {
    const int g = dom.grid_of(c);
    const int i = dom.grid_i(g), j = dom.grid_j(g);
    bool edge = false;
    for (int d = 0; d < 4 && !edge; ++d) {
      const int ii = i + kDi[d], jj = j + kDj[d];
      edge = ii < 0 || jj < 0 || ii >= dom.nx() || jj >= dom.ny() || !in[dom.grid_index(ii, jj)];
    }
    if (edge) rim.push_back(dom.center(c));
  }
  if (rim.size() > 10000) {
    // Convex hull (monotone chain) then pairwise over hull vertices.
    std::sort(rim.begin(), rim.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    std::vector<Vec2> hull(2 * rim.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < rim.size(); ++i) {
      while (k >= 2 && cross(hull[k - 1] - hull[k - 2], rim[i] - hull[k - 2]) <= 0) --k;
      hull[k++] = rim[i];
    }
    for (std::size_t i = rim.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross(hull[k - 1] - hull[k - 2], rim[i] - hull[k - 2]) <= 0) --k;
      hull[k++] = rim[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
    rim = std::move(hull);
  }
  double best = 0.0;
  for (std::size_t a = 0; a < rim.size(); ++a) {
    for (std::size_t b = a + 1; b < rim.size(); ++b) best = std::max(best, norm2(rim[a] - rim[b]));
  }
  return std::sqrt(best);
}

double support_diameter(const ScalarField& w) {
  std::vector<int> cells;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] != 0.0) cells.push_back(static_cast<int>(c));
  }
  return support_diameter(w.dom(), cells);
}

bool isovortical(const ScalarField& a, const ScalarField& b, double lambda) {
  const double levels[] = {0.0, 0.5 * lambda, lambda};
  return distribution(a, levels).measures == distribution(b, levels).measures;
}

}  // namespace vortexlab
