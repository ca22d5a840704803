#pragma once

#include <span>
#include <vector>

#include "vortexlab/domain.hpp"

namespace vortexlab {

// Real values on the domain cells of a DiscreteDomain; zero outside.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(DomainPtr dom);
  ScalarField(DomainPtr dom, std::vector<double> values);

  const DomainPtr& domain() const { return dom_; }
  const DiscreteDomain& dom() const { return *dom_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  // Dense nx*ny copy with zeros outside the domain.
  std::vector<double> to_grid() const;
  static ScalarField from_grid(DomainPtr dom, std::span<const double> grid);

  // Bilinear interpolation of the cell-centered values; cells outside the
  // domain count as zero.
  double sample(Vec2 p) const;
  // Bilinear interpolation using only domain cells, with the weights
  // renormalized; suited to smooth fields sampled next to the boundary.
  // Falls back to the nearest domain cell when no stencil cell is inside.
  double sample_inside(Vec2 p) const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

 private:
  DomainPtr dom_;
  std::vector<double> values_;
};

// omega = lambda * indicator(cells). Cells are domain-cell indices, sorted.
struct Patch {
  DomainPtr dom;
  double lambda = 0.0;
  std::vector<int> cells;

  std::size_t count() const { return cells.size(); }
  double area() const { return static_cast<double>(cells.size()) * dom->h() * dom->h(); }
  double total() const { return lambda * area(); }
  ScalarField field() const;
};

// |{w > level}| for each level.
struct DistributionFunction {
  std::vector<double> levels;
  std::vector<double> measures;
};

// Ball of radius 1/sqrt(lambda*pi) (unit circulation); cells are those whose
// center lies inside the ball. Throws if the ball leaves the domain.
Patch patch_from_ball(const DomainPtr& dom, Vec2 center, double lambda);
double ball_radius(double lambda);
// The K = round(1/(lambda h^2)) cells nearest to center with amplitude
// 1/(K h^2), so the circulation is exactly one.
Patch concentrated_patch(const DomainPtr& dom, Vec2 center, double lambda);

double l1_distance(const ScalarField& a, const ScalarField& b);
DistributionFunction distribution(const ScalarField& w, std::span<const double> levels);
double total(const ScalarField& w);
Vec2 centroid(const ScalarField& w);
// Largest distance between centers of cells where w != 0.
double support_diameter(const ScalarField& w);
double support_diameter(const DiscreteDomain& dom, std::span<const int> cells);

// Isovortical surrogate: distributions agree on {0, lambda/2, lambda}.
bool isovortical(const ScalarField& a, const ScalarField& b, double lambda);

}  // namespace vortexlab
