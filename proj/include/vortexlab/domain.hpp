#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vortexlab/geometry.hpp"

namespace vortexlab {

enum class DomainKind { Disk, Ellipse, Mask };

struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// Raster description of a domain. Row 0 is the bottom row (lowest y);
// (x0, y0) is the lower-left corner of cell (0, 0).
struct MaskBitmap {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 0.0;
  std::vector<std::uint8_t> bits;

  bool at(int i, int j) const { return bits[static_cast<std::size_t>(j) * nx + i] != 0; }
};

// Plain-text mask: first line "nx ny x0 y0 h", then ny rows of nx chars in {0,1}.
MaskBitmap read_mask(std::istream& in);
MaskBitmap read_mask_file(const std::string& path);

class DomainSpec {
 public:
  static DomainSpec unit_disk() { return disk({0.0, 0.0}, 1.0); }
  static DomainSpec disk(Vec2 center, double radius);
  static DomainSpec ellipse(double a, double b, Vec2 center = {});
  static DomainSpec from_mask(MaskBitmap bitmap);

  DomainKind kind() const { return kind_; }
  bool analytic() const { return kind_ != DomainKind::Mask; }
  Vec2 center() const { return center_; }
  double semi_axis_a() const { return a_; }
  double semi_axis_b() const { return b_; }
  const Box& box() const { return box_; }
  const MaskBitmap* bitmap() const { return mask_.get(); }

  // Membership of a point in the open region. For masks this is the raster
  // cell lookup.
  bool inside(Vec2 p) const;

  // For analytic kinds: the fraction t in (0, 1] at which the segment
  // p -> p + step leaves the region, given p inside and p + step outside.
  double exit_fraction(Vec2 p, Vec2 step) const;

  std::string describe() const;

 private:
  DomainKind kind_ = DomainKind::Disk;
  Vec2 center_{};
  double a_ = 1.0;
  double b_ = 1.0;
  Box box_{};
  std::shared_ptr<const MaskBitmap> mask_;
};

enum class CellClass : std::uint8_t { Exterior, Interior, Boundary };

// Neighbor directions in the order used by every stencil: east, west, north, south.
enum Direction : int { kEast = 0, kWest = 1, kNorth = 2, kSouth = 3 };
inline constexpr std::array<int, 4> kDi{1, -1, 0, 0};
inline constexpr std::array<int, 4> kDj{0, 0, 1, -1};

// A 4-neighbor link that leaves the region: the boundary is crossed at
// fraction theta of one cell width from the cell center, at `point`.
struct BoundaryCut {
  int cell = 0;  // domain-cell index
  int dir = 0;
  double theta = 1.0;
  Vec2 point{};
};

// Uniform square-cell discretization of a DomainSpec. "Domain cells" are the
// cells whose center lies in the region (classes Interior and Boundary); all
// fields are stored on them, in ascending grid-index order.
class DiscreteDomain {
 public:
  const DomainSpec& spec() const { return spec_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  Vec2 origin() const { return origin_; }

  std::size_t grid_size() const { return static_cast<std::size_t>(nx_) * ny_; }
  int grid_index(int i, int j) const { return j * nx_ + i; }
  int grid_i(int g) const { return g % nx_; }
  int grid_j(int g) const { return g / nx_; }
  Vec2 grid_center(int i, int j) const {
    return {origin_.x + (i + 0.5) * h_, origin_.y + (j + 0.5) * h_};
  }

  CellClass cell_class(int i, int j) const;
  CellClass cell_class_at_grid(int g) const { return classes_[g]; }

  std::size_t cell_count() const { return cells_.size(); }
  std::span<const int> cells() const { return cells_; }
  int grid_of(int cell) const { return cells_[cell]; }
  // Domain-cell index of a grid cell, or -1.
  int cell_of_grid(int g) const { return cell_of_grid_[g]; }
  Vec2 center(int cell) const { return centers_[cell]; }
  std::span<const Vec2> centers() const { return centers_; }

  // Number of 4-steps from the cell to the nearest exterior cell (1 for
  // boundary cells).
  int depth(int cell) const { return depth_[cell]; }
  std::span<const BoundaryCut> cuts() const { return cuts_; }
  // Domain cell nearest to each grid cell (itself for domain cells).
  std::span<const int> nearest_cell() const { return nearest_cell_; }

  double area() const { return static_cast<double>(cells_.size()) * h_ * h_; }
  std::size_t interior_count() const;

  // Grid cell containing p, if p is inside the grid rectangle.
  std::optional<int> locate(Vec2 p) const;
  // True iff p lies in an Interior-class cell.
  bool contains(Vec2 p) const;

 private:
  friend std::shared_ptr<const DiscreteDomain> build_domain(const DomainSpec&, int);
  DiscreteDomain() = default;

  DomainSpec spec_;
  int nx_ = 0;
  int ny_ = 0;
  double h_ = 0.0;
  Vec2 origin_{};
  std::vector<CellClass> classes_;
  std::vector<int> cells_;
  std::vector<int> cell_of_grid_;
  std::vector<Vec2> centers_;
  std::vector<int> depth_;
  std::vector<BoundaryCut> cuts_;
  std::vector<int> nearest_cell_;
};

using DomainPtr = std::shared_ptr<const DiscreteDomain>;

// Requires nx >= 16. For masks, nx must equal the raster width.
DomainPtr build_domain(const DomainSpec& spec, int nx);

inline bool contains(const DiscreteDomain& dom, Vec2 p) { return dom.contains(p); }

}  // namespace vortexlab
