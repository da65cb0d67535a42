#pragma once
// Hexagonal partition of a rectangular workspace.
//
// Tiling: flat-top hexagons of side R. Column c, row r has center
//   (cx + 1.5·R·c,  cy + √3·R·(r + ½·[c odd]))
// where (cx, cy) is the workspace center. Every hexagon with positive area inside
// the rectangle is a region; region ids are assigned in ascending (column, row).
// Direction d ∈ 1..6 points from a center toward angle 30° + 60°(d−1); the opposite
// direction of d is ((d+2) mod 6) + 1.

#include "mmp/kernels.hpp"
#include "mmp/vec2.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mmp {

struct Rect {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;

  bool contains(const Vec2& p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

using LabelSet = std::set<std::string>;

struct HexRegion {
  int id = 0;
  int col = 0;
  int row = 0;
  Vec2 center;
  LabelSet labels;
  double clipped_area = 0.0;
};

class Partition {
 public:
  Partition(Rect bounds, double side, std::vector<HexRegion> regions);

  const Rect& bounds() const { return bounds_; }
  double side() const { return side_; }
  double inscribed_radius() const;
  std::size_t size() const { return regions_.size(); }
  const std::vector<HexRegion>& regions() const { return regions_; }
  /// Throws std::out_of_range for unknown ids.
  const HexRegion& region(int id) const;
  bool valid(int id) const { return id >= 0 && id < static_cast<int>(regions_.size()); }

  std::optional<int> lookup(int col, int row) const;
  Vec2 lattice_center(int col, int row) const;
  /// Unclipped hexagon, counter-clockwise, vertex k at angle 60°·k.
  std::array<Vec2, 6> vertices(int id) const;

 private:
  Rect bounds_;
  double side_;
  std::vector<HexRegion> regions_;
  std::map<std::pair<int, int>, int> by_lattice_;
};

/// Throws ValidationError for R ≤ 0, degenerate bounds, or labels on unknown ids.
Partition build_partition(const Rect& bounds, double side, const std::map<int, LabelSet>& label_map = {});

/// Region whose hexagon contains x; shared edges and vertices go to the smallest id.
/// Throws OutOfWorkspaceError outside the bounds.
int point_to_region(const Partition& p, const Vec2& x);

/// Neighbor across side `dir` (1..6), absent if it is not a region.
/// Throws ValidationError for dir outside 1..6 and std::out_of_range for bad ids.
std::optional<int> neighbor_in_direction(const Partition& p, int id, int dir);
int opposite_direction(int dir);
/// Direction d with neighbor_in_direction(from, d) == to, if adjacent.
std::optional<int> direction_between(const Partition& p, int from, int to);

/// Signed distance to the hexagon boundary of one region (negative inside).
double hex_signed_distance(const Partition& p, int id, const Vec2& x);

/// Boundary ring of the union of two adjacent hexagons (10 vertices, CCW).
/// Throws ValidationError if the regions are not adjacent.
std::vector<Vec2> pair_union_ring(const Partition& p, int src, int dst);
kernels::PolygonEdges pair_union_edges(const Partition& p, int src, int dst);
double signed_distance_to_pair_union(const Partition& p, int src, int dst, const Vec2& x);

/// Area of a polygon clipped to a rectangle.
double clipped_polygon_area(const std::vector<Vec2>& polygon, const Rect& r);

/// "region_id, center_x, center_y, labels..." one row per region.
std::string dump_partition(const Partition& p);

}  // namespace mmp
