#include "mmp/geometry.hpp"

#include "mmp/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mmp {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

bool odd(int c) { return (c & 1) != 0; }

Vec2 unit_at_degrees(double deg) {
  const double a = deg * std::numbers::pi / 180.0;
  return {std::cos(a), std::sin(a)};
}

double shoelace(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

// Sutherland–Hodgman against one half plane {q : dot(n, q) <= c}.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& in, Vec2 n, double c) {
  std::vector<Vec2> out;
  if (in.empty()) return out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Vec2 a = in[i];
    const Vec2 b = in[(i + 1) % in.size()];
    const double da = dot(n, a) - c;
    const double db = dot(n, b) - c;
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

}  // namespace

Partition::Partition(Rect bounds, double side, std::vector<HexRegion> regions)
    : bounds_(bounds), side_(side), regions_(std::move(regions)) {
  for (const auto& r : regions_) by_lattice_.emplace(std::make_pair(r.col, r.row), r.id);
}

double Partition::inscribed_radius() const { return 0.5 * kSqrt3 * side_; }

const HexRegion& Partition::region(int id) const {
  if (!valid(id)) throw std::out_of_range("unknown region id " + std::to_string(id));
  return regions_[static_cast<std::size_t>(id)];
}

std::optional<int> Partition::lookup(int col, int row) const {
  auto it = by_lattice_.find({col, row});
  if (it == by_lattice_.end()) return std::nullopt;
  return it->second;
}

Vec2 Partition::lattice_center(int col, int row) const {
  const Vec2 c = bounds_.center();
  return {c.x + 1.5 * side_ * col, c.y + kSqrt3 * side_ * (row + (odd(col) ? 0.5 : 0.0))};
}

std::array<Vec2, 6> Partition::vertices(int id) const {
  const Vec2 c = region(id).center;
  std::array<Vec2, 6> v;
  for (int k = 0; k < 6; ++k) v[static_cast<std::size_t>(k)] = c + side_ * unit_at_degrees(60.0 * k);
  return v;
}

double clipped_polygon_area(const std::vector<Vec2>& polygon, const Rect& r) {
  auto poly = clip_half_plane(polygon, {-1.0, 0.0}, -r.xmin);
  poly = clip_half_plane(poly, {1.0, 0.0}, r.xmax);
  poly = clip_half_plane(poly, {0.0, -1.0}, -r.ymin);
  poly = clip_half_plane(poly, {0.0, 1.0}, r.ymax);
  if (poly.size() < 3) return 0.0;
  return std::abs(shoelace(poly));
}

Partition build_partition(const Rect& bounds, double side, const std::map<int, LabelSet>& label_map) {
  if (!(side > 0.0) || !std::isfinite(side)) throw ValidationError("hexagon side must be positive");
  if (!(bounds.xmax > bounds.xmin) || !(bounds.ymax > bounds.ymin)) throw ValidationError("degenerate workspace bounds");

  const Vec2 c = bounds.center();
  const int cmax = static_cast<int>(std::ceil((0.5 * bounds.width() + side) / (1.5 * side))) + 1;
  const int rmax = static_cast<int>(std::ceil((0.5 * bounds.height() + side) / (kSqrt3 * side))) + 1;
  const double min_area = 1e-12 * side * side;

  std::vector<HexRegion> regions;
  for (int col = -cmax; col <= cmax; ++col) {
    for (int row = -rmax; row <= rmax; ++row) {
      const Vec2 center{c.x + 1.5 * side * col, c.y + kSqrt3 * side * (row + (odd(col) ? 0.5 : 0.0))};
      std::vector<Vec2> hex;
      for (int k = 0; k < 6; ++k) hex.push_back(center + side * unit_at_degrees(60.0 * k));
      const double area = clipped_polygon_area(hex, bounds);
      if (area <= min_area) continue;
      HexRegion r;
      r.id = static_cast<int>(regions.size());
      r.col = col;
      r.row = row;
      r.center = center;
      r.clipped_area = area;
      regions.push_back(std::move(r));
    }
  }
  for (const auto& [id, labels] : label_map) {
    if (id < 0 || id >= static_cast<int>(regions.size()))
      throw ValidationError("label map references unknown region " + std::to_string(id));
    regions[static_cast<std::size_t>(id)].labels = labels;
  }
  return Partition(bounds, side, std::move(regions));
}

int point_to_region(const Partition& p, const Vec2& x) {
  if (!p.bounds().contains(x)) {
    std::ostringstream os;
    os << "point (" << x.x << ", " << x.y << ") outside workspace";
    throw OutOfWorkspaceError(os.str());
  }
  const double R = p.side();
  const Vec2 c = p.bounds().center();
  const int col0 = static_cast<int>(std::lround((x.x - c.x) / (1.5 * R)));
  // The containing hexagon is the nearest center (Voronoi property of the tiling).
  std::vector<std::pair<int, double>> cands;
  double dmin = std::numeric_limits<double>::infinity();
  for (int col = col0 - 1; col <= col0 + 1; ++col) {
    const int row0 = static_cast<int>(std::lround((x.y - c.y) / (kSqrt3 * R) - (odd(col) ? 0.5 : 0.0)));
    for (int row = row0 - 1; row <= row0 + 1; ++row) {
      auto id = p.lookup(col, row);
      if (!id) continue;
      const double d = norm(x - p.region(*id).center);
      cands.emplace_back(*id, d);
      dmin = std::min(dmin, d);
    }
  }
  int best = -1;
  for (auto [id, d] : cands)
    if (d <= dmin + 1e-9 * R && (best < 0 || id < best)) best = id;
  if (best < 0) throw OutOfWorkspaceError("no region covers the point");
  return best;
}

int opposite_direction(int dir) {
  if (dir < 1 || dir > 6) throw ValidationError("direction must be in 1..6");
  return (dir + 2) % 6 + 1;
}

std::optional<int> neighbor_in_direction(const Partition& p, int id, int dir) {
  if (dir < 1 || dir > 6) throw ValidationError("direction must be in 1..6, got " + std::to_string(dir));
  const HexRegion& r = p.region(id);
  const Vec2 target = r.center + kSqrt3 * p.side() * unit_at_degrees(30.0 + 60.0 * (dir - 1));
  const Vec2 c = p.bounds().center();
  const int col = static_cast<int>(std::lround((target.x - c.x) / (1.5 * p.side())));
  const int row = static_cast<int>(std::lround((target.y - c.y) / (kSqrt3 * p.side()) - (odd(col) ? 0.5 : 0.0)));
  return p.lookup(col, row);
}

std::optional<int> direction_between(const Partition& p, int from, int to) {
  for (int d = 1; d <= 6; ++d)
    if (neighbor_in_direction(p, from, d) == to) return d;
  return std::nullopt;
}

double hex_signed_distance(const Partition& p, int id, const Vec2& x) {
  const auto v = p.vertices(id);
  const auto edges = kernels::make_polygon_edges(v);
  double out = 0.0;
  kernels::signed_distance(edges, std::span<const double>(&x.x, 1), std::span<const double>(&x.y, 1),
                           std::span<double>(&out, 1));
  return out;
}

std::vector<Vec2> pair_union_ring(const Partition& p, int src, int dst) {
  auto dir = direction_between(p, src, dst);
  if (!dir) throw ValidationError("regions " + std::to_string(src) + " and " + std::to_string(dst) + " are not adjacent");
  const auto a = p.vertices(src);
  const auto b = p.vertices(dst);
  // Shared edge is a[i] → a[i+1] on src and b[j] → b[j+1] on dst with b[j] = a[i+1].
  const int i = *dir - 1;
  const int j = (*dir + 2) % 6;
  std::vector<Vec2> ring;
  ring.reserve(10);
  for (int k = 1; k <= 6; ++k) ring.push_back(a[static_cast<std::size_t>((i + k) % 6)]);
  for (int k = 2; k <= 5; ++k) ring.push_back(b[static_cast<std::size_t>((j + k) % 6)]);
  return ring;
}

kernels::PolygonEdges pair_union_edges(const Partition& p, int src, int dst) {
  return kernels::make_polygon_edges(pair_union_ring(p, src, dst));
}

double signed_distance_to_pair_union(const Partition& p, int src, int dst, const Vec2& x) {
  const auto edges = pair_union_edges(p, src, dst);
  double out = 0.0;
  kernels::signed_distance(edges, std::span<const double>(&x.x, 1), std::span<const double>(&x.y, 1),
                           std::span<double>(&out, 1));
  return out;
}

std::string dump_partition(const Partition& p) {
  std::ostringstream os;
  os << "# region_id, center_x, center_y, labels...\n";
  char buf[96];
  for (const auto& r : p.regions()) {
    std::snprintf(buf, sizeof buf, "%d, %.9f, %.9f", r.id, r.center.x, r.center.y);
    os << buf;
    for (const auto& l : r.labels) os << ", " << l;
    os << '\n';
  }
  return os.str();
}

}  // namespace mmp
