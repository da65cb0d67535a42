#pragma once
// Batched geometric kernels. Each kernel has a scalar reference implementation
// and, on x86-64, an AVX2/FMA variant selected at runtime. MMP_SIMD=scalar forces
// the reference path.

#include "mmp/vec2.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace mmp::kernels {

/// Closed polygon boundary in structure-of-arrays form, one entry per edge.
struct PolygonEdges {
  std::vector<double> ax, ay;      // edge start
  std::vector<double> dx, dy;      // edge vector
  std::vector<double> inv_len2;    // 1 / |d|²
  std::vector<double> slope_x;     // dx / dy, 0 for horizontal edges

  std::size_t size() const { return ax.size(); }
};

/// Builds the edge table of the ring v[0] → v[1] → … → v[n-1] → v[0].
PolygonEdges make_polygon_edges(std::span<const Vec2> ring);

enum class Isa { scalar, avx2 };

Isa active_isa();
std::string_view isa_name(Isa isa);
/// Overrides runtime selection (tests use this to compare the variants).
void force_isa(Isa isa);

/// out[k] = signed distance from (xs[k], ys[k]) to the polygon boundary:
/// negative inside (even-odd rule), positive outside.
void signed_distance(const PolygonEdges& poly, std::span<const double> xs, std::span<const double> ys,
                     std::span<double> out);

namespace detail {
void signed_distance_scalar(const PolygonEdges& poly, std::span<const double> xs, std::span<const double> ys,
                            std::span<double> out);
void signed_distance_avx2(const PolygonEdges& poly, std::span<const double> xs, std::span<const double> ys,
                          std::span<double> out);
bool avx2_compiled();
}  // namespace detail

}  // namespace mmp::kernels
