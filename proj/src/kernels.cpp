#include "mmp/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace mmp::kernels {

namespace {

Isa detect() {
  if (const char* v = std::getenv("MMP_SIMD"); v != nullptr && std::string_view(v) == "scalar") return Isa::scalar;
#if defined(__x86_64__) || defined(_M_X64)
  if (detail::avx2_compiled() && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

PolygonEdges make_polygon_edges(std::span<const Vec2> ring) {
  if (ring.size() < 3) throw std::invalid_argument("polygon needs at least three vertices");
  PolygonEdges e;
  const std::size_t n = ring.size();
  for (auto* v : {&e.ax, &e.ay, &e.dx, &e.dy, &e.inv_len2, &e.slope_x}) v->reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i];
    const Vec2 b = ring[(i + 1) % n];
    const Vec2 d = b - a;
    const double len2 = squared_norm(d);
    e.ax.push_back(a.x);
    e.ay.push_back(a.y);
    e.dx.push_back(d.x);
    e.dy.push_back(d.y);
    e.inv_len2.push_back(len2 > 0.0 ? 1.0 / len2 : 0.0);
    e.slope_x.push_back(d.y != 0.0 ? d.x / d.y : 0.0);
  }
  return e;
}

Isa active_isa() { return static_cast<Isa>(selected().load()); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !detail::avx2_compiled()) throw std::runtime_error("AVX2 kernels not compiled in");
  selected().store(static_cast<int>(isa));
}

void signed_distance(const PolygonEdges& poly, std::span<const double> xs, std::span<const double> ys,
                     std::span<double> out) {
  if (xs.size() != ys.size() || out.size() != xs.size()) throw std::invalid_argument("signed_distance: size mismatch");
  if (active_isa() == Isa::avx2) {
    detail::signed_distance_avx2(poly, xs, ys, out);
  } else {
    detail::signed_distance_scalar(poly, xs, ys, out);
  }
}

namespace detail {

void signed_distance_scalar(const PolygonEdges& poly, std::span<const double> xs, std::span<const double> ys,
                            std::span<double> out) {
  const std::size_t ne = poly.size();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double px = xs[k];
    const double py = ys[k];
    double best = std::numeric_limits<double>::infinity();
    bool inside = false;
    for (std::size_t i = 0; i < ne; ++i) {
      const double rx = px - poly.ax[i];
      const double ry = py - poly.ay[i];
      double t = (rx * poly.dx[i] + ry * poly.dy[i]) * poly.inv_len2[i];
      t = std::clamp(t, 0.0, 1.0);
      const double cx = rx - t * poly.dx[i];
      const double cy = ry - t * poly.dy[i];
      best = std::min(best, cx * cx + cy * cy);
      const double by = poly.ay[i] + poly.dy[i];
      if ((poly.ay[i] > py) != (by > py)) {
        const double xint = poly.ax[i] + (py - poly.ay[i]) * poly.slope_x[i];
        if (px < xint) inside = !inside;
      }
    }
    const double d = std::sqrt(best);
    out[k] = inside ? -d : d;
  }
}

#if !defined(MMP_BUILD_AVX2)
void signed_distance_avx2(const PolygonEdges& poly, std::span<const double> xs, std::span<const double> ys,
                          std::span<double> out) {
  signed_distance_scalar(poly, xs, ys, out);
}
bool avx2_compiled() { return false; }
#endif

}  // namespace detail

}  // namespace mmp::kernels
