#include "mmp/dynamics.hpp"

#include "mmp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmp {

namespace {

double sin_sq(double s) {
  const double v = std::sin(s);
  return v * v;
}

void check_count(const DynamicsSpec& spec, std::size_t n) {
  if (n != spec.neighbors.size())
    throw ValidationError("expected " + std::to_string(spec.neighbors.size()) + " neighbor states, got " +
                          std::to_string(n));
}

std::vector<Vec2> gather(const DynamicsSpec& spec, std::span<const Vec2> x) {
  std::vector<Vec2> out;
  out.reserve(spec.neighbors.size());
  for (const auto& n : spec.neighbors) out.push_back(x[static_cast<std::size_t>(n.agent)]);
  return out;
}

std::vector<Vec2> system_rhs(std::span<const DynamicsSpec> specs, std::span<const Vec2> x, std::span<const Vec2> u) {
  std::vector<Vec2> dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = eval_coupling(specs[i], x[i], gather(specs[i], x)) + u[i];
  return dx;
}

}  // namespace

Vec2 eval_coupling(const DynamicsSpec& spec, const Vec2& xi, std::span<const Vec2> xbar) {
  check_count(spec, xbar.size());
  Vec2 f = spec.self * xi;
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    const auto& n = spec.neighbors[j];
    f += n.gain * xbar[j];
    if (n.sin2 != 0.0) {
      const Vec2 d = xi - xbar[j];
      f += n.sin2 * Vec2{sin_sq(d.x), sin_sq(d.y)};
    }
  }
  return f;
}

Mat2 coupling_jacobian(const DynamicsSpec& spec, const Vec2& xi, std::span<const Vec2> xbar) {
  check_count(spec, xbar.size());
  Mat2 J = spec.self;
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    const auto& n = spec.neighbors[j];
    if (n.sin2 == 0.0) continue;
    const Vec2 d = xi - xbar[j];
    J.a11 += n.sin2 * std::sin(2.0 * d.x);
    J.a22 += n.sin2 * std::sin(2.0 * d.y);
  }
  return J;
}

DerivedConstants derive_constants(const DynamicsSpec& spec, const Rect& bounds) {
  DerivedConstants c;
  // Linear part: the norm of a linear map is convex, so its max over the product of
  // boxes is attained at a vertex combination.
  const std::size_t n = spec.neighbors.size() + 1;
  const Vec2 corners[4] = {{bounds.xmin, bounds.ymin}, {bounds.xmax, bounds.ymin},
                           {bounds.xmin, bounds.ymax}, {bounds.xmax, bounds.ymax}};
  std::size_t combos = 1;
  for (std::size_t k = 0; k < n; ++k) combos *= 4;
  double lin = 0.0;
  for (std::size_t m = 0; m < combos; ++m) {
    std::size_t code = m;
    Vec2 v = spec.self * corners[code % 4];
    code /= 4;
    for (const auto& nb : spec.neighbors) {
      v += nb.gain * corners[code % 4];
      code /= 4;
    }
    lin = std::max(lin, norm(v));
  }
  double sin_terms = 0.0;
  double slope = 0.0;
  double lbar2 = 0.0;
  for (const auto& nb : spec.neighbors) {
    sin_terms += std::abs(nb.sin2) * std::numbers::sqrt2;
    slope += std::abs(nb.sin2);
    const double lj = spectral_norm(nb.gain) + std::abs(nb.sin2);
    lbar2 += lj * lj;
  }
  c.M = lin + sin_terms;
  c.L = std::max(spectral_norm(spec.self) + slope, kLipschitzFloor);
  c.Lbar = std::max(std::sqrt(lbar2), kLipschitzFloor);
  return c;
}

AgentContext make_context(int id, const DynamicsSpec& spec, const Rect& bounds, double side) {
  AgentContext ctx;
  ctx.id = id;
  ctx.spec = spec;
  const auto c = derive_constants(spec, bounds);
  ctx.M = c.M;
  ctx.L = c.L;
  ctx.Lbar = c.Lbar;
  ctx.side = side;
  ctx.rho_tilde = 2.0 * std::numbers::sqrt3 * side * c.Lbar * static_cast<double>(spec.neighbors.size()) / c.L;
  return ctx;
}

double error_bound(double e0_norm, double dt, double M, double u_max) {
  if (dt < 0.0) throw std::invalid_argument("error_bound: negative duration");
  return e0_norm + dt * (M + u_max);
}

double rho(const AgentContext& ctx, double dt, double e0_norm) {
  const double exp_branch = ctx.rho_tilde * std::expm1(ctx.L * dt);
  const double lin_branch = 2.0 * e0_norm + 2.0 * dt * (ctx.M + ctx.spec.u_max);
  return std::min(exp_branch, lin_branch);
}

Vec2 PiecewiseConstant::at(double t) const {
  if (pieces.empty()) return {};
  // Small slack so grid points land on the piece that starts there.
  const double k = std::floor((t - t0) / step + 1e-9);
  if (k < 0) return pieces.front();
  const auto idx = static_cast<std::size_t>(k);
  return idx < pieces.size() ? pieces[idx] : pieces.back();
}

std::vector<Vec2> rk4_step(std::span<const DynamicsSpec> specs, std::span<const Vec2> x, std::span<const Vec2> u,
                           double dt) {
  const std::size_t n = x.size();
  std::vector<Vec2> tmp(n);
  const auto k1 = system_rhs(specs, x, u);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  const auto k2 = system_rhs(specs, tmp, u);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  const auto k3 = system_rhs(specs, tmp, u);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  const auto k4 = system_rhs(specs, tmp, u);
  std::vector<Vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

IntegrationResult integrate(std::span<const DynamicsSpec> specs, std::span<const Vec2> x0,
                            std::span<const PiecewiseConstant> controls, double t0, double dt, int steps,
                            const Rect& bounds) {
  if (specs.size() != x0.size() || controls.size() != x0.size())
    throw ValidationError("integrate: agent count mismatch");
  if (!(dt > 0.0) || steps < 0) throw std::invalid_argument("integrate: bad step");
  IntegrationResult res;
  res.times.reserve(static_cast<std::size_t>(steps) + 1);
  res.states.reserve(static_cast<std::size_t>(steps) + 1);
  std::vector<Vec2> x(x0.begin(), x0.end());
  std::vector<Vec2> u(x.size());
  auto record = [&](int k) {
    res.times.push_back(t0 + k * dt);
    res.states.push_back(x);
    if (res.first_exit_step < 0)
      for (const auto& p : x)
        if (!bounds.contains(p)) {
          res.first_exit_step = k;
          break;
        }
  };
  record(0);
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * dt;
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = controls[i].at(t);
    x = rk4_step(specs, x, u, dt);
    record(k + 1);
  }
  return res;
}

}  // namespace mmp
