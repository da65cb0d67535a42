#pragma once
// Coupled agent dynamics  ẋ_i = f_i(x_i, x̄_i) + u_i  with
//   f_i = A_ii x_i + Σ_j A_ij x_j + Σ_j c_ij · sin²(x_i − x_j)   (sin² component-wise)
// and the analytic bounds that the robust controller relies on.

#include "mmp/geometry.hpp"
#include "mmp/vec2.hpp"

#include <span>
#include <vector>

namespace mmp {

struct NeighborCoupling {
  int agent = 0;        // index of the neighbor in the scenario (0-based)
  Mat2 gain;            // A_ij
  double sin2 = 0.0;    // c_ij
  friend bool operator==(const NeighborCoupling&, const NeighborCoupling&) = default;
};

struct DynamicsSpec {
  Mat2 self;                              // A_ii
  std::vector<NeighborCoupling> neighbors;
  double u_max = 0.0;
  double sensing = 0.0;                   // r̄
  friend bool operator==(const DynamicsSpec&, const DynamicsSpec&) = default;
};

/// f_i(x_i, x̄_i); x̄_i ordered as spec.neighbors. Throws ValidationError on count mismatch.
Vec2 eval_coupling(const DynamicsSpec& spec, const Vec2& xi, std::span<const Vec2> xbar);
/// ∂f_i/∂x_i.
Mat2 coupling_jacobian(const DynamicsSpec& spec, const Vec2& xi, std::span<const Vec2> xbar);

struct DerivedConstants {
  double M = 0.0;     // sup ‖f_i‖ over the workspace
  double L = 0.0;     // Lipschitz constant in x_i
  double Lbar = 0.0;  // Lipschitz constant in the stacked x̄_i
};

inline constexpr double kLipschitzFloor = 1e-9;

DerivedConstants derive_constants(const DynamicsSpec& spec, const Rect& bounds);

struct AgentContext {
  int id = 0;
  DynamicsSpec spec;
  double M = 0.0, L = 0.0, Lbar = 0.0;
  double rho_tilde = 0.0;  // 2√3·R·L̄·N / L
  double side = 0.0;       // hexagon side R

  std::size_t neighbor_count() const { return spec.neighbors.size(); }
};

AgentContext make_context(int id, const DynamicsSpec& spec, const Rect& bounds, double side);

/// ‖e0‖ + Δt·(M + u_max). Throws std::invalid_argument for Δt < 0.
double error_bound(double e0_norm, double dt, double M, double u_max);

/// min{ ρ̃(e^{LΔt} − 1), 2‖e0‖ + 2Δt(M + u_max) }.
double rho(const AgentContext& ctx, double dt, double e0_norm);

/// Piecewise-constant control: value pieces[k] on [t0 + k·step, t0 + (k+1)·step).
struct PiecewiseConstant {
  double t0 = 0.0;
  double step = 1.0;
  std::vector<Vec2> pieces;

  /// Value at t; holds the last piece beyond the end and zero when empty.
  Vec2 at(double t) const;
};

struct IntegrationResult {
  std::vector<double> times;                 // n + 1 sample times
  std::vector<std::vector<Vec2>> states;     // states[k][agent]
  int first_exit_step = -1;                  // first sample outside the workspace, -1 if none

  bool left_workspace() const { return first_exit_step >= 0; }
};

/// Fixed-step RK4 of the coupled system over [t0, t0 + steps·dt]. Controls are
/// sampled at the start of each step (dt must divide the control step).
IntegrationResult integrate(std::span<const DynamicsSpec> specs, std::span<const Vec2> x0,
                            std::span<const PiecewiseConstant> controls, double t0, double dt, int steps,
                            const Rect& bounds);

/// One RK4 step of the full system with constant controls.
std::vector<Vec2> rk4_step(std::span<const DynamicsSpec> specs, std::span<const Vec2> x, std::span<const Vec2> u,
                           double dt);

}  // namespace mmp
