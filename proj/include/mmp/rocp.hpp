#pragma once
// Sampled-data robust optimal control for one region-to-region transition.
//
// The error e = x − x_des is driven to the terminal set ‖e‖ ≤ r_term at exactly
// t_k + T. At each sample z the horizon is T − z·h and the prediction holds the
// neighbors frozen at their current estimates. The state constraints (stay in the
// union of source and target hexagons, stay within sensing range of every
// neighbor, stay in the workspace) are tightened by ρ so that the real state keeps
// them despite neighbor motion.

#include "mmp/dynamics.hpp"
#include "mmp/geometry.hpp"
#include "mmp/kernels.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mmp {

struct CostWeights {
  Mat2 Q = Mat2::identity();
  Mat2 R = Mat2::identity();
  Mat2 P = Mat2::identity();

  double m_low() const;   // smallest diagonal entry over Q, R, P
  double m_high() const;  // largest diagonal entry over Q, R, P
  /// Diagonal with Q ≥ 0 and R, P > 0; throws ValidationError otherwise.
  void validate() const;
  friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

double running_cost(const Vec2& e, const Vec2& u, const CostWeights& w);
double terminal_cost(const Vec2& e, const CostWeights& w);
/// 2·ε̄·σ_max(Q).
double lipschitz_F(const CostWeights& w, double eps_bar);
/// 2·σ_max(P)·√(α₁/λ_min(P)).
double lipschitz_V(const CostWeights& w, double alpha1);
/// sup ‖e‖ over the union of two adjacent hexagons, measured from the target center.
double pair_union_radius(double side);

struct TerminalIngredients {
  double kappa = 0.0;    // κ(e) = u_ss − κ·e
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double r_phi = 0.0;    // √(α₁/λ_min(P))
  double r_term = 0.0;   // √(α₂/λ_min(P))
  double eps_bar = 0.0;
  double L_F = 0.0;
  double L_V = 0.0;
  double rho_bar = 0.0;  // (α₁ − α₂)/L_V
};

/// Sweeps κ and α₁ and checks the local decrease condition on sampled errors,
/// targets and neighbor positions. Throws TerminalDesignError when nothing passes.
TerminalIngredients design_terminal(const AgentContext& ctx, const CostWeights& w, const Partition& p,
                                    std::uint64_t seed = 1, int samples = 1000);

/// Left side of the decrease condition: 2eᵀP[f(x+e, x̄) − f(x, x̄) − κe] + eᵀQe + κ²eᵀRe.
double terminal_decrease(const AgentContext& ctx, const CostWeights& w, double kappa, const Vec2& x_des,
                         const Vec2& e, const std::vector<Vec2>& xbar);

enum class Tightening { horizon, sampled };
std::string_view to_string(Tightening t);
Tightening parse_tightening(std::string_view s);

struct SolverConfig {
  int starts = 16;
  int iterations = 200;
  int warm_iterations = 0;  // optimizer iterations for a warm-started re-solve
  double keep_tolerance = 1e-4;  // relative gain below which the start is kept as is
  Tightening tightening = Tightening::horizon;
  int substeps = 1;          // optimizer model steps per sampling period
  int dense_factor = 20;     // verification steps per sampling period
  double penalty = 1e4;
  double margin = 1e-2;      // internal constraint margin of the optimizer
  int budget = -1;           // max dense verifications per solve, -1 unlimited
  int refine = 2;            // starts optimized in full at z = 0
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Everything fixed for one (agent, source, direction) transition.
struct RocpProblem {
  const AgentContext* ctx = nullptr;
  const Partition* partition = nullptr;
  CostWeights weights;
  TerminalIngredients terminal;
  SolverConfig config;
  int src = 0;
  int dir = 0;
  int dst = 0;
  Vec2 x_des;
  kernels::PolygonEdges union_edges;
  double h = 0.0;
  int m = 0;
};

/// Throws ValidationError when there is no neighbor in direction dir.
RocpProblem make_problem(const AgentContext& ctx, const Partition& p, const CostWeights& w,
                         const TerminalIngredients& term, const SolverConfig& cfg, int src, int dir, double h, int m);

struct RocpInstance {
  const RocpProblem* problem = nullptr;
  int z = 0;
  Vec2 e0;                       // measured error at t_{k_z}
  std::vector<Vec2> neighbors;   // frozen estimates x̂̄

  int pieces() const { return problem->m - z; }
  double horizon() const { return pieces() * problem->h; }
};

/// Tightening radius at s − t_{k_z} = s_rel.
double tightening_radius(const RocpInstance& inst, double s_rel);

/// Strict membership of the predicted error in the tightened constraint set.
bool tightened_membership(const RocpInstance& inst, const Vec2& e_hat, double s_rel);

/// Untightened constraint set with explicit (true) neighbor positions.
bool state_admissible(const RocpProblem& prob, const Vec2& x, const std::vector<Vec2>& neighbors);

struct DenseTrajectory {
  std::vector<Vec2> x;           // absolute positions on the h/dense_factor grid
};

struct RocpSolution {
  std::vector<Vec2> controls;    // one piece per remaining sampling period
  double cost = 0.0;             // discrete cost on the verified trajectory
  DenseTrajectory dense;
  int verifications = 0;
  bool reused_warm = false;
};

struct WarmStart {
  std::vector<Vec2> controls;
  /// Dense trajectory of exactly these controls from the instance's state, if known.
  std::optional<DenseTrajectory> dense;
};

std::optional<RocpSolution> solve_rocp(const RocpInstance& inst, const WarmStart* warm = nullptr);

/// Discrete cost of a dense trajectory under the given controls.
double trajectory_cost(const RocpInstance& inst, const std::vector<Vec2>& controls, const DenseTrajectory& traj);

/// Integrates a single agent with frozen neighbors on the dense grid.
DenseTrajectory integrate_frozen(const RocpProblem& prob, const Vec2& x0, const std::vector<Vec2>& neighbors,
                                 const std::vector<Vec2>& controls);

struct TransitionPlan {
  int src = 0;
  int dir = 0;
  int dst = 0;
  std::vector<Vec2> controls;    // m pieces actually applied
  std::vector<double> costs;     // J* at each sample z
  std::vector<Vec2> nominal;     // state at each sample, m + 1 entries
  Vec2 terminal_error;
  int rho_bar_violations = 0;
  int solver_calls = 0;
};

/// Nominal sampled-data loop: solve, apply the first piece, re-solve with the
/// shrunk horizon. Neighbors are frozen at the given snapshots throughout.
std::optional<TransitionPlan> transition_controller(const RocpProblem& prob, const Vec2& x0,
                                                    const std::vector<Vec2>& neighbors);

}  // namespace mmp
