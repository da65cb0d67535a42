#pragma once
// Per-agent abstraction: breadth-first exploration of region transitions with the
// sampled-data controller, and the resulting weighted transition system.

#include "mmp/rocp.hpp"
#include "mmp/wts.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mmp {

/// Successful transitions keyed by (source region, direction).
struct TransitMatrix {
  std::map<std::pair<int, int>, TransitionPlan> plans;
  int initial_region = 0;
  int attempted = 0;       // (region, dir) pairs tried
  long solver_calls = 0;   // ROCP solves across all attempts

  const TransitionPlan* find(int src, int dir) const;
};

/// Fixed inputs of one agent's exploration.
struct AbstractionSetup {
  const AgentContext* ctx = nullptr;
  const Partition* partition = nullptr;
  CostWeights weights;
  TerminalIngredients terminal;
  SolverConfig config;
  double h = 0.0;
  int m = 0;
  std::vector<Vec2> neighbor_snapshot;  // x̂̄ used for every transition
};

/// Explores from point_to_region(x0). Every transition starts from the source
/// region's center; frontier layers are visited in ascending region id, then dir.
TransitMatrix create_transition_relation(const AbstractionSetup& s, const Vec2& x0);

/// One transition per stored plan, weight T, labels restricted to the alphabet.
WTS build_wts(const TransitMatrix& tm, const Partition& p, const std::vector<std::string>& alphabet,
              const Rational& T);

/// "src, dir, dst, piece, ux, uy" control tables, one block per plan.
std::string dump_plans(const TransitMatrix& tm);

}  // namespace mmp
