#pragma once
// Synthesis orchestration (abstraction, automaton, product, accepting run) and
// the synchronized closed-loop realization of every agent's run.

#include "mmp/abstraction.hpp"
#include "mmp/product.hpp"
#include "mmp/scenario.hpp"
#include "mmp/tba.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mmp {

struct AgentSynthesis {
  int agent = 0;  // 0-based
  AgentContext ctx;
  TerminalIngredients terminal;
  TransitMatrix transit;
  std::vector<std::string> alphabet;
  WTS wts;
  FormulaPtr formula;
  TBA tba;
  std::size_t product_states = 0;
  ProductRun product_run;
  WtsRun run;
  std::string run_dump;

  /// Region and action of the infinite run at position μ.
  int region_at(std::size_t mu) const;
  int action_at(std::size_t mu) const;
};

struct Synthesis {
  std::shared_ptr<const Partition> partition;
  std::vector<AgentSynthesis> agents;
};

/// Throws UnsatisfiableError naming the first agent whose product has no accepting run.
Synthesis synthesize_all(const Scenario& s);

struct TransitionRecord {
  int agent = 0;  // 0-based
  int k = 0;
  int src = 0, dir = 0, dst = 0;
  Vec2 start, end;
  double terminal_error = 0.0;
  std::vector<double> costs;       // J* at each re-solve
  std::vector<double> error_norms; // ‖e(t_kz)‖ at each re-solve
  int rho_bar_violations = 0;
  bool stayed_in_union = true;
};

struct Trace {
  int agents = 0;
  Rational period{0};
  int samples_per_period = 0;      // m · dense_factor
  std::vector<double> times;
  std::vector<std::vector<Vec2>> x;      // [sample][agent]
  std::vector<std::vector<Vec2>> u;      // control active from each sample on
  std::vector<std::vector<int>> region;  // point_to_region at each sample
  std::vector<std::vector<LabelSet>> labels;
  std::vector<std::vector<int>> planned; // [agent][μ] run regions for μ = 0..K
  std::vector<TransitionRecord> transitions;

  int intervals() const { return samples_per_period ? static_cast<int>((times.size() - 1) / samples_per_period) : 0; }
};

struct SimulationOptions {
  int cycles = -1;   // lasso cycles to execute, -1 uses the scenario value
  int budget = -2;   // solver budget override, -2 keeps the scenario value
};

/// Throws InfeasibleError(agent, k, z) when a closed-loop re-solve fails.
Trace simulate_closed_loop(const Scenario& s, const Synthesis& syn, const SimulationOptions& opt = {});

/// Relaxed timed word of one agent: the letter at each t = μT with timestamp μT.
TimedWord relaxed_word(const Trace& t, int agent, const std::vector<std::string>& alphabet);

/// Region entries (time, region) along the trace.
std::vector<std::pair<double, int>> region_crossings(const Trace& t, int agent);

struct AgentReport {
  int agent = 0;  // 1-based
  std::string formula;
  Verdict verdict = Verdict::Inconclusive;       // realized relaxed word
  Verdict planned_verdict = Verdict::Inconclusive;  // synthesized lasso word
  bool automaton_agrees = true;
  bool follows_run = true;          // region at every μT matches the run
  bool stayed_in_unions = true;
  double max_terminal_error = 0.0;
  double r_term = 0.0;
  int rho_bar_violations = 0;
  int cost_monitor_violations = 0;
  double cost_monitor_worst = -1e300;  // max of ΔJ − bound
};

struct Report {
  std::vector<AgentReport> agents;
  double max_neighbor_distance = 0.0;
  double sensing = 0.0;
  bool connected = true;

  bool satisfied() const;
  std::string text() const;
};

/// Cost-decrease bound between consecutive re-solves: (T − 2h)ρ(h)L_F + ρ(h)L_V.
double cost_decrease_bound(const AgentContext& ctx, const TerminalIngredients& term, double T, double h,
                           double e_norm);

Report check_trace(const Trace& t, const Scenario& s, const Synthesis& syn);

/// "t, x1, y1, u1x, u1y, …, region_1, …, labels_1, …" preceded by a "# mmp-trace" line.
std::string trace_csv(const Trace& t);
/// Reads the columns needed to rebuild relaxed words.
Trace parse_trace_csv(const std::string& text);

}  // namespace mmp
