#pragma once
// Line-oriented scenario files, header "mmp-scenario v1".
//
//   workspace <xmin> <xmax> <ymin> <ymax>
//   side <R>
//   period <T>                  rational
//   sampling <h>                rational, T/h must be an integer
//   horizon_cycles <n>
//   min_intervals <n>
//   seed <n>
//   label <name> <x> <y>        labels the region containing (x, y)
//   solver ... end
//   agent <id> ... end
//
// Coordinates accept a trailing "rh" (multiples of the inscribed radius). Lines
// starting with '#' are comments.

#include "mmp/dynamics.hpp"
#include "mmp/rocp.hpp"
#include "mmp/time.hpp"

#include <string>
#include <vector>

namespace mmp {

struct LabelPoint {
  std::string name;
  Vec2 at;
  friend bool operator==(const LabelPoint&, const LabelPoint&) = default;
};

struct AgentScenario {
  int id = 1;               // 1-based
  Vec2 position;
  DynamicsSpec dynamics;    // neighbor agents stored 0-based
  std::string formula;
  CostWeights weights;
  friend bool operator==(const AgentScenario&, const AgentScenario&) = default;
};

struct Scenario {
  Rect workspace;
  double side = 1.0;
  Rational period{1};
  Rational sampling{1};
  int horizon_cycles = 2;
  int min_intervals = 0;
  std::uint64_t seed = 1;
  std::vector<LabelPoint> labels;
  SolverConfig solver;
  std::vector<AgentScenario> agents;

  int samples_per_period() const;
  double T() const { return to_double(period); }
  double h() const { return to_double(sampling); }
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ValidationError with "line N: ..." diagnostics.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string print_scenario(const Scenario& s);

/// Semantic checks shared by the parser and programmatic construction.
void validate_scenario(const Scenario& s);

/// Partition with the scenario labels attached.
Partition scenario_partition(const Scenario& s);

}  // namespace mmp
