#pragma once

#include <string>

// Two uncoupled integrators on a 6 x 6 workspace; quick to synthesize and simulate.
inline std::string small_scenario_text(const std::string& formula1 = "F[0,4] goal",
                                       const std::string& formula2 = "G[0,2] !goal") {
  return "mmp-scenario v1\n"
         "workspace -3 3 -3 3\n"
         "side 1\n"
         "period 1\n"
         "sampling 1/4\n"
         "horizon_cycles 1\n"
         "seed 1\n"
         "label goal 1.5 0.8660254037844386\n"
         "solver\n"
         "  tightening sampled\n"
         "  starts 8\n"
         "end\n"
         "agent 1\n"
         "  position 0 0\n"
         "  self 0 0 0 0\n"
         "  neighbor 2 gain 0 0 0 0 sin2 0\n"
         "  u_max 10\n"
         "  sensing 8\n"
         "  formula " + formula1 + "\n"
         "end\n"
         "agent 2\n"
         "  position 0 -2rh\n"
         "  self 0 0 0 0\n"
         "  neighbor 1 gain 0 0 0 0 sin2 0\n"
         "  u_max 10\n"
         "  sensing 8\n"
         "  formula " + formula2 + "\n"
         "end\n";
}
