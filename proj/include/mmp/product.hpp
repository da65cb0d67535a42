#pragma once
// Büchi WTS: reachable product of a WTS and a TBA with saturating clocks, plus
// accepting-lasso search and projection back onto the WTS.

#include "mmp/buchi_graph.hpp"
#include "mmp/tba.hpp"
#include "mmp/wts.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mmp {

struct ProductState {
  int region = 0;
  int location = 0;
  ClockValuation clocks;
};

struct BuchiWTS {
  std::vector<ProductState> states;
  ExplicitGraph graph;                      // successors ascending (region, location, clocks)
  std::vector<std::vector<int>> actions;    // actions[v][k] = WTS action of graph.succ[v][k]
  Rational c_max{0};
  Rational step{0};                         // common transition weight

  std::size_t size() const { return states.size(); }
};

/// Throws ValidationError if the alphabets differ or WTS weights are not uniform.
BuchiWTS build_product(const WTS& t, const TBA& a);

/// Accepting lasso of product states with timestamps μ·T.
struct ProductRun {
  std::vector<int> states;       // prefix then cycle
  std::size_t loop_start = 0;
  Rational step{0};

  Rational time_at(std::size_t mu) const { return step * static_cast<std::int64_t>(mu); }
};

std::optional<ProductRun> find_accepting_run(const BuchiWTS& b);

struct WtsRun {
  std::vector<int> regions;
  std::vector<int> actions;      // actions[μ] moves regions[μ] to the next position (cycle closes)
  std::size_t loop_start = 0;
  Rational step{0};

  bool empty() const { return regions.empty(); }
};

WtsRun project_run(const BuchiWTS& b, const ProductRun& run);
/// Lasso word of a WTS run: letters L(r(μ)), timestamps μ·T.
TimedWord run_word(const WTS& t, const WtsRun& run);

/// "μ, region, tba_location, clock values, τ(μ)" per position, cycle marked.
std::string dump_run(const BuchiWTS& b, const ProductRun& run, const TBA& a);

}  // namespace mmp
