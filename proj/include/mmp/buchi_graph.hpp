#pragma once
// Büchi acceptance on explicit finite graphs: nested DFS emptiness and a
// deterministic lasso choice (shallowest accepting state on a cycle, ties in BFS
// discovery order, then the shortest cycle through it).

#include <optional>
#include <vector>

namespace mmp {

struct ExplicitGraph {
  std::vector<std::vector<int>> succ;
  std::vector<char> accepting;
  std::vector<int> initial;

  int add_node(bool acc) {
    succ.emplace_back();
    accepting.push_back(acc ? 1 : 0);
    return static_cast<int>(succ.size()) - 1;
  }
  std::size_t size() const { return succ.size(); }
};

/// Nested depth-first search: some accepting node is reachable and lies on a cycle.
bool has_accepting_cycle(const ExplicitGraph& g);

struct LassoPath {
  std::vector<int> prefix;  // nodes before the cycle
  std::vector<int> cycle;   // cycle[0] is accepting; the last node steps back to cycle[0]
};

std::optional<LassoPath> find_lasso(const ExplicitGraph& g);

}  // namespace mmp
