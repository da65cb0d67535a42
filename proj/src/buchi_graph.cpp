#include "mmp/buchi_graph.hpp"

#include <algorithm>
#include <deque>
#include <utility>

namespace mmp {

bool has_accepting_cycle(const ExplicitGraph& g) {
  const std::size_t n = g.size();
  std::vector<char> blue(n, 0), red(n, 0), on_stack(n, 0);
  // Outer DFS frames: (node, next successor index).
  std::vector<std::pair<int, std::size_t>> outer;
  std::vector<std::pair<int, std::size_t>> inner;

  auto red_search = [&](int seed) {
    inner.clear();
    red[static_cast<std::size_t>(seed)] = 1;
    inner.emplace_back(seed, 0);
    while (!inner.empty()) {
      auto& [v, k] = inner.back();
      const auto& out = g.succ[static_cast<std::size_t>(v)];
      if (k == out.size()) {
        inner.pop_back();
        continue;
      }
      const int w = out[k++];
      if (on_stack[static_cast<std::size_t>(w)]) return true;
      if (!red[static_cast<std::size_t>(w)]) {
        red[static_cast<std::size_t>(w)] = 1;
        inner.emplace_back(w, 0);
      }
    }
    return false;
  };

  for (int s : g.initial) {
    if (blue[static_cast<std::size_t>(s)]) continue;
    blue[static_cast<std::size_t>(s)] = 1;
    on_stack[static_cast<std::size_t>(s)] = 1;
    outer.emplace_back(s, 0);
    while (!outer.empty()) {
      auto& [v, k] = outer.back();
      const auto& out = g.succ[static_cast<std::size_t>(v)];
      if (k < out.size()) {
        const int w = out[k++];
        if (!blue[static_cast<std::size_t>(w)]) {
          blue[static_cast<std::size_t>(w)] = 1;
          on_stack[static_cast<std::size_t>(w)] = 1;
          outer.emplace_back(w, 0);
        }
        continue;
      }
      const int done = v;
      if (g.accepting[static_cast<std::size_t>(done)] && red_search(done)) return true;
      on_stack[static_cast<std::size_t>(done)] = 0;
      outer.pop_back();
    }
  }
  return false;
}

namespace {

// Iterative Tarjan; marks nodes that lie on some cycle.
std::vector<char> on_cycle(const ExplicitGraph& g) {
  const std::size_t n = g.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> in_stack(n, 0), cyc(n, 0);
  std::vector<int> stack;
  std::vector<std::pair<int, std::size_t>> frames;
  int counter = 0;
  int comps = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    frames.emplace_back(static_cast<int>(root), 0);
    index[root] = low[root] = counter++;
    stack.push_back(static_cast<int>(root));
    in_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, k] = frames.back();
      const auto uv = static_cast<std::size_t>(v);
      if (k < g.succ[uv].size()) {
        const int w = g.succ[uv][k++];
        const auto uw = static_cast<std::size_t>(w);
        if (index[uw] < 0) {
          index[uw] = low[uw] = counter++;
          stack.push_back(w);
          in_stack[uw] = 1;
          frames.emplace_back(w, 0);
        } else if (in_stack[uw]) {
          low[uv] = std::min(low[uv], index[uw]);
        }
        continue;
      }
      if (low[uv] == index[uv]) {
        std::vector<int> members;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          in_stack[static_cast<std::size_t>(w)] = 0;
          comp[static_cast<std::size_t>(w)] = comps;
          members.push_back(w);
        } while (w != v);
        bool cyclic = members.size() > 1;
        if (!cyclic) {
          const auto& out = g.succ[uv];
          cyclic = std::find(out.begin(), out.end(), v) != out.end();
        }
        if (cyclic)
          for (int m : members) cyc[static_cast<std::size_t>(m)] = 1;
        ++comps;
      }
      const int finished = v;
      frames.pop_back();
      if (!frames.empty()) {
        const auto up = static_cast<std::size_t>(frames.back().first);
        low[up] = std::min(low[up], low[static_cast<std::size_t>(finished)]);
      }
    }
  }
  return cyc;
}

}  // namespace

std::optional<LassoPath> find_lasso(const ExplicitGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) return std::nullopt;
  const auto cyc = on_cycle(g);
  std::vector<int> parent(n, -2);
  std::deque<int> queue;
  for (int s : g.initial) {
    if (parent[static_cast<std::size_t>(s)] != -2) continue;
    parent[static_cast<std::size_t>(s)] = -1;
    queue.push_back(s);
  }
  int target = -1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (g.accepting[static_cast<std::size_t>(v)] && cyc[static_cast<std::size_t>(v)]) {
      target = v;
      break;
    }
    for (int w : g.succ[static_cast<std::size_t>(v)]) {
      if (parent[static_cast<std::size_t>(w)] != -2) continue;
      parent[static_cast<std::size_t>(w)] = v;
      queue.push_back(w);
    }
  }
  if (target < 0) return std::nullopt;

  LassoPath lasso;
  for (int v = parent[static_cast<std::size_t>(target)]; v >= 0; v = parent[static_cast<std::size_t>(v)])
    lasso.prefix.push_back(v);
  std::reverse(lasso.prefix.begin(), lasso.prefix.end());

  // Shortest cycle back to target.
  std::vector<int> back(n, -2);
  queue.clear();
  back[static_cast<std::size_t>(target)] = -1;
  queue.push_back(target);
  int last = -1;
  while (!queue.empty() && last < 0) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : g.succ[static_cast<std::size_t>(v)]) {
      if (w == target) {
        last = v;
        break;
      }
      if (back[static_cast<std::size_t>(w)] != -2) continue;
      back[static_cast<std::size_t>(w)] = v;
      queue.push_back(w);
    }
  }
  for (int v = last; v >= 0; v = back[static_cast<std::size_t>(v)]) lasso.cycle.push_back(v);
  std::reverse(lasso.cycle.begin(), lasso.cycle.end());
  return lasso;
}

}  // namespace mmp
