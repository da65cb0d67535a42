#pragma once
// Weighted transition system over partition regions. Every transition moves to an
// adjacent region in exactly one period T; the action is the direction 1..6.

#include "mmp/mitl.hpp"
#include "mmp/time.hpp"

#include <map>
#include <string>
#include <vector>

namespace mmp {

struct WtsTransition {
  int src = 0;
  int action = 0;  // direction 1..6
  int dst = 0;
  Rational weight{0};
  friend bool operator==(const WtsTransition&, const WtsTransition&) = default;
};

struct WTS {
  std::vector<std::string> alphabet;
  std::vector<int> states;             // region ids, ascending
  std::map<int, Letter> labels;        // region id → letter over alphabet
  std::vector<int> initial;
  std::vector<WtsTransition> transitions;  // ascending (src, action)

  /// Transition indices leaving each state.
  std::map<int, std::vector<int>> outgoing() const;
  Letter label(int state) const;
};

/// "src_region, dir, dst_region, weight" per transition, plus state labels.
std::string dump_wts(const WTS& t);

}  // namespace mmp
