#pragma once
// Timed Büchi automata with location labels, clock constraints over exact
// rationals, and translation of flat MITL formulas.
//
// Run semantics over a timed word: location q_μ reads letter w(μ), which must
// satisfy the location's letter predicate. A step q_μ → q_{μ+1} takes an edge
// whose guard holds on ν_μ; ν_{μ+1} = ν_μ + (τ(μ+1) − τ(μ)) except reset clocks,
// which become 0; the invariant of q_{μ+1} must hold on ν_{μ+1}. All clocks are 0
// at position 0, where the invariant of the initial location must also hold.

#include "mmp/mitl.hpp"
#include "mmp/time.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mmp {

enum class Cmp { lt, le, eq, ge, gt };

struct ClockConstraint {
  enum class Kind { top, atom, neg, conj };
  Kind kind = Kind::top;
  int clock = 0;
  Cmp cmp = Cmp::le;
  Rational constant{0};
  std::vector<ClockConstraint> children;

  static ClockConstraint top() { return {}; }
  static ClockConstraint atom(int clock, Cmp cmp, Rational c);
  static ClockConstraint negation(ClockConstraint a);
  static ClockConstraint conjunction(ClockConstraint a, ClockConstraint b);
  /// a ≤ c ≤ b (upper part dropped when b = ∞).
  static ClockConstraint within(int clock, const Interval& iv);
};

using ClockValuation = std::vector<ExtRational>;

/// Throws ValidationError when a clock index is outside the valuation.
bool eval_clock_constraint(const ClockConstraint& c, const ClockValuation& v);

/// 0 if reset; ν + d if finite and ≤ C_max; ∞ otherwise.
ExtRational clock_update(const ExtRational& v, const Rational& d, bool reset, const Rational& c_max);

struct TbaLocation {
  std::string name;
  FormulaPtr letters;            // propositional predicate over admissible letters
  ClockConstraint invariant;
  bool initial = false;
  bool accepting = false;
};

struct TbaEdge {
  int from = 0;
  int to = 0;
  ClockConstraint guard;
  std::vector<int> resets;       // ascending clock indices
};

struct TBA {
  std::vector<std::string> alphabet;
  std::vector<std::string> clocks;
  std::vector<TbaLocation> locations;
  std::vector<TbaEdge> edges;

  std::vector<int> initial_locations() const;
  /// Edge indices leaving each location, in insertion order.
  std::vector<std::vector<int>> outgoing() const;
  /// Largest constant in any guard or invariant (0 if none).
  Rational c_max() const;
  bool letter_ok(int loc, const std::vector<std::string>& word_alphabet, Letter l) const;
};

/// Multiplies every constant by the LCM of their denominators; returns the factor.
std::pair<TBA, std::int64_t> scale_to_integers(const TBA& a);
/// Multiplies all timestamps (and the period) of a word by factor.
TimedWord scale_word(const TimedWord& w, std::int64_t factor);

/// One clock per temporal term, synchronized product for conjunctions.
/// The alphabet defaults to the formula's atoms. Throws ValidationError if not flat.
TBA mitl_to_tba(const Formula& f, std::vector<std::string> alphabet = {});

/// Acceptance of a lasso word (throws ValidationError for finite words).
bool tba_accepts(const TBA& a, const TimedWord& w);

/// Synchronized product: both components read the same letter and advance together.
TBA synchronized_product(const TBA& a, const TBA& b);

std::string to_string(const ClockConstraint& c, const std::vector<std::string>& clocks);
std::string dump_tba(const TBA& a);

}  // namespace mmp
