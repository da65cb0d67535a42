#pragma once
// Metric Interval Temporal Logic: syntax tree, concrete syntax, and point-wise
// semantics over finite and lasso-shaped timed words.
//
// Concrete syntax (precedence unary > U > & > |, U right-associative):
//   phi := ident | true | false | !phi | phi & phi | phi | phi
//        | X[a,b] phi | F[a,b] phi | G[a,b] phi | phi U[a,b] phi | (phi)
// Bounds are decimals or p/q; the upper bound may be `inf`. A missing interval on
// F, G, X or U means [0,inf].

#include "mmp/time.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mmp {

enum class Op { atom, truth, neg, conj, disj, next, eventually, always, until };

struct Interval {
  Rational lo{0};
  ExtRational hi = ExtRational::infinity();

  bool contains(const Rational& d) const { return d >= lo && ExtRational(d) <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op = Op::truth;
  std::string name;    // atom
  Interval interval;   // temporal operators
  FormulaPtr lhs;      // unary operand, or left operand
  FormulaPtr rhs;      // right operand of binary operators
};

namespace mitl {
FormulaPtr atom(std::string name);
FormulaPtr truth();
FormulaPtr neg(FormulaPtr f);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);
/// Temporal constructors throw ValidationError unless 0 ≤ lo < hi.
FormulaPtr next(Interval i, FormulaPtr f);
FormulaPtr eventually(Interval i, FormulaPtr f);
FormulaPtr always(Interval i, FormulaPtr f);
FormulaPtr until(Interval i, FormulaPtr a, FormulaPtr b);
}  // namespace mitl

bool structurally_equal(const Formula& a, const Formula& b);
bool is_temporal(Op op);
/// No temporal operator anywhere in the tree.
bool is_propositional(const Formula& f);

/// Throws ParseError (syntax, with position) or ValidationError (bad interval).
FormulaPtr parse_mitl(std::string_view text);
/// Canonical concrete syntax; binary operators are always parenthesized.
std::string to_string(const Formula& f);

/// Conjunction of literals-only terms and temporal operators over propositional operands.
bool is_flat(const Formula& f);

void collect_atoms(const Formula& f, std::set<std::string>& out);

// ---------------------------------------------------------------------------
// Timed words

/// A letter is a bitmask over a word's alphabet (bit k = alphabet[k]).
using Letter = std::uint32_t;

struct TimedWord {
  std::vector<std::string> alphabet;
  std::vector<Letter> letters;
  std::vector<Rational> times;
  /// Lasso: positions [loop_start, size) repeat forever, each round shifted by period.
  std::optional<std::size_t> loop_start;
  Rational period{0};

  std::size_t size() const { return letters.size(); }
  bool is_lasso() const { return loop_start.has_value(); }
  /// Timestamp of any position (unrolled for lassos).
  Rational time_at(std::size_t pos) const;
  Letter letter_at(std::size_t pos) const;
  /// Smallest equivalent position (identity for finite words).
  std::size_t normalize(std::size_t pos) const;

  /// Throws ValidationError unless timestamps are strictly increasing, start ≥ 0, and
  /// a lasso has a non-empty cycle with period beyond the last cycle gap.
  void validate() const;
};

/// Finite word from explicit label sets; alphabet sorted.
TimedWord make_finite_word(const std::vector<std::set<std::string>>& labels, const std::vector<Rational>& times,
                           std::vector<std::string> alphabet);
/// Lasso word with timestamps μ·step and the cycle starting at loop_start.
TimedWord make_lasso_word(const std::vector<std::set<std::string>>& labels, std::size_t loop_start,
                          const Rational& step, std::vector<std::string> alphabet);

Letter encode_letter(const std::vector<std::string>& alphabet, const std::set<std::string>& labels);
std::set<std::string> decode_letter(const std::vector<std::string>& alphabet, Letter l);

enum class Verdict { False, True, Inconclusive };
std::string_view to_string(Verdict v);

/// Point-wise semantics; finite words give Inconclusive when they end before an
/// operator's window closes.
Verdict evaluate(const Formula& f, const TimedWord& w, std::size_t pos = 0);
/// As evaluate; throws InconclusiveError instead of returning Inconclusive and
/// std::out_of_range for positions past the end of a finite word.
bool eval_mitl(const Formula& f, const TimedWord& w, std::size_t pos = 0);

/// Truth of a propositional formula on a letter (atoms outside the alphabet are false).
bool eval_letter(const Formula& f, const std::vector<std::string>& alphabet, Letter l);

}  // namespace mmp
