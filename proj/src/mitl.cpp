#include "mmp/mitl.hpp"

#include "mmp/errors.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace mmp {

namespace mitl {

namespace {
FormulaPtr make(Op op, std::string name, Interval iv, FormulaPtr lhs, FormulaPtr rhs) {
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->name = std::move(name);
  f->interval = iv;
  f->lhs = std::move(lhs);
  f->rhs = std::move(rhs);
  return f;
}

void check_interval(const Interval& i) {
  if (i.lo < Rational(0)) throw ValidationError("interval lower bound must be nonnegative");
  if (!(ExtRational(i.lo) < i.hi))
    throw ValidationError("interval [" + to_string(i.lo) + "," + to_string(i.hi) + "] must satisfy a < b");
}
}  // namespace

FormulaPtr atom(std::string name) { return make(Op::atom, std::move(name), {}, nullptr, nullptr); }
FormulaPtr truth() { return make(Op::truth, "", {}, nullptr, nullptr); }
FormulaPtr neg(FormulaPtr f) { return make(Op::neg, "", {}, std::move(f), nullptr); }
FormulaPtr conj(FormulaPtr a, FormulaPtr b) { return make(Op::conj, "", {}, std::move(a), std::move(b)); }
FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return make(Op::disj, "", {}, std::move(a), std::move(b)); }
FormulaPtr next(Interval i, FormulaPtr f) {
  check_interval(i);
  return make(Op::next, "", i, std::move(f), nullptr);
}
FormulaPtr eventually(Interval i, FormulaPtr f) {
  check_interval(i);
  return make(Op::eventually, "", i, std::move(f), nullptr);
}
FormulaPtr always(Interval i, FormulaPtr f) {
  check_interval(i);
  return make(Op::always, "", i, std::move(f), nullptr);
}
FormulaPtr until(Interval i, FormulaPtr a, FormulaPtr b) {
  check_interval(i);
  return make(Op::until, "", i, std::move(a), std::move(b));
}

}  // namespace mitl

bool is_temporal(Op op) { return op == Op::next || op == Op::eventually || op == Op::always || op == Op::until; }

bool is_propositional(const Formula& f) {
  if (is_temporal(f.op)) return false;
  if (f.lhs && !is_propositional(*f.lhs)) return false;
  if (f.rhs && !is_propositional(*f.rhs)) return false;
  return true;
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.op != b.op) return false;
  if (a.op == Op::atom) return a.name == b.name;
  if (is_temporal(a.op) && !(a.interval == b.interval)) return false;
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
  if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
  if (a.lhs && !structurally_equal(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !structurally_equal(*a.rhs, *b.rhs)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  FormulaPtr parse() {
    auto f = parse_or();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  // Operator letter F/G/X/U counts as an operator when followed by '[' or by a
  // non-identifier character.
  bool at_operator(char letter) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != letter) return false;
    const std::size_t n = pos_ + 1;
    if (n >= s_.size()) return false;
    const char c = s_[n];
    return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_');
  }

  std::string number_token() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '/' || s_[pos_] == '-' || s_[pos_] == '+'))
      ++pos_;
    if (start == pos_) fail("expected a number");
    return std::string(s_.substr(start, pos_ - start));
  }

  Interval parse_interval_or_default() {
    if (!peek('[')) return Interval{};
    const std::size_t open = pos_;
    expect('[');
    Interval iv;
    const std::size_t lo_pos = pos_;
    try {
      iv.lo = parse_rational(number_token());
    } catch (const std::invalid_argument&) {
      pos_ = lo_pos;
      fail("bad interval bound");
    }
    expect(',');
    const std::size_t hi_pos = pos_;
    try {
      iv.hi = parse_ext_rational(number_token());
    } catch (const std::invalid_argument&) {
      pos_ = hi_pos;
      fail("bad interval bound");
    }
    expect(']');
    if (iv.lo < Rational(0) || !(ExtRational(iv.lo) < iv.hi))
      throw ValidationError("interval at position " + std::to_string(open) + " must satisfy 0 <= a < b");
    return iv;
  }

  FormulaPtr parse_or() {
    auto f = parse_and();
    while (accept('|')) f = mitl::disj(f, parse_and());
    return f;
  }

  FormulaPtr parse_and() {
    auto f = parse_until();
    while (accept('&')) f = mitl::conj(f, parse_until());
    return f;
  }

  FormulaPtr parse_until() {
    auto f = parse_unary();
    if (at_operator('U')) {
      ++pos_;
      const Interval iv = parse_interval_or_default();
      auto rhs = parse_until();
      return mitl::until(iv, f, rhs);
    }
    return f;
  }

  FormulaPtr parse_unary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of formula");
    if (accept('!')) return mitl::neg(parse_unary());
    if (accept('(')) {
      auto f = parse_or();
      expect(')');
      return f;
    }
    for (char letter : {'X', 'F', 'G'}) {
      if (at_operator(letter)) {
        ++pos_;
        const Interval iv = parse_interval_or_default();
        auto operand = parse_unary();
        if (letter == 'X') return mitl::next(iv, operand);
        if (letter == 'F') return mitl::eventually(iv, operand);
        return mitl::always(iv, operand);
      }
    }
    const char c = s_[pos_];
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail("unexpected '" + std::string(1, c) + "'");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id(s_.substr(start, pos_ - start));
    if (id == "true") return mitl::truth();
    if (id == "false") return mitl::neg(mitl::truth());
    return mitl::atom(id);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string interval_text(const Interval& i) { return "[" + to_string(i.lo) + "," + to_string(i.hi) + "]"; }

}  // namespace

FormulaPtr parse_mitl(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Formula& f) {
  switch (f.op) {
    case Op::atom: return f.name;
    case Op::truth: return "true";
    case Op::neg: return "!" + to_string(*f.lhs);
    case Op::conj: return "(" + to_string(*f.lhs) + " & " + to_string(*f.rhs) + ")";
    case Op::disj: return "(" + to_string(*f.lhs) + " | " + to_string(*f.rhs) + ")";
    case Op::next: return "X" + interval_text(f.interval) + " " + to_string(*f.lhs);
    case Op::eventually: return "F" + interval_text(f.interval) + " " + to_string(*f.lhs);
    case Op::always: return "G" + interval_text(f.interval) + " " + to_string(*f.lhs);
    case Op::until:
      return "(" + to_string(*f.lhs) + " U" + interval_text(f.interval) + " " + to_string(*f.rhs) + ")";
  }
  return {};
}

bool is_flat(const Formula& f) {
  if (f.op == Op::conj) return is_flat(*f.lhs) && is_flat(*f.rhs);
  if (is_propositional(f)) return true;
  if (!is_temporal(f.op)) return false;
  if (!is_propositional(*f.lhs)) return false;
  return !f.rhs || is_propositional(*f.rhs);
}

void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.op == Op::atom) out.insert(f.name);
  if (f.lhs) collect_atoms(*f.lhs, out);
  if (f.rhs) collect_atoms(*f.rhs, out);
}

// ---------------------------------------------------------------------------
// Timed words

Rational TimedWord::time_at(std::size_t pos) const {
  if (pos < size()) return times[pos];
  if (!loop_start) throw std::out_of_range("position past the end of a finite word");
  const std::size_t l = *loop_start;
  const std::size_t c = size() - l;
  const auto rounds = static_cast<std::int64_t>((pos - l) / c);
  return times[l + (pos - l) % c] + period * rounds;
}

Letter TimedWord::letter_at(std::size_t pos) const { return letters.at(normalize(pos)); }

std::size_t TimedWord::normalize(std::size_t pos) const {
  if (!loop_start || pos < size()) return pos;
  const std::size_t l = *loop_start;
  return l + (pos - l) % (size() - l);
}

void TimedWord::validate() const {
  if (letters.size() != times.size()) throw ValidationError("timed word: letters and times differ in length");
  if (letters.empty()) throw ValidationError("timed word is empty");
  if (times.front() < Rational(0)) throw ValidationError("timed word starts before 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i - 1] < times[i])) throw ValidationError("timestamps must be strictly increasing");
  if (loop_start) {
    if (*loop_start >= size()) throw ValidationError("lasso cycle is empty");
    if (!(times[*loop_start] + period > times.back())) throw ValidationError("lasso period too short");
  }
  if (alphabet.size() > 32) throw ValidationError("alphabet larger than 32 propositions");
}

Letter encode_letter(const std::vector<std::string>& alphabet, const std::set<std::string>& labels) {
  Letter l = 0;
  for (std::size_t k = 0; k < alphabet.size(); ++k)
    if (labels.count(alphabet[k])) l |= Letter{1} << k;
  return l;
}

std::set<std::string> decode_letter(const std::vector<std::string>& alphabet, Letter l) {
  std::set<std::string> out;
  for (std::size_t k = 0; k < alphabet.size(); ++k)
    if (l & (Letter{1} << k)) out.insert(alphabet[k]);
  return out;
}

TimedWord make_finite_word(const std::vector<std::set<std::string>>& labels, const std::vector<Rational>& times,
                           std::vector<std::string> alphabet) {
  std::sort(alphabet.begin(), alphabet.end());
  TimedWord w;
  w.alphabet = std::move(alphabet);
  for (const auto& l : labels) w.letters.push_back(encode_letter(w.alphabet, l));
  w.times = times;
  w.validate();
  return w;
}

TimedWord make_lasso_word(const std::vector<std::set<std::string>>& labels, std::size_t loop_start,
                          const Rational& step, std::vector<std::string> alphabet) {
  std::sort(alphabet.begin(), alphabet.end());
  TimedWord w;
  w.alphabet = std::move(alphabet);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    w.letters.push_back(encode_letter(w.alphabet, labels[k]));
    w.times.push_back(step * static_cast<std::int64_t>(k));
  }
  w.loop_start = loop_start;
  w.period = step * static_cast<std::int64_t>(labels.size() - loop_start);
  w.validate();
  return w;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Point-wise semantics

namespace {

Verdict not3(Verdict a) {
  if (a == Verdict::True) return Verdict::False;
  if (a == Verdict::False) return Verdict::True;
  return a;
}
Verdict and3(Verdict a, Verdict b) {
  if (a == Verdict::False || b == Verdict::False) return Verdict::False;
  if (a == Verdict::True && b == Verdict::True) return Verdict::True;
  return Verdict::Inconclusive;
}
Verdict or3(Verdict a, Verdict b) { return not3(and3(not3(a), not3(b))); }
Verdict of(bool b) { return b ? Verdict::True : Verdict::False; }

int atom_bit(const std::vector<std::string>& alphabet, const std::string& name) {
  auto it = std::find(alphabet.begin(), alphabet.end(), name);
  return it == alphabet.end() ? -1 : static_cast<int>(it - alphabet.begin());
}

class Evaluator {
 public:
  explicit Evaluator(const TimedWord& w) : w_(w), n_(w.size()) {}

  Verdict eval(const Formula& f, std::size_t pos) {
    pos = w_.normalize(pos);
    if (f.op == Op::atom || f.op == Op::truth) return eval_node(f, pos);
    const auto key = std::make_pair(&f, pos);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const Verdict v = eval_node(f, pos);
    memo_.emplace(key, v);
    return v;
  }

 private:
  // Scan window [p, end) for unbounded operators on lassos: all later positions
  // repeat an earlier one with a time offset that keeps them inside the window.
  std::size_t unbounded_end(std::size_t p, const Rational& lo) const {
    std::size_t q0 = p;
    const Rational tp = w_.time_at(p);
    while (w_.time_at(q0) - tp < lo) ++q0;
    return std::max(q0, *w_.loop_start) + (n_ - *w_.loop_start);
  }

  // Finite words: true when every position within distance hi of p is present.
  bool covered(std::size_t p, const ExtRational& hi) const {
    if (hi.is_infinite()) return false;
    return w_.times[n_ - 1] - w_.times[p] >= hi.value();
  }

  // end == 0 on a lasso: bounded operator, the time bound ends the scan.
  bool in_range(std::size_t q, std::size_t end) const {
    if (!w_.is_lasso()) return q < n_;
    return end == 0 || q < end;
  }

  Verdict eval_node(const Formula& f, std::size_t p) {
    switch (f.op) {
      case Op::atom: {
        const int bit = atom_bit(w_.alphabet, f.name);
        return of(bit >= 0 && (w_.letters[p] >> bit) & 1U);
      }
      case Op::truth: return Verdict::True;
      case Op::neg: return not3(eval(*f.lhs, p));
      case Op::conj: {
        const Verdict a = eval(*f.lhs, p);
        if (a == Verdict::False) return a;
        return and3(a, eval(*f.rhs, p));
      }
      case Op::disj: {
        const Verdict a = eval(*f.lhs, p);
        if (a == Verdict::True) return a;
        return or3(a, eval(*f.rhs, p));
      }
      case Op::next: {
        if (!w_.is_lasso() && p + 1 >= n_) return Verdict::Inconclusive;
        const Rational d = w_.time_at(p + 1) - w_.time_at(p);
        if (!f.interval.contains(d)) return Verdict::False;
        return eval(*f.lhs, p + 1);
      }
      case Op::eventually:
      case Op::always: {
        const bool ev = f.op == Op::eventually;
        const Verdict absorbing = ev ? Verdict::True : Verdict::False;
        const Rational tp = w_.time_at(p);
        const bool unbounded = f.interval.hi.is_infinite();
        const std::size_t end = (w_.is_lasso() && unbounded) ? unbounded_end(p, f.interval.lo) : 0;
        Verdict r = ev ? Verdict::False : Verdict::True;
        for (std::size_t q = p; in_range(q, end); ++q) {
          const Rational d = w_.time_at(q) - tp;
          if (!unbounded && d > f.interval.hi.value()) break;
          if (d < f.interval.lo) continue;
          const Verdict v = eval(*f.lhs, q);
          r = ev ? or3(r, v) : and3(r, v);
          if (r == absorbing) return r;
        }
        if (!w_.is_lasso() && !covered(p, f.interval.hi)) r = ev ? or3(r, Verdict::Inconclusive) : and3(r, Verdict::Inconclusive);
        return r;
      }
      case Op::until: {
        const Rational tp = w_.time_at(p);
        const bool unbounded = f.interval.hi.is_infinite();
        const std::size_t end = (w_.is_lasso() && unbounded) ? unbounded_end(p, f.interval.lo) : 0;
        Verdict r = Verdict::False;
        Verdict pre = Verdict::True;
        bool closed = false;
        for (std::size_t q = p; in_range(q, end); ++q) {
          const Rational d = w_.time_at(q) - tp;
          if (!unbounded && d > f.interval.hi.value()) {
            closed = true;
            break;
          }
          if (d >= f.interval.lo) r = or3(r, and3(pre, eval(*f.rhs, q)));
          if (r == Verdict::True) return r;
          pre = and3(pre, eval(*f.lhs, q));
          if (pre == Verdict::False) {
            closed = true;
            break;
          }
        }
        if (!w_.is_lasso() && !closed && !covered(p, f.interval.hi)) r = or3(r, and3(pre, Verdict::Inconclusive));
        return r;
      }
    }
    return Verdict::Inconclusive;
  }

  const TimedWord& w_;
  std::size_t n_;
  std::map<std::pair<const Formula*, std::size_t>, Verdict> memo_;
};

}  // namespace

Verdict evaluate(const Formula& f, const TimedWord& w, std::size_t pos) {
  if (!w.is_lasso() && pos >= w.size()) throw std::out_of_range("position past the end of the word");
  Evaluator ev(w);
  return ev.eval(f, pos);
}

bool eval_mitl(const Formula& f, const TimedWord& w, std::size_t pos) {
  const Verdict v = evaluate(f, w, pos);
  if (v == Verdict::Inconclusive) throw InconclusiveError("word too short to decide " + to_string(f));
  return v == Verdict::True;
}

bool eval_letter(const Formula& f, const std::vector<std::string>& alphabet, Letter l) {
  switch (f.op) {
    case Op::atom: {
      const int bit = atom_bit(alphabet, f.name);
      return bit >= 0 && ((l >> bit) & 1U);
    }
    case Op::truth: return true;
    case Op::neg: return !eval_letter(*f.lhs, alphabet, l);
    case Op::conj: return eval_letter(*f.lhs, alphabet, l) && eval_letter(*f.rhs, alphabet, l);
    case Op::disj: return eval_letter(*f.lhs, alphabet, l) || eval_letter(*f.rhs, alphabet, l);
    default: throw ValidationError("temporal operator inside a letter predicate");
  }
}

}  // namespace mmp
