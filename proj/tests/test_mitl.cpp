#include "mmp/errors.hpp"
#include "mmp/mitl.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace mmp;

namespace {

// Naive reference semantics on lasso words: explicit unrolling, no memoization,
// scans are bounded only by the time window or by two extra loop rounds.
struct RefWord {
  const TimedWord& w;
  std::size_t ls, c;

  explicit RefWord(const TimedWord& word) : w(word), ls(*word.loop_start), c(word.size() - *word.loop_start) {}

  Letter letter(std::size_t p) const { return p < w.size() ? w.letters[p] : w.letters[ls + (p - ls) % c]; }
  Rational time(std::size_t p) const {
    if (p < w.size()) return w.times[p];
    const std::size_t k = (p - ls) / c;
    return w.times[ls + (p - ls) % c] + w.period * static_cast<std::int64_t>(k);
  }
};

bool ref_sat(const Formula& f, const RefWord& r, std::size_t p);

// Last position worth scanning for an operator window starting at p.
std::size_t ref_limit(const Interval& iv, const RefWord& r, std::size_t p) {
  if (!iv.hi.is_infinite()) {
    std::size_t q = p;
    while (r.time(q + 1) - r.time(p) <= iv.hi.value()) ++q;
    return q;
  }
  std::size_t q = p;
  while (r.time(q) - r.time(p) < iv.lo) ++q;
  return std::max(q, r.ls) + 2 * r.c;
}

bool ref_sat(const Formula& f, const RefWord& r, std::size_t p) {
  switch (f.op) {
    case Op::atom: {
      const auto& a = r.w.alphabet;
      const auto it = std::find(a.begin(), a.end(), f.name);
      return it != a.end() && ((r.letter(p) >> (it - a.begin())) & 1U);
    }
    case Op::truth: return true;
    case Op::neg: return !ref_sat(*f.lhs, r, p);
    case Op::conj: return ref_sat(*f.lhs, r, p) && ref_sat(*f.rhs, r, p);
    case Op::disj: return ref_sat(*f.lhs, r, p) || ref_sat(*f.rhs, r, p);
    case Op::next: return f.interval.contains(r.time(p + 1) - r.time(p)) && ref_sat(*f.lhs, r, p + 1);
    case Op::eventually:
      for (std::size_t q = p, e = ref_limit(f.interval, r, p); q <= e; ++q)
        if (f.interval.contains(r.time(q) - r.time(p)) && ref_sat(*f.lhs, r, q)) return true;
      return false;
    case Op::always:
      for (std::size_t q = p, e = ref_limit(f.interval, r, p); q <= e; ++q)
        if (f.interval.contains(r.time(q) - r.time(p)) && !ref_sat(*f.lhs, r, q)) return false;
      return true;
    case Op::until:
      for (std::size_t q = p, e = ref_limit(f.interval, r, p); q <= e; ++q) {
        if (f.interval.contains(r.time(q) - r.time(p)) && ref_sat(*f.rhs, r, q)) {
          bool ok = true;
          for (std::size_t k = p; k < q && ok; ++k) ok = ref_sat(*f.lhs, r, k);
          if (ok) return true;
        }
      }
      return false;
  }
  return false;
}

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Interval interval() {
    static const int kBounds[] = {0, 1, 2, 3, 5, 7};
    Interval iv;
    const int a = pick(5);
    iv.lo = Rational(kBounds[a]);
    const int b = a + 1 + pick(6 - a);
    iv.hi = b == 6 ? ExtRational::infinity() : ExtRational(Rational(kBounds[b]));
    return iv;
  }

  FormulaPtr formula(int depth) {
    if (depth == 0 || pick(4) == 0) return pick(5) == 0 ? mitl::truth() : mitl::atom(pick(2) ? "p" : "q");
    switch (pick(8)) {
      case 0: return mitl::neg(formula(depth - 1));
      case 1: return mitl::conj(formula(depth - 1), formula(depth - 1));
      case 2: return mitl::disj(formula(depth - 1), formula(depth - 1));
      case 3: return mitl::next(interval(), formula(depth - 1));
      case 4: return mitl::eventually(interval(), formula(depth - 1));
      case 5: return mitl::always(interval(), formula(depth - 1));
      default: return mitl::until(interval(), formula(depth - 1), formula(depth - 1));
    }
  }

  TimedWord lasso() {
    TimedWord w;
    w.alphabet = {"p", "q"};
    const std::size_t n = 1 + static_cast<std::size_t>(pick(5));
    Rational t(pick(2));
    for (std::size_t k = 0; k < n; ++k) {
      w.letters.push_back(static_cast<Letter>(pick(4)));
      w.times.push_back(t);
      t += Rational(1 + pick(4), 1 + pick(2));
    }
    w.loop_start = static_cast<std::size_t>(pick(static_cast<int>(n)));
    w.period = t - w.times[*w.loop_start];
    return w;
  }
};

TimedWord grey_word() {
  std::vector<std::set<std::string>> labels(8);
  labels[0] = {"grey"};
  std::vector<Rational> times;
  for (int k = 0; k < 8; ++k) times.emplace_back(3 * k);
  return make_finite_word(labels, times, {"grey"});
}

}  // namespace

TEST_SUITE("mitl") {
  TEST_CASE("parser builds the expected trees") {
    auto f = parse_mitl("F[15,27] red");
    CHECK(f->op == Op::eventually);
    CHECK(f->interval.lo == Rational(15));
    CHECK(f->interval.hi == ExtRational(Rational(27)));
    CHECK(f->lhs->name == "red");

    auto u = parse_mitl("p U[0,5] q");
    CHECK(u->op == Op::until);
    CHECK(u->lhs->name == "p");
    CHECK(u->rhs->name == "q");

    auto g = parse_mitl("F[7.5,22] green");
    CHECK(g->interval.lo == Rational(15, 2));

    auto d = parse_mitl("F p");
    CHECK(d->interval.lo == Rational(0));
    CHECK(d->interval.hi.is_infinite());

    auto pr = parse_mitl("a | b & c");
    CHECK(pr->op == Op::disj);
    CHECK(pr->rhs->op == Op::conj);

    auto ur = parse_mitl("a U b U c");
    CHECK(ur->op == Op::until);
    CHECK(ur->rhs->op == Op::until);

    CHECK(parse_mitl("false")->op == Op::neg);
    CHECK(parse_mitl("G[0,inf] !p")->interval.hi.is_infinite());
  }

  TEST_CASE("parser errors") {
    CHECK_THROWS_AS(parse_mitl("F[5,2] p"), ValidationError);
    CHECK_THROWS_AS(parse_mitl("F[3,3] p"), ValidationError);
    CHECK_THROWS_AS(parse_mitl("p &"), ParseError);
    CHECK_THROWS_AS(parse_mitl("(p"), ParseError);
    CHECK_THROWS_AS(parse_mitl("F[1 p"), ParseError);
    CHECK_THROWS_AS(parse_mitl(""), ParseError);
    try {
      parse_mitl("p & & q");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.position() == 4);
    }
  }

  TEST_CASE("printing round-trips structurally") {
    Gen g(7);
    for (int k = 0; k < 500; ++k) {
      auto f = g.formula(4);
      auto back = parse_mitl(to_string(*f));
      CHECK(structurally_equal(*f, *back));
    }
  }

  TEST_CASE("flat fragment") {
    CHECK(is_flat(*parse_mitl("F[15,27] red")));
    CHECK(is_flat(*parse_mitl("(F[0,5] p) & (G[0,9] !q)")));
    CHECK(is_flat(*parse_mitl("p & (p U[1,2] (q | p))")));
    CHECK_FALSE(is_flat(*parse_mitl("F[0,5](p & F[0,2] q)")));
    CHECK_FALSE(is_flat(*parse_mitl("(F p) | q")));
  }

  TEST_CASE("finite word examples") {
    CHECK(evaluate(*parse_mitl("F[0,19] grey"), grey_word()) == Verdict::True);
    CHECK(eval_mitl(*parse_mitl("F[0,19] grey"), grey_word()));

    std::vector<std::set<std::string>> labels = {{"p"}, {"p"}, {"p"}, {}};
    std::vector<Rational> times = {Rational(0), Rational(3), Rational(6), Rational(9)};
    const auto w = make_finite_word(labels, times, {"p"});
    CHECK(eval_mitl(*parse_mitl("G[0,6] p"), w));
    CHECK_FALSE(eval_mitl(*parse_mitl("G[0,9] p"), w));

    const auto empty = make_finite_word({{}}, {Rational(0)}, {"p"});
    CHECK_FALSE(eval_mitl(*parse_mitl("p"), empty));
    CHECK_THROWS_AS(eval_mitl(*parse_mitl("p"), empty, 1), std::out_of_range);
  }

  TEST_CASE("short finite words are inconclusive rather than false") {
    const auto w = make_finite_word({{}, {}, {}}, {Rational(0), Rational(3), Rational(6)}, {"p"});
    CHECK(evaluate(*parse_mitl("F[0,19] p"), w) == Verdict::Inconclusive);
    CHECK_THROWS_AS(eval_mitl(*parse_mitl("F[0,19] p"), w), InconclusiveError);
    CHECK(evaluate(*parse_mitl("F[0,6] p"), w) == Verdict::False);
    CHECK(evaluate(*parse_mitl("G[0,19] !p"), w) == Verdict::Inconclusive);
    CHECK(evaluate(*parse_mitl("G[0,19] p"), w) == Verdict::False);
  }

  TEST_CASE("bounded operators on lasso words") {
    const auto w = make_lasso_word({{}, {}, {}, {}, {"green"}, {}, {}}, 5, Rational(3), {"green"});
    CHECK(evaluate(*parse_mitl("F[7.5,22] green"), w) == Verdict::True);
    CHECK(evaluate(*parse_mitl("F[0,11] green"), w) == Verdict::False);
    CHECK(evaluate(*parse_mitl("G[13,inf] !green"), w) == Verdict::True);
    CHECK(evaluate(*parse_mitl("F[13,inf] green"), w) == Verdict::False);
  }

  TEST_CASE("lasso evaluation matches the naive reference") {
    Gen g(11);
    int checked = 0;
    for (int k = 0; k < 10000; ++k) {
      auto f = g.formula(3);
      auto w = g.lasso();
      w.validate();
      RefWord r(w);
      const std::size_t pos = static_cast<std::size_t>(g.pick(static_cast<int>(w.size()) + 2));
      const bool expect = ref_sat(*f, r, pos);
      const Verdict got = evaluate(*f, w, pos);
      if (got != (expect ? Verdict::True : Verdict::False)) {
        FAIL_CHECK("mismatch on " << to_string(*f) << " at " << pos);
        break;
      }
      ++checked;
    }
    CHECK(checked == 10000);
  }

  TEST_CASE("eventually and always are dual") {
    Gen g(5);
    for (int k = 0; k < 2000; ++k) {
      const Interval iv = g.interval();
      auto p = g.formula(1);
      auto w = g.lasso();
      const Verdict a = evaluate(*mitl::neg(mitl::eventually(iv, p)), w);
      const Verdict b = evaluate(*mitl::always(iv, mitl::neg(p)), w);
      CHECK(a == b);
    }
  }

  TEST_CASE("word validation") {
    TimedWord w;
    w.alphabet = {"p"};
    w.letters = {0, 1};
    w.times = {Rational(1), Rational(1)};
    CHECK_THROWS_AS(w.validate(), ValidationError);
    w.times = {Rational(0), Rational(2)};
    w.loop_start = 0;
    w.period = Rational(2);
    CHECK_THROWS_AS(w.validate(), ValidationError);
    w.period = Rational(3);
    CHECK_NOTHROW(w.validate());
  }
}
