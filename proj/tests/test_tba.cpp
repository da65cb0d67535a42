#include "mmp/errors.hpp"
#include "mmp/tba.hpp"

#include <doctest.h>

#include <random>

using namespace mmp;

namespace {

ClockValuation val(std::initializer_list<ExtRational> v) { return ClockValuation(v); }

TBA single_location(bool accepting) {
  TBA a;
  a.alphabet = {"p"};
  a.locations.push_back({"q0", mitl::truth(), ClockConstraint::top(), true, accepting});
  a.edges.push_back({0, 0, ClockConstraint::top(), {}});
  return a;
}

std::vector<std::set<std::string>> random_labels(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::set<std::string>> out(n);
  for (auto& s : out) {
    const auto bits = rng() % 4;
    if (bits & 1U) s.insert("p");
    if (bits & 2U) s.insert("q");
  }
  return out;
}

// Flat single-operator formula over p, q with integer bounds ≤ 6.
FormulaPtr random_flat(std::mt19937_64& rng) {
  const int a = static_cast<int>(rng() % 6);
  const int b = a + 1 + static_cast<int>(rng() % static_cast<unsigned>(6 - a));
  Interval iv{Rational(a), rng() % 5 == 0 ? ExtRational::infinity() : ExtRational(Rational(b))};
  auto lit = [&]() { return rng() % 3 == 0 ? mitl::neg(mitl::atom("p")) : mitl::atom(rng() % 2 ? "p" : "q"); };
  switch (rng() % 3) {
    case 0: return mitl::eventually(iv, lit());
    case 1: return mitl::always(iv, lit());
    default: return mitl::until(iv, lit(), lit());
  }
}

}  // namespace

TEST_SUITE("tba") {
  TEST_CASE("clock constraints") {
    const auto le3 = ClockConstraint::atom(0, Cmp::le, Rational(3));
    const auto gt3 = ClockConstraint::atom(0, Cmp::gt, Rational(3));
    CHECK(eval_clock_constraint(le3, val({ExtRational(Rational(5, 2))})));
    CHECK_FALSE(eval_clock_constraint(le3, val({ExtRational::infinity()})));
    CHECK(eval_clock_constraint(gt3, val({ExtRational::infinity()})));
    CHECK(eval_clock_constraint(ClockConstraint::top(), val({ExtRational::infinity()})));
    CHECK(eval_clock_constraint(ClockConstraint::top(), {}));
    CHECK(eval_clock_constraint(ClockConstraint::atom(0, Cmp::eq, Rational(3)), val({ExtRational(Rational(3))})));
    CHECK(eval_clock_constraint(ClockConstraint::negation(le3), val({ExtRational(Rational(4))})));
    CHECK_FALSE(eval_clock_constraint(ClockConstraint::conjunction(le3, gt3), val({ExtRational(Rational(3))})));
    CHECK_THROWS_AS(eval_clock_constraint(ClockConstraint::atom(1, Cmp::le, Rational(3)), val({ExtRational(0)})),
                    ValidationError);
  }

  TEST_CASE("clock update saturates") {
    const Rational cmax(27);
    CHECK(clock_update(ExtRational(Rational(12)), Rational(3), true, cmax) == ExtRational(Rational(0)));
    CHECK(clock_update(ExtRational::infinity(), Rational(3), true, cmax) == ExtRational(Rational(0)));
    CHECK(clock_update(ExtRational(Rational(0)), Rational(3), false, cmax) == ExtRational(Rational(3)));
    CHECK(clock_update(ExtRational(Rational(25)), Rational(3), false, cmax).is_infinite());
    CHECK(clock_update(ExtRational(Rational(24)), Rational(3), false, cmax) == ExtRational(Rational(27)));
    CHECK(clock_update(ExtRational::infinity(), Rational(3), false, cmax).is_infinite());
  }

  TEST_CASE("scaling to integer constants") {
    auto [a, fa] = scale_to_integers(mitl_to_tba(*parse_mitl("F[7.5,22] green")));
    CHECK(fa == 2);
    CHECK(a.c_max() == Rational(44));
    CHECK(to_string(a.locations[1].invariant, a.clocks).find("15") != std::string::npos);

    auto [b, fb] = scale_to_integers(mitl_to_tba(*parse_mitl("F[3,19] grey")));
    CHECK(fb == 1);
    CHECK(b.c_max() == Rational(19));

    auto [c, fc] = scale_to_integers(mitl_to_tba(*parse_mitl("F[1/6,1/3] p")));
    CHECK(fc == 6);
    CHECK(c.c_max() == Rational(2));
  }

  TEST_CASE("translation shapes") {
    const TBA f = mitl_to_tba(*parse_mitl("F[15,27] red"));
    CHECK(f.locations.size() == 3);
    CHECK(f.clocks.size() == 1);
    CHECK(f.alphabet == std::vector<std::string>{"red"});
    CHECK(f.c_max() == Rational(27));

    const TBA g = mitl_to_tba(*parse_mitl("G[0,inf] p"));
    CHECK(g.locations.size() == 2);
    CHECK(g.c_max() == Rational(0));

    const TBA two = mitl_to_tba(*parse_mitl("(F[0,5] p) & (G[0,9] !q)"));
    CHECK(two.clocks.size() == 2);
    CHECK(two.alphabet == std::vector<std::string>{"p", "q"});

    CHECK_THROWS_AS(mitl_to_tba(*parse_mitl("F[0,5](p & F q)")), ValidationError);
    CHECK(mitl_to_tba(*parse_mitl("F[0,5] p"), {"q", "p"}).alphabet == std::vector<std::string>{"p", "q"});
  }

  TEST_CASE("acceptance examples") {
    const auto w = make_lasso_word({{}, {"p"}, {}}, 2, Rational(3), {"p"});
    CHECK(tba_accepts(single_location(true), w));
    CHECK_FALSE(tba_accepts(single_location(false), w));

    const auto grey = make_lasso_word({{}, {"grey"}, {}}, 2, Rational(3), {"grey"});
    const TBA a = mitl_to_tba(*parse_mitl("F[0,19] grey"));
    CHECK(tba_accepts(a, grey));
    CHECK(eval_mitl(*parse_mitl("F[0,19] grey"), grey));

    const auto late = make_lasso_word({{}, {}, {}, {}, {}, {}, {}, {"grey"}, {}}, 8, Rational(3), {"grey"});
    CHECK_FALSE(tba_accepts(a, late));

    const auto finite = make_finite_word({{}}, {Rational(0)}, {"grey"});
    CHECK_THROWS_AS(tba_accepts(a, finite), ValidationError);
  }

  TEST_CASE("translation agrees with the evaluator on sampled lassos") {
    std::mt19937_64 rng(3);
    int agree = 0;
    const int trials = 3000;
    for (int k = 0; k < trials; ++k) {
      auto f = random_flat(rng);
      if (rng() % 3 == 0) f = mitl::conj(f, random_flat(rng));
      const std::size_t n = 1 + rng() % 6;
      const std::size_t ls = rng() % n;
      const auto w = make_lasso_word(random_labels(rng, n), ls, Rational(3), {"p", "q"});
      const TBA a = mitl_to_tba(*f, {"p", "q"});
      if (tba_accepts(a, w) == eval_mitl(*f, w)) ++agree;
      else FAIL_CHECK("disagreement on " << to_string(*f));
    }
    CHECK(agree == trials);
  }

  TEST_CASE("scaling preserves acceptance") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 300; ++k) {
      const TBA a = mitl_to_tba(*parse_mitl("p U[1/2,7/3] q"), {"p", "q"});
      auto [s, factor] = scale_to_integers(a);
      const std::size_t n = 1 + rng() % 5;
      const auto w = make_lasso_word(random_labels(rng, n), rng() % n, Rational(1, 2), {"p", "q"});
      CHECK(tba_accepts(a, w) == tba_accepts(s, scale_word(w, factor)));
    }
  }

  TEST_CASE("synchronized product conjoins languages") {
    const TBA a = mitl_to_tba(*parse_mitl("F[0,6] p"), {"p", "q"});
    const TBA b = mitl_to_tba(*parse_mitl("G[0,6] !q"), {"p", "q"});
    const TBA ab = synchronized_product(a, b);
    CHECK(ab.clocks.size() == 2);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 300; ++k) {
      const std::size_t n = 1 + rng() % 5;
      const auto w = make_lasso_word(random_labels(rng, n), rng() % n, Rational(3), {"p", "q"});
      CHECK(tba_accepts(ab, w) == (tba_accepts(a, w) && tba_accepts(b, w)));
    }
  }

  TEST_CASE("dump lists locations and edges") {
    const std::string d = dump_tba(mitl_to_tba(*parse_mitl("F[15,27] red")));
    CHECK(d.find("wait") != std::string::npos);
    CHECK(d.find("accepting") != std::string::npos);
  }
}
