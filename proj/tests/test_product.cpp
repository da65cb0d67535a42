#include "mmp/errors.hpp"
#include "mmp/product.hpp"

#include <doctest.h>

#include <cmath>

using namespace mmp;

namespace {

const Rational kT(3);

// Path-shaped WTS 1 - 2 - ... - n with both directions, labels from `with_p`.
WTS path_wts(int n, const std::set<int>& with_p, std::vector<std::string> alphabet = {"p"}) {
  WTS t;
  t.alphabet = std::move(alphabet);
  for (int s = 1; s <= n; ++s) {
    t.states.push_back(s);
    t.labels[s] = with_p.count(s) ? Letter{1} : Letter{0};
  }
  t.initial = {1};
  for (int s = 1; s <= n; ++s) {
    if (s > 1) t.transitions.push_back({s, 4, s - 1, kT});
    if (s < n) t.transitions.push_back({s, 1, s + 1, kT});
  }
  return t;
}

TBA always_accepting_with_clock() {
  TBA a;
  a.alphabet = {"p"};
  a.clocks = {"c"};
  const auto never = ClockConstraint::conjunction(ClockConstraint::atom(0, Cmp::lt, Rational(0)),
                                                  ClockConstraint::atom(0, Cmp::gt, Rational(6)));
  a.locations.push_back({"q0", mitl::truth(), ClockConstraint::negation(never), true, true});
  a.edges.push_back({0, 0, ClockConstraint::top(), {}});
  return a;
}

}  // namespace

TEST_SUITE("product") {
  TEST_CASE("no transitions leaves only initial states") {
    WTS t = path_wts(1, {});
    const auto b = build_product(t, mitl_to_tba(*parse_mitl("F[0,6] p")));
    CHECK(b.size() == 1);
    for (const auto& s : b.states) CHECK(s.region == 1);
    CHECK_FALSE(find_accepting_run(b).has_value());
  }

  TEST_CASE("label compatibility excludes states") {
    WTS t = path_wts(2, {1});
    TBA a = always_accepting_with_clock();
    a.locations[0].letters = mitl::neg(mitl::atom("p"));
    const auto b = build_product(t, a);
    CHECK(b.size() == 0);
    CHECK(b.graph.initial.empty());
  }

  TEST_CASE("ping-pong clocks advance then saturate") {
    const auto b = build_product(path_wts(2, {}), always_accepting_with_clock());
    CHECK(b.c_max == Rational(6));
    CHECK(b.step == kT);
    REQUIRE(b.size() == 5);
    const std::vector<std::pair<int, ExtRational>> expect = {{1, ExtRational(Rational(0))},
                                                             {2, ExtRational(Rational(3))},
                                                             {1, ExtRational(Rational(6))},
                                                             {2, ExtRational::infinity()},
                                                             {1, ExtRational::infinity()}};
    for (std::size_t k = 0; k < expect.size(); ++k) {
      CHECK(b.states[k].region == expect[k].first);
      CHECK(b.states[k].clocks[0] == expect[k].second);
    }
    CHECK(b.graph.succ[4] == std::vector<int>{3});
    const auto run = find_accepting_run(b);
    REQUIRE(run.has_value());
    const auto wr = project_run(b, *run);
    CHECK(wr.regions.size() == run->states.size());
    CHECK(wr.actions.front() == 1);
  }

  TEST_CASE("input checks") {
    WTS t = path_wts(2, {});
    CHECK_THROWS_AS(build_product(t, mitl_to_tba(*parse_mitl("F[0,6] q"))), ValidationError);
    t.transitions[0].weight = Rational(2);
    CHECK_THROWS_AS(build_product(t, always_accepting_with_clock()), ValidationError);
  }

  TEST_CASE("deadline shorter than one period is unsatisfiable") {
    const TBA a = mitl_to_tba(*parse_mitl("F[0,1] p"));
    CHECK_FALSE(find_accepting_run(build_product(path_wts(3, {2}), a)).has_value());
    CHECK(find_accepting_run(build_product(path_wts(3, {1}), a)).has_value());
  }

  TEST_CASE("accepting runs satisfy the formula") {
    for (const char* text : {"F[0,19] p", "F[7.5,22] p", "F[15,27] p", "G[0,inf] !p", "(!p) U[6,12] p"}) {
      const auto f = parse_mitl(text);
      const WTS t = path_wts(4, {3});
      const TBA a = mitl_to_tba(*f, t.alphabet);
      const auto b = build_product(t, a);
      const auto run = find_accepting_run(b);
      REQUIRE_MESSAGE(run.has_value(), text);
      const auto w = run_word(t, project_run(b, *run));
      CHECK_MESSAGE(tba_accepts(a, w), text);
      CHECK_MESSAGE(eval_mitl(*f, w), text);
      for (std::size_t mu = 0; mu < w.size(); ++mu) CHECK(w.times[mu] == kT * static_cast<std::int64_t>(mu));
    }
  }

  TEST_CASE("product size bound") {
    const WTS t = path_wts(4, {2, 4});
    const TBA a = mitl_to_tba(*parse_mitl("(F[3,9] p) & (G[0,12] (p | !p))"), t.alphabet);
    const auto b = build_product(t, a);
    const double values = std::ceil(boost::rational_cast<double>(b.c_max / kT)) + 2;
    CHECK(static_cast<double>(b.size()) <=
          static_cast<double>(t.states.size() * a.locations.size()) * std::pow(values, a.clocks.size()));
    for (const auto& s : b.states)
      for (const auto& c : s.clocks) CHECK((c.is_infinite() || c.value() <= b.c_max));
  }

  TEST_CASE("lasso choice is deterministic") {
    const WTS t = path_wts(4, {4});
    const TBA a = mitl_to_tba(*parse_mitl("F[6,15] p"));
    const auto b1 = build_product(t, a);
    const auto b2 = build_product(t, a);
    const auto r1 = find_accepting_run(b1);
    const auto r2 = find_accepting_run(b2);
    REQUIRE(r1.has_value());
    CHECK(r1->states == r2->states);
    CHECK(r1->loop_start == r2->loop_start);
    CHECK(dump_run(b1, *r1, a) == dump_run(b2, *r2, a));
  }

  TEST_CASE("explicit graph search") {
    ExplicitGraph g;
    for (int k = 0; k < 4; ++k) g.add_node(k == 3);
    g.initial = {0};
    g.succ[0] = {1};
    g.succ[1] = {2};
    g.succ[2] = {1};
    CHECK_FALSE(has_accepting_cycle(g));
    CHECK_FALSE(find_lasso(g).has_value());
    g.succ[2] = {1, 3};
    CHECK_FALSE(has_accepting_cycle(g));
    g.succ[3] = {1};
    CHECK(has_accepting_cycle(g));
    const auto l = find_lasso(g);
    REQUIRE(l.has_value());
    CHECK(l->prefix == std::vector<int>{0, 1, 2});
    CHECK(l->cycle == std::vector<int>{3, 1, 2});
  }

  TEST_CASE("empty run projects to an empty run") {
    const auto b = build_product(path_wts(2, {}), always_accepting_with_clock());
    const auto wr = project_run(b, ProductRun{});
    CHECK(wr.empty());
  }

  TEST_CASE("wts dump format") {
    const std::string d = dump_wts(path_wts(2, {2}));
    CHECK(d.find("1, 1, 2, 3") != std::string::npos);
    CHECK(d.find("state 2 p") != std::string::npos);
  }
}
