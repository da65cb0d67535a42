#include "mmp/abstraction.hpp"
#include "mmp/errors.hpp"

#include <doctest.h>

#include <set>

using namespace mmp;

namespace {

const Rect kBox{-3, 3, -3, 3};

struct Setup {
  Partition p = build_partition(kBox, 1.0, {});
  AgentContext ctx;
  AbstractionSetup s;

  explicit Setup(double u_max) : ctx(make_context(0, {Mat2{}, {}, u_max, 100}, kBox, 1.0)) {
    s.ctx = &ctx;
    s.partition = &p;
    // Terminal ingredients from an actuated twin; the weights are identical.
    s.terminal = design_terminal(make_context(0, {Mat2{}, {}, 10, 100}, kBox, 1.0), s.weights, p);
    s.config.tightening = Tightening::sampled;
    s.config.starts = 8;
    s.h = 0.25;
    s.m = 4;
  }
};

}  // namespace

TEST_SUITE("abstraction") {
  TEST_CASE("free integrator explores the adjacency") {
    Setup st(10);
    const auto tm = create_transition_relation(st.s, {0, 0});
    CHECK(tm.initial_region == point_to_region(st.p, {0, 0}));
    CHECK(tm.attempted >= static_cast<int>(tm.plans.size()));
    CHECK(tm.solver_calls > 0);
    CHECK_FALSE(tm.plans.empty());
    std::set<int> seen{tm.initial_region};
    for (const auto& [key, plan] : tm.plans) {
      CHECK(plan.src == key.first);
      CHECK(plan.dir == key.second);
      CHECK(neighbor_in_direction(st.p, plan.src, plan.dir) == plan.dst);
      CHECK(plan.controls.size() == 4);
      CHECK(norm(plan.nominal.front() - st.p.region(plan.src).center) == 0.0);
      CHECK(norm(plan.terminal_error) <= st.s.terminal.r_term);
      seen.insert(plan.dst);
    }
    // Every interior region around the start is reached.
    for (int d = 1; d <= 6; ++d) {
      const auto n = neighbor_in_direction(st.p, tm.initial_region, d);
      REQUIRE(n.has_value());
      CHECK(tm.find(tm.initial_region, d) != nullptr);
      CHECK(seen.count(*n) == 1);
    }
  }

  TEST_CASE("exploration is deterministic") {
    Setup st(10);
    const auto a = create_transition_relation(st.s, {0, 0});
    const auto b = create_transition_relation(st.s, {0, 0});
    CHECK(dump_plans(a) == dump_plans(b));
    CHECK(a.solver_calls == b.solver_calls);
  }

  TEST_CASE("no actuation gives no transitions") {
    Setup st(0);
    const auto tm = create_transition_relation(st.s, {0, 0});
    CHECK(tm.plans.empty());
    CHECK(tm.attempted == 6);
    const WTS w = build_wts(tm, st.p, {"goal"}, Rational(1));
    CHECK(w.transitions.empty());
    CHECK(w.states.size() == st.p.size());
    CHECK(w.initial == std::vector<int>{tm.initial_region});
  }

  TEST_CASE("corner start") {
    Setup st(10);
    const Vec2 corner{-2.9, -2.9};
    const auto tm = create_transition_relation(st.s, corner);
    CHECK(tm.initial_region == point_to_region(st.p, corner));
    for (const auto& [key, plan] : tm.plans) CHECK(st.p.valid(plan.dst));
    CHECK_THROWS_AS(create_transition_relation(st.s, {5, 5}), OutOfWorkspaceError);
  }

  TEST_CASE("wts invariants") {
    Setup st(10);
    std::map<int, LabelSet> labels;
    const int goal = point_to_region(st.p, {1.5, 0.87});
    labels[goal] = {"goal", "other"};
    const Partition lp = build_partition(kBox, 1.0, labels);
    st.s.partition = &lp;
    const auto tm = create_transition_relation(st.s, {0, 0});
    const WTS w = build_wts(tm, lp, {"goal"}, Rational(1));
    CHECK(w.transitions.size() == tm.plans.size());
    CHECK(w.label(goal) == Letter{1});
    for (const auto& tr : w.transitions) {
      CHECK(tr.weight == Rational(1));
      CHECK(direction_between(lp, tr.src, tr.dst) == tr.action);
    }
    for (std::size_t k = 1; k < w.transitions.size(); ++k)
      CHECK(std::make_pair(w.transitions[k - 1].src, w.transitions[k - 1].action) <
            std::make_pair(w.transitions[k].src, w.transitions[k].action));
    const std::string d = dump_plans(tm);
    CHECK(d.rfind("# src, dir, dst, piece, ux, uy", 0) == 0);
  }
}
