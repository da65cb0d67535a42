#include "mmp/errors.hpp"
#include "mmp/executor.hpp"

#include "small_scenario.hpp"

#include <doctest.h>

using namespace mmp;

namespace {

struct Pipeline {
  Scenario s;
  Synthesis syn;
  Trace trace;

  explicit Pipeline(const std::string& text) : s(parse_scenario(text)), syn(synthesize_all(s)) {
    trace = simulate_closed_loop(s, syn);
  }
};

const Pipeline& small() {
  static const Pipeline p(small_scenario_text());
  return p;
}

}  // namespace

TEST_SUITE("executor") {
  TEST_CASE("synthesis yields satisfying runs") {
    const Pipeline& p = small();
    REQUIRE(p.syn.agents.size() == 2);
    for (const auto& a : p.syn.agents) {
      CHECK_FALSE(a.run.empty());
      const TimedWord w = run_word(a.wts, a.run);
      CHECK(eval_mitl(*a.formula, w));
      CHECK(tba_accepts(a.tba, w));
      for (std::size_t mu = 0; mu + 1 < a.run.regions.size(); ++mu)
        CHECK(neighbor_in_direction(*p.syn.partition, a.run.regions[mu], a.run.actions[mu]) == a.run.regions[mu + 1]);
    }
    CHECK(p.syn.agents[0].alphabet == std::vector<std::string>{"goal"});
    CHECK(p.syn.agents[1].alphabet == std::vector<std::string>{"goal"});
  }

  TEST_CASE("closed loop meets every check") {
    const Pipeline& p = small();
    const Report r = check_trace(p.trace, p.s, p.syn);
    CHECK(r.satisfied());
    CHECK(r.connected);
    CHECK(r.max_neighbor_distance < 8.0);
    for (const auto& a : r.agents) {
      CHECK(a.verdict == Verdict::True);
      CHECK(a.planned_verdict == Verdict::True);
      CHECK(a.automaton_agrees);
      CHECK(a.follows_run);
      CHECK(a.stayed_in_unions);
      CHECK(a.max_terminal_error <= a.r_term);
      CHECK(a.cost_monitor_violations == 0);
    }
    CHECK(r.text().find("overall PASS") != std::string::npos);
  }

  TEST_CASE("trace bookkeeping") {
    const Pipeline& p = small();
    const Trace& t = p.trace;
    CHECK(t.samples_per_period == 4 * p.s.solver.dense_factor);
    CHECK(t.intervals() >= 1);
    for (std::size_t k = 0; k < t.times.size(); ++k)
      for (int i = 0; i < t.agents; ++i)
        CHECK(t.region[k][static_cast<std::size_t>(i)] == point_to_region(*p.syn.partition, t.x[k][static_cast<std::size_t>(i)]));
    for (const auto& rec : t.transitions) {
      CHECK(std::abs(rec.terminal_error - norm(rec.end - p.syn.partition->region(rec.dst).center)) < 1e-12);
      CHECK(point_to_region(*p.syn.partition, rec.start) == rec.src);
    }
    const TimedWord w = relaxed_word(t, 0, p.syn.agents[0].alphabet);
    for (std::size_t mu = 0; mu < w.size(); ++mu) CHECK(w.times[mu] == Rational(static_cast<std::int64_t>(mu)));
    CHECK(region_crossings(t, 0).front().second == point_to_region(*p.syn.partition, p.s.agents[0].position));
  }

  TEST_CASE("csv round trip keeps the relaxed words") {
    const Pipeline& p = small();
    const Trace back = parse_trace_csv(trace_csv(p.trace));
    CHECK(back.times.size() == p.trace.times.size());
    const auto& alpha = p.syn.agents[0].alphabet;
    const TimedWord a = relaxed_word(p.trace, 0, alpha);
    const TimedWord b = relaxed_word(back, 0, alpha);
    CHECK(a.letters == b.letters);
    CHECK(a.times == b.times);
    CHECK_THROWS_AS(parse_trace_csv("t,x1\n0,0\n"), ValidationError);
  }

  TEST_CASE("teleported agent breaks connectivity") {
    const Pipeline& p = small();
    Trace t = p.trace;
    const std::size_t k = t.times.size() / 2;
    t.x[k][0] = {-2.9, -2.9};
    t.x[k][1] = {2.9, 2.9};
    const Report r = check_trace(t, p.s, p.syn);
    CHECK_FALSE(r.connected);
    CHECK_FALSE(r.satisfied());
  }

  TEST_CASE("truncated trace is inconclusive") {
    const Pipeline& p = small();
    Trace t = p.trace;
    t.times.resize(1);
    t.x.resize(1);
    t.u.resize(1);
    t.region.resize(1);
    t.labels.resize(1);
    t.transitions.clear();
    const Report r = check_trace(t, p.s, p.syn);
    CHECK(r.agents[0].verdict == Verdict::Inconclusive);
    CHECK_FALSE(r.satisfied());
  }

  TEST_CASE("zero solver budget aborts with a location") {
    const Pipeline& p = small();
    SimulationOptions opt;
    opt.budget = 0;
    try {
      simulate_closed_loop(p.s, p.syn, opt);
      FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
      CHECK(e.agent() == 1);
      CHECK(e.interval() == 0);
      CHECK(e.sample() == 0);
    }
  }

  TEST_CASE("deadline before the first transition is unsatisfiable") {
    const Scenario s = parse_scenario(small_scenario_text("F[0,0.5] goal"));
    try {
      synthesize_all(s);
      FAIL("expected UnsatisfiableError");
    } catch (const UnsatisfiableError& e) {
      CHECK(e.agent() == 1);
    }
  }

  TEST_CASE("trivially true formula accepts any infinite run") {
    const Scenario s = parse_scenario(small_scenario_text("F[0,4] goal", "G true"));
    const Synthesis syn = synthesize_all(s);
    const auto& a = syn.agents[1];
    CHECK(a.alphabet.empty());
    CHECK_FALSE(a.run.empty());
    CHECK(eval_mitl(*a.formula, run_word(a.wts, a.run)));
  }

  TEST_CASE("cost decrease bound") {
    const Pipeline& p = small();
    const auto& a = p.syn.agents[0];
    const double T = 1.0, h = 0.25;
    const double r = rho(a.ctx, h, 0.3);
    CHECK(cost_decrease_bound(a.ctx, a.terminal, T, h, 0.3) ==
          doctest::Approx((T - 2 * h) * r * a.terminal.L_F + r * a.terminal.L_V));
  }
}
