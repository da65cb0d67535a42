// mmp: abstract | synthesize | simulate | check

#include "mmp/errors.hpp"
#include "mmp/executor.hpp"
#include "mmp/log.hpp"
#include "mmp/scenario.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace mmp;

namespace {

enum Exit { kOk = 0, kViolated = 1, kUnsat = 2, kInfeasible = 3, kInvalid = 4, kInconclusive = 5 };

struct Options {
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> cycles;
  std::optional<int> starts;
  std::optional<int> budget;
  std::string trace;
  std::string formula;
  int agent = 0;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + p.string());
  f << text;
}

Scenario load(const Options& o) {
  Scenario s = load_scenario(o.scenario);
  if (o.seed) s.seed = *o.seed;
  if (o.starts) s.solver.starts = *o.starts;
  if (o.cycles) s.horizon_cycles = *o.cycles;
  validate_scenario(s);
  return s;
}

fs::path out_dir(const Options& o) {
  fs::create_directories(o.out);
  return o.out;
}

void write_abstraction(const fs::path& dir, const AgentSynthesis& a) {
  const std::string id = std::to_string(a.agent + 1);
  write_file(dir / ("wts_" + id + ".txt"), dump_wts(a.wts));
  write_file(dir / ("plans_" + id + ".csv"), dump_plans(a.transit));
}

int cmd_abstract(const Options& o) {
  const Scenario s = load(o);
  const Partition p = scenario_partition(s);
  const fs::path dir = out_dir(o);
  write_file(dir / "partition.csv", dump_partition(p));
  long total = 0;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentScenario& a = s.agents[i];
    const AgentContext ctx = make_context(static_cast<int>(i), a.dynamics, s.workspace, s.side);
    AbstractionSetup setup;
    setup.ctx = &ctx;
    setup.partition = &p;
    setup.weights = a.weights;
    setup.config = s.solver;
    setup.h = s.h();
    setup.m = s.samples_per_period();
    for (const auto& nb : a.dynamics.neighbors)
      setup.neighbor_snapshot.push_back(s.agents[static_cast<std::size_t>(nb.agent)].position);
    TransitMatrix tm;
    try {
      setup.terminal = design_terminal(ctx, a.weights, p, s.seed);
      tm = create_transition_relation(setup, a.position);
    } catch (const TerminalDesignError& e) {
      // An agent that cannot hold a terminal set has no transitions.
      std::cerr << "agent " << a.id << ": " << e.what() << '\n';
      tm.initial_region = point_to_region(p, a.position);
    }
    auto formula = parse_mitl(a.formula);
    std::set<std::string> atoms;
    collect_atoms(*formula, atoms);
    const WTS w = build_wts(tm, p, {atoms.begin(), atoms.end()}, s.period);
    const std::string id = std::to_string(a.id);
    write_file(dir / ("wts_" + id + ".txt"), dump_wts(w));
    write_file(dir / ("plans_" + id + ".csv"), dump_plans(tm));
    std::cout << "agent " << a.id << ": attempted " << tm.attempted << " transitions " << tm.plans.size()
              << " solver_calls " << tm.solver_calls << '\n';
    total += tm.solver_calls;
  }
  const double joint = std::pow(6.0, static_cast<double>(s.agents.size()));
  std::cout << "total solver_calls " << total << " (joint enumeration: 6^" << s.agents.size() << " = " << joint
            << " problems per region tuple)\n";
  return kOk;
}

int cmd_synthesize(const Options& o) {
  const Scenario s = load(o);
  const fs::path dir = out_dir(o);
  const Synthesis syn = synthesize_all(s);
  for (const auto& a : syn.agents) {
    const std::string id = std::to_string(a.agent + 1);
    write_abstraction(dir, a);
    write_file(dir / ("tba_" + id + ".txt"), dump_tba(a.tba));
    write_file(dir / ("run_" + id + ".csv"), a.run_dump);
    std::cout << "agent " << id << ": run prefix " << a.run.loop_start << " cycle "
              << a.run.regions.size() - a.run.loop_start << " product_states " << a.product_states << '\n';
  }
  return kOk;
}

int cmd_simulate(const Options& o) {
  const Scenario s = load(o);
  const fs::path dir = out_dir(o);
  const Synthesis syn = synthesize_all(s);
  for (const auto& a : syn.agents) {
    const std::string id = std::to_string(a.agent + 1);
    write_abstraction(dir, a);
    write_file(dir / ("run_" + id + ".csv"), a.run_dump);
  }
  SimulationOptions opt;
  if (o.budget) opt.budget = *o.budget;
  const Trace t = simulate_closed_loop(s, syn, opt);
  write_file(dir / "trace.csv", trace_csv(t));
  const Report r = check_trace(t, s, syn);
  write_file(dir / "report.txt", r.text());
  std::cout << r.text();
  if (r.satisfied()) return kOk;
  for (const auto& a : r.agents)
    if (a.verdict == Verdict::False) return kViolated;
  return r.connected ? kInconclusive : kViolated;
}

int cmd_check(const Options& o) {
  std::ifstream in(o.trace);
  if (!in) throw ValidationError("cannot read trace " + o.trace);
  std::ostringstream ss;
  ss << in.rdbuf();
  const Trace t = parse_trace_csv(ss.str());
  auto f = parse_mitl(o.formula);
  std::set<std::string> atoms;
  collect_atoms(*f, atoms);
  const std::vector<std::string> alphabet(atoms.begin(), atoms.end());
  if (o.agent < 0 || o.agent > t.agents) throw ValidationError("agent out of range");
  Verdict best = Verdict::False;
  for (int i = 0; i < t.agents; ++i) {
    if (o.agent != 0 && i + 1 != o.agent) continue;
    const Verdict v = evaluate(*f, relaxed_word(t, i, alphabet));
    std::cout << "agent " << i + 1 << ": " << to_string(v) << '\n';
    if (v == Verdict::True || (v == Verdict::Inconclusive && best == Verdict::False)) best = v;
  }
  std::cout << "verdict " << to_string(best) << '\n';
  if (best == Verdict::True) return kOk;
  return best == Verdict::Inconclusive ? kInconclusive : kViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized MITL controller synthesis for coupled agents"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--scenario", o.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    c->add_option("--out", o.out, "output directory");
    c->add_option("--seed", o.seed, "terminal-design sampling seed");
    c->add_option("--solver-starts", o.starts, "multi-start count")->check(CLI::PositiveNumber);
  };
  auto* abs = app.add_subcommand("abstract", "build and dump each agent's transition system");
  common(abs);
  auto* syn = app.add_subcommand("synthesize", "abstraction, automata, product and accepting runs");
  common(syn);
  auto* sim = app.add_subcommand("simulate", "synthesize, run the closed loop and check the trace");
  common(sim);
  sim->add_option("--horizon-cycles", o.cycles, "lasso cycles to execute")->check(CLI::PositiveNumber);
  sim->add_option("--solver-budget", o.budget, "max candidate evaluations per closed-loop solve");
  auto* chk = app.add_subcommand("check", "evaluate a formula on a trace");
  chk->add_option("--trace", o.trace, "trace CSV")->required()->check(CLI::ExistingFile);
  chk->add_option("--formula", o.formula, "MITL formula")->required();
  chk->add_option("--agent", o.agent, "agent (1-based); default checks every agent and passes if any does");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*abs) return cmd_abstract(o);
    if (*syn) return cmd_synthesize(o);
    if (*sim) return cmd_simulate(o);
    return cmd_check(o);
  } catch (const UnsatisfiableError& e) {
    std::cerr << "unsatisfiable: agent " << e.agent() << ": " << e.what() << '\n';
    return kUnsat;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: agent " << e.agent() << " k " << e.interval() << " z " << e.sample() << ": " << e.what()
              << '\n';
    return kInfeasible;
  } catch (const TerminalDesignError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ValidationError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvalid;
  } catch (const OutOfWorkspaceError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
}
