#include "mmp/executor.hpp"

#include "mmp/errors.hpp"
#include "mmp/log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mmp {

namespace {
std::size_t run_index(const WtsRun& r, std::size_t mu) {
  if (mu < r.regions.size()) return mu;
  const std::size_t cycle = r.regions.size() - r.loop_start;
  return r.loop_start + (mu - r.loop_start) % cycle;
}
}  // namespace

int AgentSynthesis::region_at(std::size_t mu) const { return run.regions[run_index(run, mu)]; }
int AgentSynthesis::action_at(std::size_t mu) const { return run.actions[run_index(run, mu)]; }

Synthesis synthesize_all(const Scenario& s) {
  validate_scenario(s);
  Synthesis syn;
  syn.partition = std::make_shared<const Partition>(scenario_partition(s));
  const Partition& p = *syn.partition;
  syn.agents.resize(s.agents.size());
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentScenario& a = s.agents[i];
    AgentSynthesis& r = syn.agents[i];
    r.agent = static_cast<int>(i);
    r.ctx = make_context(r.agent, a.dynamics, s.workspace, s.side);
    r.terminal = design_terminal(r.ctx, a.weights, p, s.seed);

    AbstractionSetup setup;
    setup.ctx = &r.ctx;
    setup.partition = &p;
    setup.weights = a.weights;
    setup.terminal = r.terminal;
    setup.config = s.solver;
    setup.h = s.h();
    setup.m = s.samples_per_period();
    for (const auto& nb : a.dynamics.neighbors)
      setup.neighbor_snapshot.push_back(s.agents[static_cast<std::size_t>(nb.agent)].position);
    r.transit = create_transition_relation(setup, a.position);

    r.formula = parse_mitl(a.formula);
    std::set<std::string> atoms;
    collect_atoms(*r.formula, atoms);
    r.alphabet.assign(atoms.begin(), atoms.end());
    r.wts = build_wts(r.transit, p, r.alphabet, s.period);
    r.tba = mitl_to_tba(*r.formula, r.alphabet);
    const BuchiWTS b = build_product(r.wts, r.tba);
    r.product_states = b.size();
    auto run = find_accepting_run(b);
    if (!run)
      throw UnsatisfiableError(a.id, "agent " + std::to_string(a.id) + ": no accepting run for " + a.formula);
    r.product_run = *run;
    r.run = project_run(b, *run);
    r.run_dump = dump_run(b, *run, r.tba);
    log::write(log::Level::info, "synthesis",
               log::Fields{}
                   .add("agent", a.id)
                   .add("wts_transitions", r.wts.transitions.size())
                   .add("tba_locations", r.tba.locations.size())
                   .add("product_states", r.product_states)
                   .add("run_prefix", r.run.loop_start)
                   .add("run_cycle", r.run.regions.size() - r.run.loop_start)
                   .str());
  }
  return syn;
}

Trace simulate_closed_loop(const Scenario& s, const Synthesis& syn, const SimulationOptions& opt) {
  const Partition& p = *syn.partition;
  const std::size_t n = s.agents.size();
  const int cycles = opt.cycles >= 0 ? opt.cycles : s.horizon_cycles;
  int K = s.min_intervals;
  for (const auto& a : syn.agents) {
    if (a.run.empty()) throw ValidationError("empty run for agent " + std::to_string(a.agent + 1));
    const auto prefix = static_cast<int>(a.run.loop_start);
    const auto cycle = static_cast<int>(a.run.regions.size() - a.run.loop_start);
    K = std::max(K, prefix + cycles * cycle);
  }
  const int m = s.samples_per_period();
  SolverConfig cfg = s.solver;
  if (opt.budget != -2) cfg.budget = opt.budget;
  const int df = cfg.dense_factor;
  const double h = s.h();
  const double dt = h / df;

  std::vector<DynamicsSpec> specs;
  for (const auto& a : s.agents) specs.push_back(a.dynamics);

  Trace tr;
  tr.agents = static_cast<int>(n);
  tr.period = s.period;
  tr.samples_per_period = m * df;
  tr.planned.assign(n, {});
  for (std::size_t i = 0; i < n; ++i)
    for (int mu = 0; mu <= K; ++mu) tr.planned[i].push_back(syn.agents[i].region_at(static_cast<std::size_t>(mu)));

  std::vector<Vec2> x;
  for (const auto& a : s.agents) x.push_back(a.position);
  auto record = [&](double t, const std::vector<Vec2>& u) {
    tr.times.push_back(t);
    tr.x.push_back(x);
    tr.u.push_back(u);
    std::vector<int> reg(n);
    std::vector<LabelSet> lab(n);
    for (std::size_t i = 0; i < n; ++i) {
      reg[i] = point_to_region(p, x[i]);
      lab[i] = p.region(reg[i]).labels;
    }
    tr.region.push_back(std::move(reg));
    tr.labels.push_back(std::move(lab));
  };

  std::vector<Vec2> u(n);
  for (int k = 0; k < K; ++k) {
    std::vector<RocpProblem> probs;
    std::vector<WarmStart> warm(n);
    std::vector<TransitionRecord> recs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const AgentSynthesis& a = syn.agents[i];
      const int src = a.region_at(static_cast<std::size_t>(k));
      const int dir = a.action_at(static_cast<std::size_t>(k));
      probs.push_back(make_problem(a.ctx, p, s.agents[i].weights, a.terminal, cfg, src, dir, h, m));
      if (const TransitionPlan* plan = a.transit.find(src, dir)) warm[i].controls = plan->controls;
      recs[i].agent = static_cast<int>(i);
      recs[i].k = k;
      recs[i].src = src;
      recs[i].dir = dir;
      recs[i].dst = probs.back().dst;
      recs[i].start = x[i];
    }
    for (int z = 0; z < m; ++z) {
      const std::vector<Vec2> snapshot = x;
      for (std::size_t i = 0; i < n; ++i) {
        const RocpProblem& prob = probs[i];
        std::vector<Vec2> nb;
        for (const auto& c : s.agents[i].dynamics.neighbors) nb.push_back(snapshot[static_cast<std::size_t>(c.agent)]);
        RocpInstance inst{&prob, z, snapshot[i] - prob.x_des, std::move(nb)};
        auto sol = solve_rocp(inst, warm[i].controls.empty() ? nullptr : &warm[i]);
        if (!sol) {
          log::Fields f;
          f.add("agent", i + 1).add("k", k).add("z", z).add("src", prob.src).add("dst", prob.dst);
          for (std::size_t j = 0; j < n; ++j)
            f.add(("x" + std::to_string(j + 1)).c_str(), std::to_string(snapshot[j].x) + "," + std::to_string(snapshot[j].y));
          log::write(log::Level::error, "closed_loop_infeasible", f.str());
          throw InfeasibleError(static_cast<int>(i) + 1, k, z,
                                "closed-loop solve infeasible for agent " + std::to_string(i + 1) + " at k=" +
                                    std::to_string(k) + " z=" + std::to_string(z));
        }
        recs[i].costs.push_back(sol->cost);
        recs[i].error_norms.push_back(norm(inst.e0));
        if (rho(syn.agents[i].ctx, inst.horizon(), norm(inst.e0)) > syn.agents[i].terminal.rho_bar)
          ++recs[i].rho_bar_violations;
        u[i] = sol->controls.front();
        warm[i].controls.assign(sol->controls.begin() + 1, sol->controls.end());
        DenseTrajectory tail;
        tail.x.assign(sol->dense.x.begin() + df, sol->dense.x.end());
        warm[i].dense = std::move(tail);
      }
      for (int st = 0; st < df; ++st) {
        if (tr.times.empty()) record(0.0, u);
        else tr.u.back() = u;
        x = rk4_step(specs, x, u, dt);
        const double t = to_double(s.period) * k + h * z + dt * (st + 1);
        record(t, u);
        for (std::size_t i = 0; i < n; ++i)
          if (signed_distance_to_pair_union(p, probs[i].src, probs[i].dst, x[i]) > 0.0) recs[i].stayed_in_union = false;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      recs[i].end = x[i];
      recs[i].terminal_error = norm(x[i] - probs[i].x_des);
      tr.transitions.push_back(std::move(recs[i]));
    }
  }
  if (tr.times.empty()) record(0.0, u);
  // Sample times on the interval grid are exact multiples; avoid accumulated drift.
  const double T = to_double(s.period);
  for (std::size_t j = 0; j < tr.times.size(); ++j)
    if (j % static_cast<std::size_t>(tr.samples_per_period) == 0)
      tr.times[j] = T * static_cast<double>(j / static_cast<std::size_t>(tr.samples_per_period));
  return tr;
}

namespace {
std::vector<std::size_t> event_samples(const Trace& t) {
  std::vector<std::size_t> out;
  if (t.samples_per_period > 0) {
    for (std::size_t j = 0; j < t.times.size(); j += static_cast<std::size_t>(t.samples_per_period)) out.push_back(j);
    return out;
  }
  const double T = to_double(t.period);
  for (std::size_t mu = 0;; ++mu) {
    const double target = T * static_cast<double>(mu);
    auto it = std::lower_bound(t.times.begin(), t.times.end(), target - 1e-9);
    if (it == t.times.end() || std::abs(*it - target) > 1e-6) break;
    out.push_back(static_cast<std::size_t>(it - t.times.begin()));
  }
  return out;
}
}  // namespace

TimedWord relaxed_word(const Trace& t, int agent, const std::vector<std::string>& alphabet) {
  const auto samples = event_samples(t);
  std::vector<std::set<std::string>> labels;
  std::vector<Rational> times;
  const std::set<std::string> sigma(alphabet.begin(), alphabet.end());
  for (std::size_t mu = 0; mu < samples.size(); ++mu) {
    std::set<std::string> l;
    for (const auto& a : t.labels[samples[mu]][static_cast<std::size_t>(agent)])
      if (sigma.count(a)) l.insert(a);
    labels.push_back(std::move(l));
    times.push_back(t.period * static_cast<std::int64_t>(mu));
  }
  return make_finite_word(labels, times, alphabet);
}

std::vector<std::pair<double, int>> region_crossings(const Trace& t, int agent) {
  std::vector<std::pair<double, int>> out;
  for (std::size_t j = 0; j < t.times.size(); ++j) {
    const int r = t.region[j][static_cast<std::size_t>(agent)];
    if (out.empty() || out.back().second != r) out.emplace_back(t.times[j], r);
  }
  return out;
}

double cost_decrease_bound(const AgentContext& ctx, const TerminalIngredients& term, double T, double h,
                           double e_norm) {
  const double r = rho(ctx, h, e_norm);
  return (T - 2.0 * h) * r * term.L_F + r * term.L_V;
}

bool Report::satisfied() const {
  if (!connected) return false;
  for (const auto& a : agents)
    if (a.verdict != Verdict::True) return false;
  return true;
}

std::string Report::text() const {
  std::ostringstream os;
  char buf[256];
  for (const auto& a : agents) {
    std::snprintf(buf, sizeof buf,
                  "agent %d formula \"%s\" verdict %s planned %s automaton %s follows_run %s in_unions %s\n", a.agent,
                  a.formula.c_str(), std::string(to_string(a.verdict)).c_str(),
                  std::string(to_string(a.planned_verdict)).c_str(), a.automaton_agrees ? "agree" : "DISAGREE",
                  a.follows_run ? "yes" : "no", a.stayed_in_unions ? "yes" : "no");
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "agent %d terminal_error_max %.6g r_term %.6g %s rho_bar_violations %d cost_monitor_violations %d "
                  "cost_monitor_worst %.6g\n",
                  a.agent, a.max_terminal_error, a.r_term, a.max_terminal_error <= a.r_term ? "PASS" : "FAIL",
                  a.rho_bar_violations, a.cost_monitor_violations, a.cost_monitor_worst);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "connectivity max_distance %.6g sensing %.6g %s\n", max_neighbor_distance, sensing,
                connected ? "PASS" : "FAIL");
  os << buf;
  os << "overall " << (satisfied() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

Report check_trace(const Trace& t, const Scenario& s, const Synthesis& syn) {
  Report rep;
  const double T = s.T();
  const double h = s.h();
  rep.sensing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentSynthesis& a = syn.agents[i];
    AgentReport ar;
    ar.agent = static_cast<int>(i) + 1;
    ar.formula = s.agents[i].formula;
    ar.r_term = a.terminal.r_term;
    const TimedWord w = relaxed_word(t, static_cast<int>(i), a.alphabet);
    ar.verdict = evaluate(*a.formula, w);
    const TimedWord planned = run_word(a.wts, a.run);
    ar.planned_verdict = evaluate(*a.formula, planned);
    ar.automaton_agrees = (ar.planned_verdict == Verdict::True) == tba_accepts(a.tba, planned);
    const auto samples = event_samples(t);
    for (std::size_t mu = 0; mu < samples.size() && mu < t.planned[i].size(); ++mu)
      if (t.region[samples[mu]][i] != t.planned[i][mu]) ar.follows_run = false;
    for (const auto& rec : t.transitions) {
      if (rec.agent != static_cast<int>(i)) continue;
      ar.max_terminal_error = std::max(ar.max_terminal_error, rec.terminal_error);
      ar.rho_bar_violations += rec.rho_bar_violations;
      if (!rec.stayed_in_union) ar.stayed_in_unions = false;
      for (std::size_t z = 0; z + 1 < rec.costs.size(); ++z) {
        const double bound = cost_decrease_bound(a.ctx, a.terminal, T, h, rec.error_norms[z]);
        const double slack = rec.costs[z + 1] - rec.costs[z] - bound;
        ar.cost_monitor_worst = std::max(ar.cost_monitor_worst, slack);
        if (slack > 1e-6) ++ar.cost_monitor_violations;
      }
    }
    rep.agents.push_back(ar);
    for (const auto& nb : s.agents[i].dynamics.neighbors) {
      rep.sensing = std::min(rep.sensing, s.agents[i].dynamics.sensing);
      for (const auto& xs : t.x)
        rep.max_neighbor_distance =
            std::max(rep.max_neighbor_distance, norm(xs[i] - xs[static_cast<std::size_t>(nb.agent)]));
    }
  }
  if (!std::isfinite(rep.sensing)) rep.sensing = 0.0;
  rep.connected = rep.max_neighbor_distance < rep.sensing || rep.sensing == 0.0;
  return rep;
}

std::string trace_csv(const Trace& t) {
  std::ostringstream os;
  const std::size_t n = static_cast<std::size_t>(t.agents);
  os << "# mmp-trace period=" << to_string(t.period) << " agents=" << n
     << " samples_per_period=" << t.samples_per_period << '\n';
  os << 't';
  for (std::size_t i = 1; i <= n; ++i) os << ", x" << i << ", y" << i << ", u" << i << "x, u" << i << 'y';
  for (std::size_t i = 1; i <= n; ++i) os << ", region_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ", labels_" << i;
  os << '\n';
  char buf[64];
  for (std::size_t j = 0; j < t.times.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.10g", t.times[j]);
    os << buf;
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, ", %.12g, %.12g", t.x[j][i].x, t.x[j][i].y);
      os << buf;
      std::snprintf(buf, sizeof buf, ", %.12g, %.12g", t.u[j][i].x, t.u[j][i].y);
      os << buf;
    }
    for (std::size_t i = 0; i < n; ++i) os << ", " << t.region[j][i];
    for (std::size_t i = 0; i < n; ++i) {
      os << ", ";
      bool first = true;
      for (const auto& l : t.labels[j][i]) {
        if (!first) os << '|';
        os << l;
        first = false;
      }
    }
    os << '\n';
  }
  return os.str();
}

Trace parse_trace_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  Trace t;
  if (!std::getline(is, line) || line.rfind("# mmp-trace", 0) != 0) throw ValidationError("trace: missing '# mmp-trace' line");
  {
    std::istringstream hs(line.substr(11));
    std::string kv;
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      try {
        if (k == "period") t.period = parse_rational(v);
        else if (k == "agents") t.agents = std::stoi(v);
        else if (k == "samples_per_period") t.samples_per_period = std::stoi(v);
      } catch (const std::exception&) {
        throw ValidationError("trace: bad header value " + kv);
      }
    }
  }
  if (t.agents <= 0 || t.period <= Rational(0)) throw ValidationError("trace: header needs period and agents");
  if (!std::getline(is, line)) throw ValidationError("trace: missing column header");
  const std::size_t n = static_cast<std::size_t>(t.agents);
  int lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(' ');
      cells.push_back(b == std::string::npos ? "" : cell.substr(b));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 1 + 6 * n)
      throw ValidationError("trace line " + std::to_string(lineno) + ": expected " + std::to_string(1 + 6 * n) + " columns");
    try {
      t.times.push_back(std::stod(cells[0]));
      std::vector<Vec2> xs(n), us(n);
      std::vector<int> reg(n);
      std::vector<LabelSet> lab(n);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = {std::stod(cells[1 + 4 * i]), std::stod(cells[2 + 4 * i])};
        us[i] = {std::stod(cells[3 + 4 * i]), std::stod(cells[4 + 4 * i])};
        reg[i] = std::stoi(cells[1 + 4 * n + i]);
        std::istringstream ps(cells[1 + 5 * n + i]);
        std::string name;
        while (std::getline(ps, name, '|'))
          if (!name.empty()) lab[i].insert(name);
      }
      t.x.push_back(std::move(xs));
      t.u.push_back(std::move(us));
      t.region.push_back(std::move(reg));
      t.labels.push_back(std::move(lab));
    } catch (const std::exception&) {
      throw ValidationError("trace line " + std::to_string(lineno) + ": malformed value");
    }
  }
  if (t.times.empty()) throw ValidationError("trace: no samples");
  return t;
}

}  // namespace mmp
