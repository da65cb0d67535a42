#include "mmp/product.hpp"

#include "mmp/errors.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <tuple>

namespace mmp {

std::map<int, std::vector<int>> WTS::outgoing() const {
  std::map<int, std::vector<int>> out;
  for (int s : states) out[s];
  for (std::size_t k = 0; k < transitions.size(); ++k) out[transitions[k].src].push_back(static_cast<int>(k));
  return out;
}

Letter WTS::label(int state) const {
  auto it = labels.find(state);
  return it == labels.end() ? 0 : it->second;
}

std::string dump_wts(const WTS& t) {
  std::ostringstream os;
  os << "alphabet:";
  for (const auto& p : t.alphabet) os << ' ' << p;
  os << "\ninitial:";
  for (int s : t.initial) os << ' ' << s;
  os << "\n# state, labels\n";
  for (int s : t.states) {
    os << "state " << s;
    for (const auto& p : decode_letter(t.alphabet, t.label(s))) os << ' ' << p;
    os << '\n';
  }
  os << "# src_region, dir, dst_region, weight\n";
  for (const auto& tr : t.transitions)
    os << tr.src << ", " << tr.action << ", " << tr.dst << ", " << to_string(tr.weight) << '\n';
  return os.str();
}

BuchiWTS build_product(const WTS& t, const TBA& a) {
  if (t.alphabet != a.alphabet) throw ValidationError("WTS and TBA alphabets differ");
  BuchiWTS b;
  b.c_max = a.c_max();
  for (const auto& tr : t.transitions) {
    if (tr.weight <= Rational(0)) throw ValidationError("WTS weights must be positive");
    if (b.step == Rational(0)) b.step = tr.weight;
    if (tr.weight != b.step) throw ValidationError("product requires uniform WTS weights");
  }
  const auto wts_out = t.outgoing();
  const auto tba_out = a.outgoing();

  using Key = std::tuple<int, int, ClockValuation>;
  std::map<Key, int> ids;
  std::deque<int> queue;
  auto node = [&](int s, int q, const ClockValuation& v) {
    Key key{s, q, v};
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    const int id = b.graph.add_node(a.locations[static_cast<std::size_t>(q)].accepting);
    b.actions.emplace_back();
    b.states.push_back({s, q, v});
    ids.emplace(std::move(key), id);
    queue.push_back(id);
    return id;
  };

  const ClockValuation zero(a.clocks.size(), ExtRational(Rational(0)));
  std::vector<std::pair<int, int>> init;
  for (int s : t.initial)
    for (int q : a.initial_locations()) init.emplace_back(s, q);
  std::sort(init.begin(), init.end());
  for (auto [s, q] : init) {
    if (!a.letter_ok(q, t.alphabet, t.label(s))) continue;
    if (!eval_clock_constraint(a.locations[static_cast<std::size_t>(q)].invariant, zero)) continue;
    b.graph.initial.push_back(node(s, q, zero));
  }

  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    const ProductState cur = b.states[static_cast<std::size_t>(id)];
    std::vector<std::tuple<int, int, ClockValuation, int>> succ;  // region, location, clocks, action
    auto wit = wts_out.find(cur.region);
    if (wit == wts_out.end()) continue;
    for (int k : wit->second) {
      const auto& tr = t.transitions[static_cast<std::size_t>(k)];
      for (int e : tba_out[static_cast<std::size_t>(cur.location)]) {
        const auto& edge = a.edges[static_cast<std::size_t>(e)];
        if (!eval_clock_constraint(edge.guard, cur.clocks)) continue;
        if (!a.letter_ok(edge.to, t.alphabet, t.label(tr.dst))) continue;
        ClockValuation nu(cur.clocks.size());
        for (std::size_t c = 0; c < nu.size(); ++c) {
          const bool reset =
              std::find(edge.resets.begin(), edge.resets.end(), static_cast<int>(c)) != edge.resets.end();
          nu[c] = clock_update(cur.clocks[c], tr.weight, reset, b.c_max);
        }
        if (!eval_clock_constraint(a.locations[static_cast<std::size_t>(edge.to)].invariant, nu)) continue;
        succ.emplace_back(tr.dst, edge.to, std::move(nu), tr.action);
      }
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end(),
                           [](const auto& x, const auto& y) {
                             return std::get<0>(x) == std::get<0>(y) && std::get<1>(x) == std::get<1>(y) &&
                                    std::get<2>(x) == std::get<2>(y);
                           }),
               succ.end());
    for (const auto& [s, q, nu, act] : succ) {
      const int to = node(s, q, nu);
      b.graph.succ[static_cast<std::size_t>(id)].push_back(to);
      b.actions[static_cast<std::size_t>(id)].push_back(act);
    }
  }
  return b;
}

std::optional<ProductRun> find_accepting_run(const BuchiWTS& b) {
  if (!has_accepting_cycle(b.graph)) return std::nullopt;
  auto lasso = find_lasso(b.graph);
  if (!lasso) return std::nullopt;
  ProductRun run;
  run.states = lasso->prefix;
  run.loop_start = run.states.size();
  run.states.insert(run.states.end(), lasso->cycle.begin(), lasso->cycle.end());
  run.step = b.step;
  return run;
}

WtsRun project_run(const BuchiWTS& b, const ProductRun& run) {
  WtsRun out;
  out.loop_start = run.loop_start;
  out.step = run.step;
  const std::size_t n = run.states.size();
  for (std::size_t mu = 0; mu < n; ++mu) {
    const int v = run.states[mu];
    out.regions.push_back(b.states[static_cast<std::size_t>(v)].region);
    const int next = mu + 1 < n ? run.states[mu + 1] : run.states[run.loop_start];
    const auto& succ = b.graph.succ[static_cast<std::size_t>(v)];
    auto it = std::find(succ.begin(), succ.end(), next);
    if (it == succ.end()) throw ValidationError("run is not a path of the product");
    out.actions.push_back(b.actions[static_cast<std::size_t>(v)][static_cast<std::size_t>(it - succ.begin())]);
  }
  return out;
}

TimedWord run_word(const WTS& t, const WtsRun& run) {
  TimedWord w;
  w.alphabet = t.alphabet;
  for (std::size_t mu = 0; mu < run.regions.size(); ++mu) {
    w.letters.push_back(t.label(run.regions[mu]));
    w.times.push_back(run.step * static_cast<std::int64_t>(mu));
  }
  w.loop_start = run.loop_start;
  w.period = run.step * static_cast<std::int64_t>(run.regions.size() - run.loop_start);
  return w;
}

std::string dump_run(const BuchiWTS& b, const ProductRun& run, const TBA& a) {
  std::ostringstream os;
  os << "loop_start: " << run.loop_start << "\n# mu, region, tba_location, clocks, tau\n";
  for (std::size_t mu = 0; mu < run.states.size(); ++mu) {
    const auto& st = b.states[static_cast<std::size_t>(run.states[mu])];
    os << mu << ", " << st.region << ", " << a.locations[static_cast<std::size_t>(st.location)].name << ",";
    for (const auto& c : st.clocks) os << ' ' << to_string(c);
    os << ", " << to_string(run.time_at(mu)) << '\n';
  }
  return os.str();
}

}  // namespace mmp
