#include "mmp/tba.hpp"

#include "mmp/buchi_graph.hpp"
#include "mmp/errors.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace mmp {

ClockConstraint ClockConstraint::atom(int clock, Cmp cmp, Rational c) {
  ClockConstraint k;
  k.kind = Kind::atom;
  k.clock = clock;
  k.cmp = cmp;
  k.constant = c;
  return k;
}

ClockConstraint ClockConstraint::negation(ClockConstraint a) {
  ClockConstraint k;
  k.kind = Kind::neg;
  k.children.push_back(std::move(a));
  return k;
}

ClockConstraint ClockConstraint::conjunction(ClockConstraint a, ClockConstraint b) {
  if (a.kind == Kind::top) return b;
  if (b.kind == Kind::top) return a;
  ClockConstraint k;
  k.kind = Kind::conj;
  k.children.push_back(std::move(a));
  k.children.push_back(std::move(b));
  return k;
}

ClockConstraint ClockConstraint::within(int clock, const Interval& iv) {
  auto lo = atom(clock, Cmp::ge, iv.lo);
  if (iv.hi.is_infinite()) return lo;
  return conjunction(std::move(lo), atom(clock, Cmp::le, iv.hi.value()));
}

bool eval_clock_constraint(const ClockConstraint& c, const ClockValuation& v) {
  switch (c.kind) {
    case ClockConstraint::Kind::top: return true;
    case ClockConstraint::Kind::atom: {
      if (c.clock < 0 || c.clock >= static_cast<int>(v.size()))
        throw ValidationError("clock constraint references undeclared clock " + std::to_string(c.clock));
      const ExtRational& x = v[static_cast<std::size_t>(c.clock)];
      const ExtRational k(c.constant);
      switch (c.cmp) {
        case Cmp::lt: return x < k;
        case Cmp::le: return x <= k;
        case Cmp::eq: return x == k;
        case Cmp::ge: return x >= k;
        case Cmp::gt: return x > k;
      }
      return false;
    }
    case ClockConstraint::Kind::neg: return !eval_clock_constraint(c.children.front(), v);
    case ClockConstraint::Kind::conj:
      return std::all_of(c.children.begin(), c.children.end(),
                         [&](const ClockConstraint& k) { return eval_clock_constraint(k, v); });
  }
  return false;
}

ExtRational clock_update(const ExtRational& v, const Rational& d, bool reset, const Rational& c_max) {
  if (reset) return ExtRational(Rational(0));
  if (v.is_infinite()) return v;
  const Rational next = v.value() + d;
  if (next <= c_max) return next;
  return ExtRational::infinity();
}

// ---------------------------------------------------------------------------

std::vector<int> TBA::initial_locations() const {
  std::vector<int> out;
  for (std::size_t q = 0; q < locations.size(); ++q)
    if (locations[q].initial) out.push_back(static_cast<int>(q));
  return out;
}

std::vector<std::vector<int>> TBA::outgoing() const {
  std::vector<std::vector<int>> out(locations.size());
  for (std::size_t e = 0; e < edges.size(); ++e) out[static_cast<std::size_t>(edges[e].from)].push_back(static_cast<int>(e));
  return out;
}

namespace {

void visit_constants(const ClockConstraint& c, const auto& fn) {
  if (c.kind == ClockConstraint::Kind::atom) fn(c.constant);
  for (const auto& k : c.children) visit_constants(k, fn);
}

void scale_constants(ClockConstraint& c, std::int64_t factor) {
  if (c.kind == ClockConstraint::Kind::atom) c.constant *= factor;
  for (auto& k : c.children) scale_constants(k, factor);
}

}  // namespace

Rational TBA::c_max() const {
  Rational m{0};
  auto take = [&](const Rational& r) { m = std::max(m, r); };
  for (const auto& l : locations) visit_constants(l.invariant, take);
  for (const auto& e : edges) visit_constants(e.guard, take);
  return m;
}

bool TBA::letter_ok(int loc, const std::vector<std::string>& word_alphabet, Letter l) const {
  const auto& pred = locations[static_cast<std::size_t>(loc)].letters;
  return !pred || eval_letter(*pred, word_alphabet, l);
}

std::pair<TBA, std::int64_t> scale_to_integers(const TBA& a) {
  std::int64_t factor = 1;
  auto take = [&](const Rational& r) { factor = lcm_of_denominators(factor, r); };
  for (const auto& l : a.locations) visit_constants(l.invariant, take);
  for (const auto& e : a.edges) visit_constants(e.guard, take);
  TBA out = a;
  for (auto& l : out.locations) scale_constants(l.invariant, factor);
  for (auto& e : out.edges) scale_constants(e.guard, factor);
  return {std::move(out), factor};
}

TimedWord scale_word(const TimedWord& w, std::int64_t factor) {
  TimedWord out = w;
  for (auto& t : out.times) t *= factor;
  out.period *= factor;
  return out;
}

// ---------------------------------------------------------------------------
// Translation

namespace {

struct GadgetBuilder {
  TBA a;

  int add(std::string name, FormulaPtr letters, ClockConstraint inv, bool initial, bool accepting) {
    a.locations.push_back({std::move(name), std::move(letters), std::move(inv), initial, accepting});
    return static_cast<int>(a.locations.size()) - 1;
  }
  void edge(int from, int to, std::vector<int> resets = {}) {
    a.edges.push_back({from, to, ClockConstraint::top(), std::move(resets)});
  }
};

TBA literal_gadget(const FormulaPtr& psi) {
  GadgetBuilder g;
  const int check = g.add("check", psi, {}, true, false);
  const int done = g.add("done", mitl::truth(), {}, false, true);
  g.edge(check, done);
  g.edge(done, done);
  return std::move(g.a);
}

TBA temporal_gadget(const Formula& f) {
  GadgetBuilder g;
  g.a.clocks = {"c"};
  const auto inv = ClockConstraint::within(0, f.interval);
  switch (f.op) {
    case Op::eventually: {
      const int wait = g.add("wait", mitl::truth(), {}, true, false);
      const int hit = g.add("hit", f.lhs, inv, true, true);
      const int done = g.add("done", mitl::truth(), {}, false, true);
      g.edge(wait, wait);
      g.edge(wait, hit);
      g.edge(hit, done, {0});
      g.edge(done, done, {0});
      break;
    }
    case Op::always: {
      const int hold = g.add("hold", f.lhs, {}, true, true);
      const int free = g.add("free", mitl::neg(f.lhs), ClockConstraint::negation(inv), true, true);
      for (int from : {hold, free})
        for (int to : {hold, free}) g.edge(from, to);
      break;
    }
    case Op::until: {
      const int wait = g.add("wait", f.lhs, {}, true, false);
      const int hit = g.add("hit", f.rhs, inv, true, true);
      const int done = g.add("done", mitl::truth(), {}, false, true);
      g.edge(wait, wait);
      g.edge(wait, hit);
      g.edge(hit, done, {0});
      g.edge(done, done, {0});
      break;
    }
    case Op::next: {
      const int start = g.add("start", mitl::truth(), {}, true, false);
      const int hit = g.add("hit", f.lhs, inv, false, false);
      const int done = g.add("done", mitl::truth(), {}, false, true);
      g.edge(start, hit);
      g.edge(hit, done, {0});
      g.edge(done, done, {0});
      break;
    }
    default: throw ValidationError("not a temporal operator");
  }
  return std::move(g.a);
}

void flatten_conjunction(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->op == Op::conj) {
    flatten_conjunction(f->lhs, out);
    flatten_conjunction(f->rhs, out);
  } else {
    out.push_back(f);
  }
}

void offset_clocks(ClockConstraint& c, int offset) {
  if (c.kind == ClockConstraint::Kind::atom) c.clock += offset;
  for (auto& k : c.children) offset_clocks(k, offset);
}

FormulaPtr conj_letters(const FormulaPtr& a, const FormulaPtr& b) {
  if (!a || a->op == Op::truth) return b;
  if (!b || b->op == Op::truth) return a;
  return mitl::conj(a, b);
}

bool satisfiable_letter(const FormulaPtr& pred, const std::vector<std::string>& alphabet) {
  if (!pred) return true;
  const Letter count = Letter{1} << alphabet.size();
  for (Letter l = 0; l < count; ++l)
    if (eval_letter(*pred, alphabet, l)) return true;
  return false;
}

}  // namespace

TBA synchronized_product(const TBA& a, const TBA& b) {
  TBA out;
  std::set<std::string> sigma(a.alphabet.begin(), a.alphabet.end());
  sigma.insert(b.alphabet.begin(), b.alphabet.end());
  out.alphabet.assign(sigma.begin(), sigma.end());
  const int offset = static_cast<int>(a.clocks.size());
  out.clocks = a.clocks;
  out.clocks.insert(out.clocks.end(), b.clocks.begin(), b.clocks.end());

  const auto out_a = a.outgoing();
  const auto out_b = b.outgoing();
  std::map<std::pair<int, int>, int> ids;
  std::deque<std::pair<int, int>> queue;

  auto location = [&](int qa, int qb, bool initial) -> int {
    auto it = ids.find({qa, qb});
    if (it != ids.end()) return it->second;
    const auto& la = a.locations[static_cast<std::size_t>(qa)];
    const auto& lb = b.locations[static_cast<std::size_t>(qb)];
    auto letters = conj_letters(la.letters, lb.letters);
    if (!satisfiable_letter(letters, out.alphabet)) return -1;
    ClockConstraint inv_b = lb.invariant;
    offset_clocks(inv_b, offset);
    out.locations.push_back({la.name + "." + lb.name, letters, ClockConstraint::conjunction(la.invariant, inv_b), initial,
                             la.accepting && lb.accepting});
    const int id = static_cast<int>(out.locations.size()) - 1;
    ids.emplace(std::make_pair(qa, qb), id);
    queue.emplace_back(qa, qb);
    return id;
  };

  for (int qa : a.initial_locations())
    for (int qb : b.initial_locations()) location(qa, qb, true);

  while (!queue.empty()) {
    const auto [qa, qb] = queue.front();
    queue.pop_front();
    const int from = ids.at({qa, qb});
    for (int ea : out_a[static_cast<std::size_t>(qa)]) {
      for (int eb : out_b[static_cast<std::size_t>(qb)]) {
        const auto& A = a.edges[static_cast<std::size_t>(ea)];
        const auto& B = b.edges[static_cast<std::size_t>(eb)];
        const int to = location(A.to, B.to, false);
        if (to < 0) continue;
        ClockConstraint gb = B.guard;
        offset_clocks(gb, offset);
        std::vector<int> resets = A.resets;
        for (int r : B.resets) resets.push_back(r + offset);
        out.edges.push_back({from, to, ClockConstraint::conjunction(A.guard, gb), std::move(resets)});
      }
    }
  }
  return out;
}

TBA mitl_to_tba(const Formula& f, std::vector<std::string> alphabet) {
  if (!is_flat(f)) throw ValidationError("formula is not in the flat fragment: " + to_string(f));
  if (alphabet.empty()) {
    std::set<std::string> atoms;
    collect_atoms(f, atoms);
    alphabet.assign(atoms.begin(), atoms.end());
  }
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());

  auto shared = std::make_shared<Formula>(f);
  std::vector<FormulaPtr> items;
  flatten_conjunction(shared, items);

  // All propositional conjuncts fold into one position-0 check.
  FormulaPtr literal;
  std::vector<TBA> parts;
  for (const auto& item : items) {
    if (is_propositional(*item)) {
      literal = conj_letters(literal, item);
    } else {
      TBA g = temporal_gadget(*item);
      g.clocks = {"c" + std::to_string(parts.size() + 1)};
      parts.push_back(std::move(g));
    }
  }
  if (literal || parts.empty()) parts.insert(parts.begin(), literal_gadget(literal ? literal : mitl::truth()));

  TBA result = std::move(parts.front());
  result.alphabet = alphabet;
  for (std::size_t k = 1; k < parts.size(); ++k) {
    parts[k].alphabet = alphabet;
    result = synchronized_product(result, parts[k]);
  }
  result.alphabet = alphabet;
  return result;
}

// ---------------------------------------------------------------------------

bool tba_accepts(const TBA& a, const TimedWord& w) {
  if (!w.is_lasso()) throw ValidationError("tba_accepts needs a lasso word");
  const std::size_t n = w.size();
  const Rational cmax = a.c_max();
  const auto out = a.outgoing();
  using Config = std::tuple<std::size_t, int, ClockValuation>;
  std::map<Config, int> ids;
  std::vector<Config> configs;
  ExplicitGraph g;
  std::deque<int> queue;

  auto node = [&](std::size_t pos, int loc, ClockValuation v) {
    Config c{pos, loc, std::move(v)};
    auto it = ids.find(c);
    if (it != ids.end()) return it->second;
    const int id = g.add_node(a.locations[static_cast<std::size_t>(loc)].accepting);
    ids.emplace(c, id);
    configs.push_back(std::move(c));
    queue.push_back(id);
    return id;
  };

  const ClockValuation zero(a.clocks.size(), ExtRational(Rational(0)));
  for (int q : a.initial_locations()) {
    if (!a.letter_ok(q, w.alphabet, w.letters[0])) continue;
    if (!eval_clock_constraint(a.locations[static_cast<std::size_t>(q)].invariant, zero)) continue;
    g.initial.push_back(node(0, q, zero));
  }
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    const auto [pos, loc, nu] = configs[static_cast<std::size_t>(id)];
    const std::size_t next = pos + 1 < n ? pos + 1 : *w.loop_start;
    const Rational d = w.time_at(pos + 1) - w.time_at(pos);
    for (int e : out[static_cast<std::size_t>(loc)]) {
      const auto& edge = a.edges[static_cast<std::size_t>(e)];
      if (!eval_clock_constraint(edge.guard, nu)) continue;
      if (!a.letter_ok(edge.to, w.alphabet, w.letters[next])) continue;
      ClockValuation nu2(nu.size());
      for (std::size_t c = 0; c < nu.size(); ++c) {
        const bool reset = std::find(edge.resets.begin(), edge.resets.end(), static_cast<int>(c)) != edge.resets.end();
        nu2[c] = clock_update(nu[c], d, reset, cmax);
      }
      if (!eval_clock_constraint(a.locations[static_cast<std::size_t>(edge.to)].invariant, nu2)) continue;
      const int to = node(next, edge.to, std::move(nu2));
      g.succ[static_cast<std::size_t>(id)].push_back(to);
    }
  }
  return has_accepting_cycle(g);
}

// ---------------------------------------------------------------------------

std::string to_string(const ClockConstraint& c, const std::vector<std::string>& clocks) {
  switch (c.kind) {
    case ClockConstraint::Kind::top: return "true";
    case ClockConstraint::Kind::atom: {
      static const char* ops[] = {"<", "<=", "==", ">=", ">"};
      const std::string name =
          c.clock >= 0 && c.clock < static_cast<int>(clocks.size()) ? clocks[static_cast<std::size_t>(c.clock)]
                                                                    : "c?" + std::to_string(c.clock);
      return name + " " + ops[static_cast<int>(c.cmp)] + " " + to_string(c.constant);
    }
    case ClockConstraint::Kind::neg: return "!(" + to_string(c.children.front(), clocks) + ")";
    case ClockConstraint::Kind::conj: {
      std::string s;
      for (std::size_t k = 0; k < c.children.size(); ++k) {
        if (k) s += " && ";
        s += to_string(c.children[k], clocks);
      }
      return "(" + s + ")";
    }
  }
  return {};
}

std::string dump_tba(const TBA& a) {
  std::ostringstream os;
  os << "alphabet:";
  for (const auto& p : a.alphabet) os << ' ' << p;
  os << "\nclocks:";
  for (const auto& c : a.clocks) os << ' ' << c;
  os << "\nc_max: " << to_string(a.c_max()) << "\n# location, name, letters, invariant, initial, accepting\n";
  for (std::size_t q = 0; q < a.locations.size(); ++q) {
    const auto& l = a.locations[q];
    os << "location " << q << ", " << l.name << ", " << (l.letters ? to_string(*l.letters) : "true") << ", "
       << to_string(l.invariant, a.clocks) << ", " << (l.initial ? 1 : 0) << ", " << (l.accepting ? 1 : 0) << '\n';
  }
  os << "# edge, from, to, guard, resets\n";
  for (std::size_t e = 0; e < a.edges.size(); ++e) {
    const auto& ed = a.edges[e];
    os << "edge " << e << ", " << ed.from << ", " << ed.to << ", " << to_string(ed.guard, a.clocks) << ",";
    for (int r : ed.resets) os << ' ' << a.clocks[static_cast<std::size_t>(r)];
    os << '\n';
  }
  return os.str();
}

}  // namespace mmp
