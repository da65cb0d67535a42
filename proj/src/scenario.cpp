#include "mmp/scenario.hpp"

#include "mmp/errors.hpp"
#include "mmp/mitl.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace mmp {

int Scenario::samples_per_period() const {
  const Rational q = period / sampling;
  return q.denominator() == 1 ? static_cast<int>(q.numerator()) : 0;
}

namespace {

// Source lines of the entries checked across lines.
struct LineInfo {
  int sampling = 0;
  int workspace = 0;
  std::map<int, int> agent;     // agent index → "agent" line
  std::map<int, int> position;  // agent index → "position" line
  std::map<int, int> formula;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  if (line > 0) throw ValidationError("line " + std::to_string(line) + ": " + msg);
  throw ValidationError(msg);
}

void check(const Scenario& s, const LineInfo& li) {
  const Rect& w = s.workspace;
  if (!(w.xmax > w.xmin && w.ymax > w.ymin)) fail(li.workspace, "workspace bounds are degenerate");
  if (!(s.side > 0.0)) fail(0, "side must be positive");
  if (s.period <= Rational(0) || s.sampling <= Rational(0)) fail(li.sampling, "period and sampling must be positive");
  if (s.samples_per_period() <= 0) fail(li.sampling, "period must be an integer multiple of sampling");
  if (s.horizon_cycles < 1) fail(0, "horizon_cycles must be at least 1");
  if (s.min_intervals < 0) fail(0, "min_intervals must be nonnegative");
  const SolverConfig& c = s.solver;
  if (c.starts < 1 || c.iterations < 0 || c.warm_iterations < 0 || c.substeps < 1 || c.dense_factor < 1 ||
      !(c.penalty > 0.0) || c.margin < 0.0 || c.budget < -1 || c.refine < 1 || c.keep_tolerance < 0.0)
    fail(0, "solver settings out of range");
  for (const auto& l : s.labels)
    if (!w.contains(l.at)) fail(0, "label " + l.name + " placed outside the workspace");
  if (s.agents.empty()) fail(0, "no agents");
  const int n = static_cast<int>(s.agents.size());
  for (int i = 0; i < n; ++i) {
    const AgentScenario& a = s.agents[static_cast<std::size_t>(i)];
    const int line = li.agent.count(i) ? li.agent.at(i) : 0;
    if (a.id != i + 1) fail(line, "agents must be numbered 1.." + std::to_string(n) + " in order");
    if (!w.contains(a.position))
      fail(li.position.count(i) ? li.position.at(i) : line, "agent " + std::to_string(a.id) + " starts outside the workspace");
    if (!(a.dynamics.u_max >= 0.0)) fail(line, "u_max must be nonnegative");
    if (!(a.dynamics.sensing > 0.0)) fail(line, "sensing radius must be positive");
    try {
      a.weights.validate();
    } catch (const ValidationError& e) {
      fail(line, e.what());
    }
    try {
      parse_mitl(a.formula);
    } catch (const ValidationError& e) {
      fail(li.formula.count(i) ? li.formula.at(i) : line, std::string("formula: ") + e.what());
    }
    std::vector<int> seen;
    for (const auto& nb : a.dynamics.neighbors) {
      if (nb.agent < 0 || nb.agent >= n || nb.agent == i)
        fail(line, "agent " + std::to_string(a.id) + " has an invalid neighbor " + std::to_string(nb.agent + 1));
      for (int j : seen)
        if (j == nb.agent) fail(line, "duplicate neighbor " + std::to_string(nb.agent + 1));
      seen.push_back(nb.agent);
      const double d = norm(a.position - s.agents[static_cast<std::size_t>(nb.agent)].position);
      if (!(d < a.dynamics.sensing))
        fail(li.position.count(i) ? li.position.at(i) : line,
             "agents " + std::to_string(a.id) + " and " + std::to_string(nb.agent + 1) +
                 " start outside the sensing radius");
    }
  }
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) lines_.push_back(line);
  }

  Scenario run() {
    skip_blank();
    if (pos_ >= lines_.size() || split(lines_[pos_]) != std::vector<std::string>{"mmp-scenario", "v1"})
      fail(static_cast<int>(pos_ + 1), "expected header 'mmp-scenario v1'");
    ++pos_;
    bool have_ws = false, have_side = false, have_T = false, have_h = false;
    while (next()) {
      const auto& t = toks_;
      const std::string& key = t[0];
      if (key == "workspace") {
        want(5);
        s_.workspace = {num(t[1]), num(t[2]), num(t[3]), num(t[4])};
        li_.workspace = line_;
        have_ws = true;
      } else if (key == "side") {
        want(2);
        s_.side = num(t[1]);
        if (!(s_.side > 0.0)) fail(line_, "side must be positive");
        have_side = true;
      } else if (key == "period") {
        want(2);
        s_.period = rat(t[1]);
        have_T = true;
      } else if (key == "sampling") {
        want(2);
        s_.sampling = rat(t[1]);
        li_.sampling = line_;
        have_h = true;
      } else if (key == "horizon_cycles") {
        want(2);
        s_.horizon_cycles = integer(t[1]);
      } else if (key == "min_intervals") {
        want(2);
        s_.min_intervals = integer(t[1]);
      } else if (key == "seed") {
        want(2);
        s_.seed = static_cast<std::uint64_t>(integer(t[1]));
      } else if (key == "label") {
        want(4);
        s_.labels.push_back({t[1], {coord(t[2]), coord(t[3])}});
      } else if (key == "solver") {
        want(1);
        solver();
      } else if (key == "agent") {
        want(2);
        agent(integer(t[1]));
      } else {
        fail(line_, "unknown key '" + key + "'");
      }
    }
    if (!have_ws || !have_side || !have_T || !have_h) fail(0, "workspace, side, period and sampling are required");
    check(s_, li_);
    return s_;
  }

 private:
  void skip_blank() {
    while (pos_ < lines_.size()) {
      const auto t = split(lines_[pos_]);
      if (!t.empty() && t[0][0] != '#') return;
      ++pos_;
    }
  }

  bool next() {
    skip_blank();
    if (pos_ >= lines_.size()) return false;
    raw_ = lines_[pos_];
    toks_ = split(raw_);
    line_ = static_cast<int>(++pos_);
    return true;
  }

  void want(std::size_t n) {
    if (toks_.size() != n)
      fail(line_, "'" + toks_[0] + "' expects " + std::to_string(n - 1) + " value(s)");
  }

  double num(const std::string& s) const {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
      fail(line_, "bad number '" + s + "'");
    return v;
  }

  double coord(const std::string& s) const {
    if (s.size() > 2 && s.ends_with("rh")) {
      if (!side_seen()) fail(line_, "'rh' coordinates need 'side' first");
      return num(s.substr(0, s.size() - 2)) * s_.side * std::numbers::sqrt3 / 2.0;
    }
    return num(s);
  }

  bool side_seen() const {
    for (std::size_t i = 0; i + 1 < pos_; ++i) {
      const auto t = split(lines_[i]);
      if (!t.empty() && t[0] == "side") return true;
    }
    return false;
  }

  int integer(const std::string& s) const {
    int v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(line_, "bad integer '" + s + "'");
    return v;
  }

  Rational rat(const std::string& s) const {
    try {
      return parse_rational(s);
    } catch (const std::exception&) {
      fail(line_, "bad rational '" + s + "'");
    }
  }

  Mat2 mat(std::size_t at) const {
    return {num(toks_[at]), num(toks_[at + 1]), num(toks_[at + 2]), num(toks_[at + 3])};
  }

  void solver() {
    SolverConfig& c = s_.solver;
    const int open = line_;
    while (next()) {
      const auto& t = toks_;
      if (t[0] == "end") {
        want(1);
        return;
      }
      want(2);
      if (t[0] == "starts") c.starts = integer(t[1]);
      else if (t[0] == "iterations") c.iterations = integer(t[1]);
      else if (t[0] == "warm_iterations") c.warm_iterations = integer(t[1]);
      else if (t[0] == "keep_tolerance") c.keep_tolerance = num(t[1]);
      else if (t[0] == "substeps") c.substeps = integer(t[1]);
      else if (t[0] == "dense_factor") c.dense_factor = integer(t[1]);
      else if (t[0] == "penalty") c.penalty = num(t[1]);
      else if (t[0] == "margin") c.margin = num(t[1]);
      else if (t[0] == "budget") c.budget = integer(t[1]);
      else if (t[0] == "refine") c.refine = integer(t[1]);
      else if (t[0] == "tightening") {
        try {
          c.tightening = parse_tightening(t[1]);
        } catch (const ValidationError& e) {
          fail(line_, e.what());
        }
      } else
        fail(line_, "unknown solver key '" + t[0] + "'");
    }
    fail(open, "solver section is not closed with 'end'");
  }

  void agent(int id) {
    AgentScenario a;
    a.id = id;
    const int open = line_;
    const int index = static_cast<int>(s_.agents.size());
    li_.agent[index] = open;
    bool have_pos = false, have_formula = false;
    while (next()) {
      const auto& t = toks_;
      const std::string& key = t[0];
      if (key == "end") {
        want(1);
        if (!have_pos || !have_formula) fail(open, "agent " + std::to_string(id) + " needs position and formula");
        s_.agents.push_back(std::move(a));
        return;
      }
      if (key == "position") {
        want(3);
        a.position = {coord(t[1]), coord(t[2])};
        li_.position[index] = line_;
        have_pos = true;
      } else if (key == "family") {
        want(2);
        if (t[1] != "coupled") fail(line_, "unknown dynamics family '" + t[1] + "'");
      } else if (key == "self") {
        want(5);
        a.dynamics.self = mat(1);
      } else if (key == "neighbor") {
        if (t.size() != 9 || t[2] != "gain" || t[7] != "sin2")
          fail(line_, "expected 'neighbor <id> gain a11 a12 a21 a22 sin2 <c>'");
        a.dynamics.neighbors.push_back({integer(t[1]) - 1, mat(3), num(t[8])});
      } else if (key == "u_max") {
        want(2);
        a.dynamics.u_max = num(t[1]);
      } else if (key == "sensing") {
        want(2);
        a.dynamics.sensing = num(t[1]);
      } else if (key == "weights") {
        if (t.size() != 10 || t[1] != "Q" || t[4] != "R" || t[7] != "P")
          fail(line_, "expected 'weights Q q1 q2 R r1 r2 P p1 p2'");
        a.weights.Q = Mat2::diagonal(num(t[2]), num(t[3]));
        a.weights.R = Mat2::diagonal(num(t[5]), num(t[6]));
        a.weights.P = Mat2::diagonal(num(t[8]), num(t[9]));
      } else if (key == "formula") {
        const auto at = raw_.find("formula");
        std::string text = raw_.substr(at + 7);
        const auto b = text.find_first_not_of(" \t");
        const auto e = text.find_last_not_of(" \t\r");
        text = b == std::string::npos ? "" : text.substr(b, e - b + 1);
        try {
          parse_mitl(text);
        } catch (const ValidationError& err) {
          fail(line_, std::string("formula: ") + err.what());
        }
        a.formula = text;
        li_.formula[index] = line_;
        have_formula = true;
      } else {
        fail(line_, "unknown agent key '" + key + "'");
      }
    }
    fail(open, "agent section is not closed with 'end'");
  }

  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
  std::string raw_;
  std::vector<std::string> toks_;
  int line_ = 0;
  Scenario s_;
  LineInfo li_;
};

}  // namespace

void validate_scenario(const Scenario& s) { check(s, LineInfo{}); }

Scenario parse_scenario(const std::string& text) { return Parser(text).run(); }

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str());
}

std::string print_scenario(const Scenario& s) {
  std::ostringstream os;
  const SolverConfig& c = s.solver;
  os << "mmp-scenario v1\n";
  os << "workspace " << fmt(s.workspace.xmin) << ' ' << fmt(s.workspace.xmax) << ' ' << fmt(s.workspace.ymin) << ' '
     << fmt(s.workspace.ymax) << '\n';
  os << "side " << fmt(s.side) << '\n';
  os << "period " << to_string(s.period) << '\n';
  os << "sampling " << to_string(s.sampling) << '\n';
  os << "horizon_cycles " << s.horizon_cycles << '\n';
  os << "min_intervals " << s.min_intervals << '\n';
  os << "seed " << s.seed << '\n';
  for (const auto& l : s.labels) os << "label " << l.name << ' ' << fmt(l.at.x) << ' ' << fmt(l.at.y) << '\n';
  os << "solver\n";
  os << "  starts " << c.starts << '\n';
  os << "  iterations " << c.iterations << '\n';
  os << "  warm_iterations " << c.warm_iterations << '\n';
  os << "  keep_tolerance " << fmt(c.keep_tolerance) << '\n';
  os << "  tightening " << to_string(c.tightening) << '\n';
  os << "  substeps " << c.substeps << '\n';
  os << "  dense_factor " << c.dense_factor << '\n';
  os << "  penalty " << fmt(c.penalty) << '\n';
  os << "  margin " << fmt(c.margin) << '\n';
  os << "  budget " << c.budget << '\n';
  os << "  refine " << c.refine << '\n';
  os << "end\n";
  auto mat = [](const Mat2& m) { return fmt(m.a11) + ' ' + fmt(m.a12) + ' ' + fmt(m.a21) + ' ' + fmt(m.a22); };
  for (const auto& a : s.agents) {
    os << "agent " << a.id << '\n';
    os << "  position " << fmt(a.position.x) << ' ' << fmt(a.position.y) << '\n';
    os << "  family coupled\n";
    os << "  self " << mat(a.dynamics.self) << '\n';
    for (const auto& nb : a.dynamics.neighbors)
      os << "  neighbor " << nb.agent + 1 << " gain " << mat(nb.gain) << " sin2 " << fmt(nb.sin2) << '\n';
    os << "  u_max " << fmt(a.dynamics.u_max) << '\n';
    os << "  sensing " << fmt(a.dynamics.sensing) << '\n';
    const CostWeights& w = a.weights;
    os << "  weights Q " << fmt(w.Q.a11) << ' ' << fmt(w.Q.a22) << " R " << fmt(w.R.a11) << ' ' << fmt(w.R.a22)
       << " P " << fmt(w.P.a11) << ' ' << fmt(w.P.a22) << '\n';
    os << "  formula " << a.formula << '\n';
    os << "end\n";
  }
  return os.str();
}

Partition scenario_partition(const Scenario& s) {
  Partition bare = build_partition(s.workspace, s.side);
  std::map<int, LabelSet> labels;
  for (const auto& l : s.labels) labels[point_to_region(bare, l.at)].insert(l.name);
  return build_partition(s.workspace, s.side, labels);
}

}  // namespace mmp
