#include "mmp/abstraction.hpp"

#include "mmp/errors.hpp"
#include "mmp/log.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace mmp {

const TransitionPlan* TransitMatrix::find(int src, int dir) const {
  auto it = plans.find({src, dir});
  return it == plans.end() ? nullptr : &it->second;
}

TransitMatrix create_transition_relation(const AbstractionSetup& s, const Vec2& x0) {
  const Partition& p = *s.partition;
  if (!p.bounds().contains(x0)) throw OutOfWorkspaceError("initial position outside the workspace");
  TransitMatrix tm;
  tm.initial_region = point_to_region(p, x0);
  std::set<int> seen{tm.initial_region};
  std::vector<int> layer{tm.initial_region};
  while (!layer.empty()) {
    std::sort(layer.begin(), layer.end());
    std::vector<int> next;
    for (int src : layer) {
      const Vec2 start = p.region(src).center;
      for (int dir = 1; dir <= 6; ++dir) {
        auto dst = neighbor_in_direction(p, src, dir);
        if (!dst) continue;
        ++tm.attempted;
        const RocpProblem prob = make_problem(*s.ctx, p, s.weights, s.terminal, s.config, src, dir, s.h, s.m);
        auto plan = transition_controller(prob, start, s.neighbor_snapshot);
        if (!plan) {
          ++tm.solver_calls;
          continue;
        }
        tm.solver_calls += plan->solver_calls;
        tm.plans.emplace(std::pair{src, dir}, std::move(*plan));
        if (seen.insert(*dst).second) next.push_back(*dst);
      }
    }
    layer = std::move(next);
  }
  log::write(log::Level::info, "abstraction",
             log::Fields{}
                 .add("agent", s.ctx->id + 1)
                 .add("regions", seen.size())
                 .add("attempted", tm.attempted)
                 .add("transitions", tm.plans.size())
                 .add("solver_calls", tm.solver_calls)
                 .str());
  return tm;
}

WTS build_wts(const TransitMatrix& tm, const Partition& p, const std::vector<std::string>& alphabet,
              const Rational& T) {
  WTS w;
  w.alphabet = alphabet;
  const std::set<std::string> sigma(alphabet.begin(), alphabet.end());
  for (const auto& r : p.regions()) {
    w.states.push_back(r.id);
    std::set<std::string> labels;
    std::set_intersection(r.labels.begin(), r.labels.end(), sigma.begin(), sigma.end(),
                          std::inserter(labels, labels.end()));
    w.labels[r.id] = encode_letter(alphabet, labels);
  }
  w.initial = {tm.initial_region};
  for (const auto& [key, plan] : tm.plans) w.transitions.push_back({plan.src, plan.dir, plan.dst, T});
  return w;
}

std::string dump_plans(const TransitMatrix& tm) {
  std::ostringstream os;
  os << "# src, dir, dst, piece, ux, uy\n";
  char buf[160];
  for (const auto& [key, plan] : tm.plans) {
    for (std::size_t k = 0; k < plan.controls.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%d, %d, %d, %zu, %.17g, %.17g\n", plan.src, plan.dir, plan.dst, k,
                    plan.controls[k].x, plan.controls[k].y);
      os << buf;
    }
  }
  return os.str();
}

}  // namespace mmp
