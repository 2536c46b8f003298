#include <opaq/zonegraph.hpp>

#include <deque>
#include <sstream>

namespace opaq::zonegraph {

namespace {

geo::Polyhedron conjoin_guard(const geo::Polyhedron& zone, const model::Guard& g) {
  if (g.empty()) return zone;
  return geo::intersect(zone,
                        geo::Polyhedron::from_rows(zone.vars(), model::guard_to_rows(g)));
}

}  // namespace

std::string status_to_string(Status s) {
  return s == Status::Complete ? "complete" : "budget_exhausted";
}

std::vector<std::string> zone_vars(const model::PTA& pta) {
  std::vector<std::string> vars = pta.clocks;
  vars.insert(vars.end(), pta.params.begin(), pta.params.end());
  return vars;
}

SymbolicState initial_state(const model::PTA& pta) {
  const model::Location& init = pta.initial();
  std::vector<geo::Row> zero_rows;
  for (const auto& c : pta.clocks) {
    geo::Row r;
    r.coeffs[c] = 1;
    r.constant = 0;
    r.rel = geo::Rel::Eq;
    zero_rows.push_back(std::move(r));
  }
  geo::Polyhedron zone = geo::Polyhedron::from_rows(zone_vars(pta), std::move(zero_rows));
  if (!init.is_urgent) zone = zone.time_elapse(pta.clocks);
  zone = conjoin_guard(zone, init.invariant);
  return SymbolicState{init.name, std::move(zone)};
}

std::vector<Successor> successors(const model::PTA& pta, const SymbolicState& s) {
  std::vector<Successor> out;
  for (const auto& e : pta.edges) {
    if (e.source != s.location) continue;
    geo::Polyhedron z = conjoin_guard(s.zone, e.guard);
    if (!z.is_satisfiable()) continue;
    if (!e.resets.empty()) z = z.reset_clocks(e.resets);
    const model::Location& tgt = pta.location(e.target);
    z = conjoin_guard(z, tgt.invariant);
    if (!z.is_satisfiable()) continue;
    if (!tgt.is_urgent) {
      z = z.time_elapse(pta.clocks);
      z = conjoin_guard(z, tgt.invariant);
      if (!z.is_satisfiable()) continue;
    }
    out.push_back(Successor{&e, SymbolicState{e.target, std::move(z)}});
  }
  return out;
}

Reachability ef_synth(const model::PTA& pta, const std::set<std::string>& targets,
                      const ExplorationBudget& budget, bool use_subsumption) {
  for (const auto& t : targets) (void)pta.location(t);

  Reachability reach;
  std::vector<geo::Polyhedron> target_hits;
  // State indices per location, for subsumption lookups.
  std::map<std::string, std::vector<std::size_t>> by_location;

  SymbolicState init = initial_state(pta);
  std::vector<std::string> params = pta.params;
  if (!init.zone.is_satisfiable()) {
    reach.result = geo::PolySet(params);
    return reach;
  }

  auto is_target = [&](const std::string& l) { return targets.count(l) != 0; };

  reach.states.push_back(init);
  reach.depths.push_back(0);
  by_location[init.location].push_back(0);
  if (is_target(init.location)) target_hits.push_back(init.zone.project(params));

  std::deque<std::size_t> queue;
  if (!is_target(init.location)) queue.push_back(0);

  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    std::size_t depth = reach.depths[cur];

    // Copy: reach.states may reallocate while successors are added.
    SymbolicState state = reach.states[cur];
    auto succs = successors(pta, state);

    // Keep only successors not subsumed by (or, without subsumption, equal
    // to) an already-visited zone at the same location; redirect their arcs.
    std::vector<Successor> fresh;
    for (auto& suc : succs) {
      bool absorbed = false;
      for (std::size_t idx : by_location[suc.state.location]) {
        const geo::Polyhedron& old = reach.states[idx].zone;
        bool covered = use_subsumption
                           ? old.includes(suc.state.zone)
                           : (old.includes(suc.state.zone) &&
                              suc.state.zone.includes(old));
        if (covered) {
          reach.arcs.push_back({cur, idx, suc.edge->action});
          absorbed = true;
          break;
        }
      }
      if (!absorbed) fresh.push_back(std::move(suc));
    }

    if (fresh.empty()) continue;
    if (depth >= budget.max_depth) {
      reach.status = Status::BudgetExhausted;
      continue;
    }

    bool out_of_states = false;
    for (auto& suc : fresh) {
      if (reach.states.size() >= budget.max_states) {
        reach.status = Status::BudgetExhausted;
        out_of_states = true;
        break;
      }
      std::size_t idx = reach.states.size();
      reach.arcs.push_back({cur, idx, suc.edge->action});
      by_location[suc.state.location].push_back(idx);
      reach.depths.push_back(depth + 1);
      bool target = is_target(suc.state.location);
      if (target) target_hits.push_back(suc.state.zone.project(params));
      reach.states.push_back(std::move(suc.state));
      if (!target) queue.push_back(idx);
    }
    if (out_of_states) break;
  }

  reach.result = geo::PolySet::from_disjuncts(params, std::move(target_hits));
  return reach;
}

std::string to_dot(const model::PTA& pta, const std::set<std::string>& targets,
                   const Reachability& reach) {
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  };
  std::ostringstream os;
  os << "digraph zonegraph {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=box, fontname=\"monospace\"];\n";
  os << "  __init [shape=point];\n";
  for (std::size_t i = 0; i < reach.states.size(); ++i) {
    const auto& s = reach.states[i];
    os << "  s" << i << " [label=\"" << escape(s.location) << "\\n"
       << escape(geo::pretty_polyhedron(s.zone)) << "\"";
    if (targets.count(s.location)) os << ", peripheries=2";
    os << "];\n";
  }
  if (!reach.states.empty()) os << "  __init -> s0;\n";
  for (const auto& a : reach.arcs) {
    os << "  s" << a.from << " -> s" << a.to;
    if (!a.action.empty()) os << " [label=\"" << escape(a.action) << "\"]";
    os << ";\n";
  }
  os << "  label=\"" << escape(pta.name)
     << " (" << status_to_string(reach.status) << ")\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace opaq::zonegraph
