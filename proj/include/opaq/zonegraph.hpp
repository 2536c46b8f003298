#pragma once

// Symbolic reachability for parametric timed automata. A symbolic state is a
// location plus a parametric zone: a polyhedron over clocks and parameters.
// ef_synth explores breadth-first with inclusion subsumption and returns the
// union of the parameter projections of the zones reaching target locations —
// exact whenever the exploration finishes within budget.

#include <opaq/geometry.hpp>
#include <opaq/model.hpp>

#include <set>
#include <string>
#include <vector>

namespace opaq::zonegraph {

struct SymbolicState {
  std::string location;
  geo::Polyhedron zone;  // over clocks followed by parameters
};

struct ExplorationBudget {
  std::size_t max_states = 10000;
  std::size_t max_depth = 256;  // discrete steps from the initial state
};

enum class Status { Complete, BudgetExhausted };

std::string status_to_string(Status s);

// Variable order used by every zone of this model: clocks, then parameters.
std::vector<std::string> zone_vars(const model::PTA& pta);

// Initial symbolic state: all clocks at zero, time elapse (skipped when the
// initial location is urgent), then the invariant. The zone may be empty.
SymbolicState initial_state(const model::PTA& pta);

struct Successor {
  const model::Edge* edge;
  SymbolicState state;
};

// One-step successors: guard, resets, target invariant, time elapse in the
// target (skipped when the target is urgent), target invariant again.
// Empty results are dropped.
std::vector<Successor> successors(const model::PTA& pta, const SymbolicState& s);

struct Reachability {
  Status status = Status::Complete;
  geo::PolySet result;  // over the model's parameters
  std::vector<SymbolicState> states;  // discovery order
  std::vector<std::size_t> depths;    // per state
  struct Arc {
    std::size_t from = 0;
    std::size_t to = 0;
    std::string action;
  };
  std::vector<Arc> arcs;  // includes arcs into subsuming states
};

// With subsumption on, a new state included in an already-visited zone at the
// same location is dropped (the arc is redirected there); switching it off
// keeps every state up to zone equality — exploration with and without
// subsumption reaches the same parameter set, only slower.
Reachability ef_synth(const model::PTA& pta, const std::set<std::string>& targets,
                      const ExplorationBudget& budget = {},
                      bool use_subsumption = true);

std::string to_dot(const model::PTA& pta, const std::set<std::string>& targets,
                   const Reachability& reach);

}  // namespace opaq::zonegraph
