#pragma once

// Parametric execution times. Two routes:
//  - pet_semialg: reachability synthesis on the model extended with an
//    absolute clock and a duration parameter — a polyhedral set when the
//    exploration completes (guaranteed on loop-free zone automata).
//  - pet_via_zones: exact for one-clock models with cycles. Fragments between
//    reset points are analyzed separately, glued into a finite zone automaton,
//    and the duration language is extracted as a regular expression over
//    polyhedral atoms, then brought to a normal form (finite union of
//    base ⊙ loop* terms) that evaluates to an ultimately periodic set at any
//    integer parameter valuation.

#include <opaq/geometry.hpp>
#include <opaq/model.hpp>
#include <opaq/periodic.hpp>
#include <opaq/zonegraph.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace opaq::pet {

struct ZoneExpr;
using ZoneExprPtr = std::shared_ptr<const ZoneExpr>;

struct ZoneExpr {
  enum class Kind { One, Atom, Union, Concat, Star };
  Kind kind = Kind::One;
  geo::PolySet atom;                  // Atom only; over parameters + d
  std::vector<ZoneExprPtr> children;  // Union/Concat: >= 2, Star: exactly 1
};

// Smart constructors: flatten nested unions/concatenations, drop units,
// propagate the empty set (One is the duration-zero unit of concatenation;
// an empty atom annihilates concatenation and its star is One).
ZoneExprPtr ze_one();
ZoneExprPtr ze_atom(geo::PolySet zs);
ZoneExprPtr ze_union(std::vector<ZoneExprPtr> xs);
ZoneExprPtr ze_concat(std::vector<ZoneExprPtr> xs);
ZoneExprPtr ze_star(ZoneExprPtr x);
bool ze_is_zero(const ZoneExprPtr& x);

// Text form with operators `+` (union), `.` (concatenation), `*` (star);
// atoms are rendered as their JSON constraint sets, the unit as `1`.
std::string ze_to_string(const ZoneExprPtr& x);

// ---------------------------------------------------------------------------
// Direct route.

struct PetResult {
  zonegraph::Status status = zonegraph::Status::Complete;
  geo::PolySet set;  // over parameters + d; exact iff status is complete
};

PetResult pet_semialg(const model::PTA& pta,
                      const zonegraph::ExplorationBudget& budget = {});

// ---------------------------------------------------------------------------
// Zone-automaton route (one-clock models).

struct ZoneAutomaton {
  std::vector<std::string> states;  // location names, declaration order
  std::string initial;
  std::string final_state;
  struct Arc {
    std::string from;
    std::string to;
    geo::PolySet label;  // nonempty; over parameters + d
  };
  std::vector<Arc> arcs;
  zonegraph::Status status = zonegraph::Status::Complete;  // worst fragment
};

ZoneAutomaton build_zone_automaton(const model::PTA& pta,
                                   const zonegraph::ExplorationBudget& budget = {});
std::string zone_automaton_dot(const ZoneAutomaton& za);

// State elimination; states are removed in ascending out-degree (self-loops
// excluded), ties broken by name.
ZoneExprPtr regex_extract(const ZoneAutomaton& za);

// ---------------------------------------------------------------------------
// Bar operators on constraint sets: union, and concatenation = Minkowski sum
// in the d direction over the common parameter region.

geo::PolySet bar_union(const geo::PolySet& a, const geo::PolySet& b);
geo::PolySet bar_concat(const geo::PolySet& a, const geo::PolySet& b);

// ---------------------------------------------------------------------------
// Normal form: union of terms base ⊙ loop1* ⊙ … ⊙ loopk*.

struct NormalTerm {
  geo::Polyhedron params_constraint;   // projection of base onto parameters
  geo::Polyhedron base;                // over parameters + d
  std::vector<geo::Polyhedron> loops;  // over parameters + d, full rows kept
};

// `vars` is the atoms' variable space (parameters followed by d).
std::vector<NormalTerm> normalize(const ZoneExprPtr& expr,
                                  const std::vector<std::string>& vars);

// Integer durations of one term / a normal form / an arbitrary expression at
// a parameter valuation. The expression evaluator computes stars by fixpoint
// and serves as a slow reference for the normal form.
arith::PeriodicSet evaluate_term_at(const NormalTerm& term,
                                    const std::map<std::string, Rational>& v);
arith::PeriodicSet evaluate_at(const std::vector<NormalTerm>& terms,
                               const std::map<std::string, Rational>& v);
arith::PeriodicSet evaluate_expr_at(const ZoneExprPtr& expr,
                                    const std::vector<std::string>& vars,
                                    const std::map<std::string, Rational>& v);

struct PetExpression {
  ZoneAutomaton automaton;
  ZoneExprPtr expr;
  std::vector<NormalTerm> terms;
  std::vector<std::string> vars;  // parameters + d
  zonegraph::Status status = zonegraph::Status::Complete;
};

PetExpression pet_via_zones(const model::PTA& pta,
                            const zonegraph::ExplorationBudget& budget = {});

std::string terms_to_json(const std::vector<NormalTerm>& terms);

}  // namespace opaq::pet
