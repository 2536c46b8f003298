#pragma once

#include <opaq/geometry.hpp>
#include <opaq/rational.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opaq::model {

/// Surface relations as written in guards; Ge/Gt are normalized away only when
/// lowering to geometry rows.
enum class Rel { Lt, Le, Eq, Ge, Gt };

std::string rel_to_string(Rel r);

/// Linear expression over parameters plus a constant; guard right-hand sides.
struct LinearTerm {
  std::map<std::string, Rational> coeffs;  // parameter -> coefficient, nonzero only
  Rational constant{0};

  bool operator==(const LinearTerm&) const = default;
  bool is_constant() const { return coeffs.empty(); }
};

enum class AtomKind { Clock, Param, Int };

/// One inequality of a guard: <clock|param|int> REL <linear term>.
struct Ineq {
  AtomKind lhs_kind{AtomKind::Int};
  std::string lhs_name;     // clock or parameter name, when not Int
  Rational lhs_value{0};    // when Int
  Rel rel{Rel::Le};
  LinearTerm rhs;

  bool operator==(const Ineq&) const = default;
};

/// Conjunction of inequalities; empty means true.
using Guard = std::vector<Ineq>;

struct Location {
  std::string name;
  bool is_init = false;
  bool is_private = false;
  bool is_final = false;
  bool is_urgent = false;
  Guard invariant;

  bool operator==(const Location&) const = default;
};

struct Edge {
  std::string source;
  std::string target;
  Guard guard;
  std::string action;  // empty = the reserved unobservable action
  std::vector<std::string> resets;

  bool operator==(const Edge&) const = default;
};

struct PTA {
  std::string name;
  std::vector<std::string> params;     // declaration order
  std::vector<std::string> clocks;     // declaration order
  std::vector<Location> locations;     // declaration order
  std::vector<Edge> edges;             // declaration order

  bool operator==(const PTA&) const = default;

  const Location& location(const std::string& name) const;
  Location& location(const std::string& name);
  bool has_location(const std::string& name) const;
  const Location& initial() const;
  const Location& final() const;
  /// nullptr when no private location is declared.
  const Location* private_location() const;
  bool is_clock(const std::string& name) const;
  bool is_param(const std::string& name) const;
};

/// Thrown for malformed model text and construction-precondition violations.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parses the line-oriented model format. Diagnostics carry 1-based line
/// numbers. Structural rules enforced here: declared-before-use identifiers,
/// no duplicates, exactly one initial and one final location, at most one
/// private location.
PTA parse_model(const std::string& text);

/// Canonical renderer; parse_model(render_model(p)) == p, and rendering is
/// byte-stable.
std::string render_model(const PTA& pta);

struct Diagnostics {
  int num_clocks = 0;
  int num_params = 0;
  std::vector<std::string> parametric_clocks;
  int class_parametric_clocks = 0;      // clocks compared to a parameter
  int class_nonparametric_clocks = 0;
  int class_params = 0;
  bool reset_free = false;
  bool exact_pet_available = false;     // single-clock methods apply
  std::vector<std::string> warnings;
};

Diagnostics validate(const PTA& pta);

/// Replaces parameters by the given non-negative rational values. Every
/// parameter must be bound and every binding must name a parameter.
PTA substitute(const PTA& pta, const std::map<std::string, Rational>& valuation);

/// Names introduced by the execution-time construction.
inline constexpr const char* kAbsClock = "x_abs";
inline constexpr const char* kDurationParam = "d";

/// Execution-time construction: adds the never-reset clock x_abs and the
/// duration parameter d, makes the final location urgent, removes its
/// outgoing edges, and conjoins x_abs = d to every edge entering it.
/// Errors when the model already uses the reserved names.
PTA build_pet_target(const PTA& pta);

/// Location doubling with a visit bit: runs must pass the tracked copy of the
/// private location before entering the final location. The bit is encoded in
/// location copies; edges into the private location switch to the tracked
/// copy and edges into the final location exist only from tracked sources.
/// Outgoing edges of the untracked final copy are pruned so that first-visit
/// semantics are preserved even if that copy is reachable.
PTA build_private_projection(const PTA& pta);

/// Public projection: the private location is removed together with all
/// incident edges, so no run can visit it. When the private location is
/// initial or final it is kept as a bare disconnected location so the result
/// remains well-formed, still with every incident edge removed.
PTA build_public_projection(const PTA& pta);

/// Pairs (li, lj) such that a run to the final location may contain a
/// sub-path from li to lj whose only resets happen on entry of li and lj:
/// li is initial, or is distinct from the final location and has a resetting
/// incoming edge; lj is final or has a resetting incoming edge.
/// Only defined for single-clock models.
std::vector<std::pair<std::string, std::string>> compute_frp(const PTA& pta);

/// The reset-free fragment automaton between li and lj (single clock only,
/// and (li, lj) must be a valid pair per compute_frp). The duplicate location
/// is named after lj with a "_dup" suffix (made fresh), and the added
/// duration parameter is named "d".
PTA build_resetfree(const PTA& pta, const std::string& li, const std::string& lj);

/// Doubles every coefficient and constant in guards and invariants, then
/// replaces strict comparisons by non-strict ones shifted one unit inward
/// (x < t becomes x <= 2t - 1, x > t becomes x >= 2t + 1). At the same
/// parameter valuation the reachable duration set is exactly scaled by two,
/// with no strict constraint left.
PTA double_system(const PTA& pta);

/// Self-composition for deciding existential opacity of a single-parameter,
/// single-clock model: the private and public projections run side by side
/// with disjoint clock copies and a shared parameter, and entry into the two
/// final locations is synchronized. The product final location is reachable
/// exactly when some duration is shared by a private and a public run.
PTA build_self_composition(const PTA& pta);

// --- helpers shared by other modules ---------------------------------------

/// Lowers a guard to geometry rows over the given variable space (clock names
/// and parameter names are variables).
std::vector<geo::Row> guard_to_rows(const Guard& guard);

/// Parses "p1=2,p2=7/2" into a valuation map.
std::map<std::string, Rational> parse_valuation(const std::string& text);

/// Renders a guard in the canonical surface syntax.
std::string render_guard(const Guard& guard);

}  // namespace opaq::model
