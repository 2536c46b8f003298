#include <opaq/oracle.hpp>

#include <opaq/rational.hpp>

#include <deque>
#include <sstream>

namespace opaq::oracle {

namespace {

long integer_constant(const Rational& r) {
  if (!rat_is_integer(r))
    throw model::ModelError("discrete semantics needs integer constants; got " +
                            rat_to_string(r));
  return rat_to_long(r);
}

bool ineq_holds(const model::Ineq& q, const std::map<std::string, long>& clocks) {
  if (!q.rhs.coeffs.empty())
    throw model::ModelError("discrete semantics needs a parameter-free model");
  Rational lhs;
  if (q.lhs_kind == model::AtomKind::Clock)
    lhs = clocks.at(q.lhs_name);
  else if (q.lhs_kind == model::AtomKind::Int)
    lhs = q.lhs_value;
  else
    throw model::ModelError("discrete semantics needs a parameter-free model");
  const Rational& rhs = q.rhs.constant;
  switch (q.rel) {
    case model::Rel::Lt: return lhs < rhs;
    case model::Rel::Le: return lhs <= rhs;
    case model::Rel::Eq: return lhs == rhs;
    case model::Rel::Ge: return lhs >= rhs;
    case model::Rel::Gt: return lhs > rhs;
  }
  return false;
}

bool guard_holds(const model::Guard& g, const std::map<std::string, long>& clocks) {
  for (const auto& q : g)
    if (!ineq_holds(q, clocks)) return false;
  return true;
}

// Clock values above every constant in the model behave identically, so they
// are capped at max_constant + 1 to keep the search space finite.
long clock_cap(const model::PTA& ta) {
  Rational mx = 0;
  auto scan = [&](const model::Guard& g) {
    for (const auto& q : g) {
      if (q.rhs.constant > mx) mx = q.rhs.constant;
      if (q.lhs_kind == model::AtomKind::Int && q.lhs_value > mx) mx = q.lhs_value;
    }
  };
  for (const auto& l : ta.locations) scan(l.invariant);
  for (const auto& e : ta.edges) scan(e.guard);
  return integer_constant(Rational(rat_ceil(mx))) + 1;
}

}  // namespace

DurationSets enumerate_durations(const model::PTA& ta, long horizon) {
  if (!ta.params.empty())
    throw model::ModelError("discrete semantics needs a parameter-free model");
  for (const auto& l : ta.locations)
    for (const auto& q : l.invariant) (void)integer_constant(q.rhs.constant);
  for (const auto& e : ta.edges)
    for (const auto& q : e.guard) (void)integer_constant(q.rhs.constant);

  const long cap = clock_cap(ta);
  const std::string final_name = ta.final().name;

  DurationSets out;
  Configuration init;
  init.location = ta.initial().name;
  for (const auto& c : ta.clocks) init.clocks[c] = 0;
  init.elapsed = 0;
  init.visited_private = ta.initial().is_private;
  if (!guard_holds(ta.initial().invariant, init.clocks)) return out;

  std::set<Configuration> seen{init};
  std::deque<Configuration> queue{init};
  while (!queue.empty()) {
    Configuration cur = queue.front();
    queue.pop_front();
    const model::Location& loc = ta.location(cur.location);

    if (cur.location == final_name) {
      // Runs end at the first arrival; record and do not expand.
      bool priv = cur.visited_private || loc.is_private;
      (priv ? out.private_durations : out.public_durations).insert(cur.elapsed);
      continue;
    }

    auto push = [&](Configuration next) {
      if (seen.insert(next).second) queue.push_back(std::move(next));
    };

    for (const auto& e : ta.edges) {
      if (e.source != cur.location) continue;
      if (!guard_holds(e.guard, cur.clocks)) continue;
      Configuration next = cur;
      next.location = e.target;
      for (const auto& r : e.resets) next.clocks.at(r) = 0;
      const model::Location& tgt = ta.location(e.target);
      if (!guard_holds(tgt.invariant, next.clocks)) continue;
      next.visited_private = cur.visited_private || tgt.is_private;
      push(std::move(next));
    }

    if (!loc.is_urgent && cur.elapsed < horizon) {
      Configuration next = cur;
      for (auto& [c, v] : next.clocks) v = std::min(v + 1, cap);
      next.elapsed = cur.elapsed + 1;
      // Invariants are convex, so holding at both endpoints of a unit step
      // means holding throughout it.
      if (guard_holds(loc.invariant, next.clocks)) push(std::move(next));
    }
  }
  return out;
}

ConcreteOpacity check_opacity_concrete(const model::PTA& ta, long horizon) {
  DurationSets sets = enumerate_durations(ta, horizon);
  ConcreteOpacity table;
  table.horizon = horizon;
  for (long d : sets.private_durations) {
    if (sets.public_durations.count(d))
      table.both.insert(d);
    else
      table.private_only.insert(d);
  }
  for (long d : sets.public_durations)
    if (!sets.private_durations.count(d)) table.public_only.insert(d);
  table.exist_opaque = !table.both.empty();
  // Set equality of the two duration sets; vacuously true when no run reaches
  // the final location at all.
  table.fully_opaque = table.private_only.empty() && table.public_only.empty();
  return table;
}

std::string to_csv(const ConcreteOpacity& table) {
  std::ostringstream os;
  os << "duration,visibility-class\n";
  for (long d = 0; d <= table.horizon; ++d) {
    const char* cls = "none";
    if (table.both.count(d))
      cls = "both";
    else if (table.private_only.count(d))
      cls = "private-only";
    else if (table.public_only.count(d))
      cls = "public-only";
    os << d << ',' << cls << '\n';
  }
  return os.str();
}

}  // namespace opaq::oracle
