#include <opaq/pet.hpp>

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace opaq::pet {

namespace {

ZoneExprPtr wrap(ZoneExpr e) { return std::make_shared<const ZoneExpr>(std::move(e)); }

}  // namespace

ZoneExprPtr ze_one() {
  static const ZoneExprPtr one = wrap(ZoneExpr{ZoneExpr::Kind::One, {}, {}});
  return one;
}

ZoneExprPtr ze_atom(geo::PolySet zs) {
  ZoneExpr e;
  e.kind = ZoneExpr::Kind::Atom;
  e.atom = std::move(zs);
  return wrap(std::move(e));
}

bool ze_is_zero(const ZoneExprPtr& x) {
  return x->kind == ZoneExpr::Kind::Atom && x->atom.is_empty();
}

ZoneExprPtr ze_union(std::vector<ZoneExprPtr> xs) {
  std::vector<ZoneExprPtr> flat;
  for (auto& x : xs) {
    if (!x) continue;
    if (ze_is_zero(x)) continue;
    if (x->kind == ZoneExpr::Kind::Union)
      flat.insert(flat.end(), x->children.begin(), x->children.end());
    else
      flat.push_back(std::move(x));
  }
  if (flat.empty()) return ze_atom(geo::PolySet());  // empty language
  if (flat.size() == 1) return flat[0];
  ZoneExpr e;
  e.kind = ZoneExpr::Kind::Union;
  e.children = std::move(flat);
  return wrap(std::move(e));
}

ZoneExprPtr ze_concat(std::vector<ZoneExprPtr> xs) {
  std::vector<ZoneExprPtr> flat;
  for (auto& x : xs) {
    if (!x) continue;
    if (ze_is_zero(x)) return x;  // annihilates
    if (x->kind == ZoneExpr::Kind::One) continue;
    if (x->kind == ZoneExpr::Kind::Concat)
      flat.insert(flat.end(), x->children.begin(), x->children.end());
    else
      flat.push_back(std::move(x));
  }
  if (flat.empty()) return ze_one();
  if (flat.size() == 1) return flat[0];
  ZoneExpr e;
  e.kind = ZoneExpr::Kind::Concat;
  e.children = std::move(flat);
  return wrap(std::move(e));
}

ZoneExprPtr ze_star(ZoneExprPtr x) {
  if (!x || x->kind == ZoneExpr::Kind::One || ze_is_zero(x)) return ze_one();
  if (x->kind == ZoneExpr::Kind::Star) return x;
  ZoneExpr e;
  e.kind = ZoneExpr::Kind::Star;
  e.children.push_back(std::move(x));
  return wrap(std::move(e));
}

std::string ze_to_string(const ZoneExprPtr& x) {
  switch (x->kind) {
    case ZoneExpr::Kind::One:
      return "1";
    case ZoneExpr::Kind::Atom:
      return geo::polyset_to_json(x->atom);
    case ZoneExpr::Kind::Union: {
      std::string out = "(";
      for (std::size_t i = 0; i < x->children.size(); ++i) {
        if (i) out += " + ";
        out += ze_to_string(x->children[i]);
      }
      return out + ")";
    }
    case ZoneExpr::Kind::Concat: {
      std::string out = "(";
      for (std::size_t i = 0; i < x->children.size(); ++i) {
        if (i) out += " . ";
        out += ze_to_string(x->children[i]);
      }
      return out + ")";
    }
    case ZoneExpr::Kind::Star:
      return "(" + ze_to_string(x->children[0]) + ")*";
  }
  return "";
}

// ---------------------------------------------------------------------------

PetResult pet_semialg(const model::PTA& pta, const zonegraph::ExplorationBudget& budget) {
  model::PTA ext = model::build_pet_target(pta);
  auto reach = zonegraph::ef_synth(ext, {ext.final().name}, budget);
  return PetResult{reach.status, std::move(reach.result)};
}

// ---------------------------------------------------------------------------

ZoneAutomaton build_zone_automaton(const model::PTA& pta,
                                   const zonegraph::ExplorationBudget& budget) {
  auto frp = model::compute_frp(pta);
  ZoneAutomaton za;
  za.initial = pta.initial().name;
  za.final_state = pta.final().name;

  std::set<std::string> used;
  for (const auto& [li, lj] : frp) {
    used.insert(li);
    used.insert(lj);
  }
  for (const auto& l : pta.locations)
    if (used.count(l.name)) za.states.push_back(l.name);

  for (const auto& [li, lj] : frp) {
    model::PTA frag = model::build_resetfree(pta, li, lj);
    auto reach = zonegraph::ef_synth(frag, {lj}, budget);
    if (reach.status != zonegraph::Status::Complete)
      za.status = zonegraph::Status::BudgetExhausted;
    if (!reach.result.is_empty())
      za.arcs.push_back(ZoneAutomaton::Arc{li, lj, std::move(reach.result)});
  }
  return za;
}

std::string zone_automaton_dot(const ZoneAutomaton& za) {
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  };
  std::ostringstream os;
  os << "digraph zoneautomaton {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=ellipse];\n";
  os << "  __init [shape=point];\n";
  for (const auto& s : za.states) {
    os << "  \"" << escape(s) << "\"";
    if (s == za.final_state) os << " [peripheries=2]";
    os << ";\n";
  }
  os << "  __init -> \"" << escape(za.initial) << "\";\n";
  for (const auto& a : za.arcs) {
    os << "  \"" << escape(a.from) << "\" -> \"" << escape(a.to) << "\" [label=\""
       << escape(geo::pretty_polyset(a.label)) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------

ZoneExprPtr regex_extract(const ZoneAutomaton& za) {
  const std::size_t n = za.states.size();
  const std::size_t kStart = n, kAccept = n + 1;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[za.states[i]] = i;

  std::map<std::pair<std::size_t, std::size_t>, ZoneExprPtr> arc;
  auto add_arc = [&](std::size_t p, std::size_t q, ZoneExprPtr x) {
    auto it = arc.find({p, q});
    if (it == arc.end())
      arc[{p, q}] = std::move(x);
    else
      it->second = ze_union({it->second, std::move(x)});
  };
  for (const auto& a : za.arcs)
    add_arc(index.at(a.from), index.at(a.to), ze_atom(a.label));
  add_arc(kStart, index.at(za.initial), ze_one());
  add_arc(index.at(za.final_state), kAccept, ze_one());

  std::set<std::size_t> remaining;
  for (std::size_t i = 0; i < n; ++i) remaining.insert(i);

  while (!remaining.empty()) {
    // Cheapest state first: fewest outgoing arcs (self-loops excluded),
    // ties by name.
    std::size_t best = *remaining.begin();
    std::size_t best_deg = SIZE_MAX;
    for (std::size_t q : remaining) {
      std::size_t deg = 0;
      for (const auto& [pq, x] : arc)
        if (pq.first == q && pq.second != q) ++deg;
      if (deg < best_deg ||
          (deg == best_deg && za.states[q] < za.states[best])) {
        best = q;
        best_deg = deg;
      }
    }
    std::size_t q = best;

    ZoneExprPtr loop;
    if (auto it = arc.find({q, q}); it != arc.end()) loop = ze_star(it->second);
    std::vector<std::pair<std::size_t, ZoneExprPtr>> ins, outs;
    for (const auto& [pq, x] : arc) {
      if (pq.second == q && pq.first != q) ins.emplace_back(pq.first, x);
      if (pq.first == q && pq.second != q) outs.emplace_back(pq.second, x);
    }
    for (const auto& [p, a] : ins)
      for (const auto& [r, b] : outs)
        add_arc(p, r, ze_concat({a, loop, b}));

    for (auto it = arc.begin(); it != arc.end();)
      if (it->first.first == q || it->first.second == q)
        it = arc.erase(it);
      else
        ++it;
    remaining.erase(q);
  }

  if (auto it = arc.find({kStart, kAccept}); it != arc.end()) return it->second;
  return ze_atom(geo::PolySet());  // final state unreachable
}

// ---------------------------------------------------------------------------

namespace {

struct DBound {
  std::map<std::string, Rational> coeffs;  // over parameters
  Rational constant{0};
  bool strict = false;
  bool eq = false;
};

struct DBounds {
  std::vector<DBound> lowers;
  std::vector<DBound> uppers;
};

DBounds extract_d_bounds(const geo::Polyhedron& p) {
  DBounds out;
  for (const auto& r : p.rows()) {
    auto it = r.coeffs.find(model::kDurationParam);
    if (it == r.coeffs.end()) continue;
    Rational cd = it->second;
    DBound b;
    for (const auto& [v, c] : r.coeffs)
      if (v != model::kDurationParam) b.coeffs[v] = -c / cd;
    b.constant = r.constant / cd;
    if (r.rel == geo::Rel::Eq) {
      b.eq = true;
      out.lowers.push_back(b);
      out.uppers.push_back(std::move(b));
    } else if (cd > 0) {
      b.strict = (r.rel == geo::Rel::Lt);
      out.uppers.push_back(std::move(b));
    } else {
      b.strict = (r.rel == geo::Rel::Lt);
      out.lowers.push_back(std::move(b));
    }
  }
  // Canonical satisfiable polyhedra always carry a lower bound on d (at
  // least nonnegativity); keep a defensive zero bound anyway. Empty uppers
  // mean unbounded, and the pairwise combination preserves that.
  if (out.lowers.empty()) out.lowers.push_back(DBound{});
  return out;
}

// Minkowski sum in the d direction over the common parameter region; empty
// result reported as nullopt.
std::optional<geo::Polyhedron> combine_pair(const geo::Polyhedron& a,
                                            const geo::Polyhedron& b,
                                            const std::vector<std::string>& vars,
                                            const std::vector<std::string>& params) {
  std::vector<geo::Row> rows;
  geo::Polyhedron pa = a.project(params);
  geo::Polyhedron pb = b.project(params);
  rows.insert(rows.end(), pa.rows().begin(), pa.rows().end());
  rows.insert(rows.end(), pb.rows().begin(), pb.rows().end());

  DBounds da = extract_d_bounds(a);
  DBounds db = extract_d_bounds(b);

  auto emit = [&](const DBound& x, const DBound& y, bool lower) {
    bool both_eq = x.eq && y.eq;
    if (both_eq && !lower) return;  // the equality row is emitted once
    geo::Row r;
    for (const auto& [v, c] : x.coeffs) r.coeffs[v] += c;
    for (const auto& [v, c] : y.coeffs) r.coeffs[v] += c;
    Rational cst = x.constant + y.constant;
    // Here r.coeffs/cst describe the bound term E = sum + cst.
    if (both_eq) {
      // d = E
      geo::Row out;
      out.coeffs[model::kDurationParam] = 1;
      for (const auto& [v, c] : r.coeffs) out.coeffs[v] = -c;
      out.constant = cst;
      out.rel = geo::Rel::Eq;
      rows.push_back(std::move(out));
      return;
    }
    bool strict = x.strict || y.strict;
    geo::Row out;
    if (lower) {
      // d >= E  <=>  E - d <= 0
      out.coeffs = r.coeffs;
      out.coeffs[model::kDurationParam] -= 1;
      out.constant = -cst;
    } else {
      // d <= E  <=>  d - E <= 0
      out.coeffs[model::kDurationParam] = 1;
      for (const auto& [v, c] : r.coeffs) out.coeffs[v] -= c;
      out.constant = cst;
    }
    out.rel = strict ? geo::Rel::Lt : geo::Rel::Le;
    rows.push_back(std::move(out));
  };

  for (const auto& x : da.lowers)
    for (const auto& y : db.lowers) emit(x, y, true);
  for (const auto& x : da.uppers)
    for (const auto& y : db.uppers) emit(x, y, false);

  geo::Polyhedron out = geo::Polyhedron::from_rows(vars, std::move(rows));
  if (!out.is_satisfiable()) return std::nullopt;
  return out;
}

std::vector<std::string> params_of(const std::vector<std::string>& vars) {
  std::vector<std::string> params;
  for (const auto& v : vars)
    if (v != model::kDurationParam) params.push_back(v);
  return params;
}

}  // namespace

geo::PolySet bar_union(const geo::PolySet& a, const geo::PolySet& b) {
  return geo::polyset_union(a, b);
}

geo::PolySet bar_concat(const geo::PolySet& a, const geo::PolySet& b) {
  if (a.vars() != b.vars())
    throw std::invalid_argument("bar_concat needs matching variable spaces");
  const std::vector<std::string>& vars = a.vars();
  std::vector<std::string> params = params_of(vars);
  std::vector<geo::Polyhedron> pieces;
  for (const auto& pa : a.disjuncts())
    for (const auto& pb : b.disjuncts())
      if (auto p = combine_pair(pa, pb, vars, params)) pieces.push_back(std::move(*p));
  return geo::PolySet::from_disjuncts(vars, std::move(pieces));
}

// ---------------------------------------------------------------------------

namespace {

struct RawTerm {
  geo::Polyhedron base;
  std::vector<geo::Polyhedron> loops;
};

geo::Polyhedron duration_zero(const std::vector<std::string>& vars);

void add_loop(std::vector<geo::Polyhedron>& loops, const geo::Polyhedron& l) {
  if (!l.is_satisfiable()) return;  // empty loop: star is {0}, a no-op
  // A loop that only ever takes zero time is a no-op as well.
  if (duration_zero(l.vars()).includes(l)) return;
  for (const auto& existing : loops)
    if (existing == l) return;  // stars are idempotent
  loops.push_back(l);
}

std::optional<RawTerm> merge_terms(const RawTerm& x, const RawTerm& y,
                                   const std::vector<std::string>& vars,
                                   const std::vector<std::string>& params) {
  auto base = combine_pair(x.base, y.base, vars, params);
  if (!base) return std::nullopt;
  RawTerm out;
  out.base = std::move(*base);
  out.loops = x.loops;
  for (const auto& l : y.loops) add_loop(out.loops, l);
  return out;
}

std::vector<RawTerm> cross_merge(const std::vector<RawTerm>& xs,
                                 const std::vector<RawTerm>& ys,
                                 const std::vector<std::string>& vars,
                                 const std::vector<std::string>& params) {
  std::vector<RawTerm> out;
  for (const auto& x : xs)
    for (const auto& y : ys)
      if (auto t = merge_terms(x, y, vars, params)) out.push_back(std::move(*t));
  return out;
}

geo::Polyhedron duration_zero(const std::vector<std::string>& vars) {
  geo::Row r;
  r.coeffs[model::kDurationParam] = 1;
  r.constant = 0;
  r.rel = geo::Rel::Eq;
  return geo::Polyhedron::from_rows(vars, {std::move(r)});
}

std::vector<RawTerm> norm_rec(const ZoneExprPtr& expr,
                              const std::vector<std::string>& vars,
                              const std::vector<std::string>& params) {
  switch (expr->kind) {
    case ZoneExpr::Kind::One:
      return {RawTerm{duration_zero(vars), {}}};
    case ZoneExpr::Kind::Atom: {
      std::vector<RawTerm> out;
      for (const auto& p : expr->atom.disjuncts()) out.push_back(RawTerm{p, {}});
      return out;
    }
    case ZoneExpr::Kind::Union: {
      std::vector<RawTerm> out;
      for (const auto& c : expr->children) {
        auto sub = norm_rec(c, vars, params);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case ZoneExpr::Kind::Concat: {
      std::vector<RawTerm> acc{RawTerm{duration_zero(vars), {}}};
      for (const auto& c : expr->children)
        acc = cross_merge(acc, norm_rec(c, vars, params), vars, params);
      return acc;
    }
    case ZoneExpr::Kind::Star: {
      // Star of a union is the concatenation of the stars (sums commute),
      // and the star of one term t = F ⊙ S1* ⊙ … ⊙ Sk* is
      //   {d=0} ∪ (F ⊙ F* ⊙ S1* ⊙ … ⊙ Sk*),
      // both exact because starred sets are idempotent under ⊙.
      auto sub = norm_rec(expr->children[0], vars, params);
      std::vector<RawTerm> acc{RawTerm{duration_zero(vars), {}}};
      for (const auto& t : sub) {
        std::vector<RawTerm> starred;
        starred.push_back(RawTerm{duration_zero(vars), {}});
        RawTerm looped = t;
        add_loop(looped.loops, t.base);
        starred.push_back(std::move(looped));
        acc = cross_merge(acc, starred, vars, params);
      }
      return acc;
    }
  }
  return {};
}

}  // namespace

std::vector<NormalTerm> normalize(const ZoneExprPtr& expr,
                                  const std::vector<std::string>& vars) {
  std::vector<std::string> params = params_of(vars);
  std::vector<RawTerm> raw = norm_rec(expr, vars, params);
  std::vector<NormalTerm> out;
  for (auto& t : raw) {
    if (!t.base.is_satisfiable()) continue;
    NormalTerm nt;
    nt.params_constraint = t.base.project(params);
    nt.base = std::move(t.base);
    nt.loops = std::move(t.loops);
    bool duplicate = false;
    for (const auto& seen : out)
      if (seen.base == nt.base && seen.loops == nt.loops) {
        duplicate = true;
        break;
      }
    if (!duplicate) out.push_back(std::move(nt));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct DInterval {
  long lo = 0;
  std::optional<long> hi;
};

// Integer values of d satisfying the rows at valuation v; nullopt when empty.
std::optional<DInterval> d_interval_at(const geo::Polyhedron& p,
                                       const std::map<std::string, Rational>& v) {
  if (!p.is_satisfiable()) return std::nullopt;
  DInterval iv;
  for (const auto& r : p.rows()) {
    Rational sum = 0;
    Rational cd = 0;
    for (const auto& [name, c] : r.coeffs) {
      if (name == model::kDurationParam) {
        cd = c;
        continue;
      }
      auto it = v.find(name);
      if (it == v.end())
        throw std::invalid_argument("valuation misses parameter " + name);
      sum += c * it->second;
    }
    if (cd == 0) {
      bool ok = false;
      if (r.rel == geo::Rel::Lt) ok = sum < r.constant;
      if (r.rel == geo::Rel::Le) ok = sum <= r.constant;
      if (r.rel == geo::Rel::Eq) ok = sum == r.constant;
      if (!ok) return std::nullopt;
      continue;
    }
    Rational bound = (r.constant - sum) / cd;
    if (r.rel == geo::Rel::Eq) {
      // both directions, non-strict: empty when the bound is fractional
      long lo = rat_to_long(Rational(rat_ceil(bound)));
      long hi = rat_to_long(Rational(rat_floor(bound)));
      iv.lo = std::max(iv.lo, lo);
      iv.hi = iv.hi ? std::min(*iv.hi, hi) : hi;
      continue;
    }
    bool strict = (r.rel == geo::Rel::Lt);
    if (cd > 0) {  // upper bound
      long hi = strict ? rat_to_long(Rational(rat_ceil(bound))) - 1
                       : rat_to_long(Rational(rat_floor(bound)));
      iv.hi = iv.hi ? std::min(*iv.hi, hi) : hi;
    } else {  // lower bound (division flipped the relation)
      long lo = strict ? rat_to_long(Rational(rat_floor(bound))) + 1
                       : rat_to_long(Rational(rat_ceil(bound)));
      iv.lo = std::max(iv.lo, lo);
    }
  }
  if (iv.hi && *iv.hi < iv.lo) return std::nullopt;
  return iv;
}

arith::PeriodicSet interval_to_ps(const DInterval& iv) {
  if (!iv.hi) return arith::PeriodicSet::from_lower_bound(iv.lo);
  std::set<long> elems;
  for (long n = iv.lo; n <= *iv.hi; ++n) elems.insert(n);
  return arith::PeriodicSet::from_elements(elems);
}

}  // namespace

arith::PeriodicSet evaluate_term_at(const NormalTerm& term,
                                    const std::map<std::string, Rational>& v) {
  if (!term.params_constraint.contains_point(v)) return arith::PeriodicSet::empty_set();
  auto base_iv = d_interval_at(term.base, v);
  if (!base_iv) return arith::PeriodicSet::empty_set();
  arith::PeriodicSet acc = interval_to_ps(*base_iv);
  for (const auto& loop : term.loops) {
    auto iv = d_interval_at(loop, v);
    if (!iv) continue;  // empty loop contributes only zero iterations
    acc = arith::ps_sum(acc, arith::interval_star(iv->lo, iv->hi));
  }
  return acc;
}

arith::PeriodicSet evaluate_at(const std::vector<NormalTerm>& terms,
                               const std::map<std::string, Rational>& v) {
  arith::PeriodicSet acc = arith::PeriodicSet::empty_set();
  for (const auto& t : terms) acc = arith::ps_union(acc, evaluate_term_at(t, v));
  return acc;
}

arith::PeriodicSet evaluate_expr_at(const ZoneExprPtr& expr,
                                    const std::vector<std::string>& vars,
                                    const std::map<std::string, Rational>& v) {
  switch (expr->kind) {
    case ZoneExpr::Kind::One:
      return arith::PeriodicSet::from_elements({0});
    case ZoneExpr::Kind::Atom: {
      arith::PeriodicSet acc = arith::PeriodicSet::empty_set();
      for (const auto& p : expr->atom.disjuncts()) {
        if (auto iv = d_interval_at(p, v))
          acc = arith::ps_union(acc, interval_to_ps(*iv));
      }
      return acc;
    }
    case ZoneExpr::Kind::Union: {
      arith::PeriodicSet acc = arith::PeriodicSet::empty_set();
      for (const auto& c : expr->children)
        acc = arith::ps_union(acc, evaluate_expr_at(c, vars, v));
      return acc;
    }
    case ZoneExpr::Kind::Concat: {
      arith::PeriodicSet acc = arith::PeriodicSet::from_elements({0});
      for (const auto& c : expr->children)
        acc = arith::ps_sum(acc, evaluate_expr_at(c, vars, v));
      return acc;
    }
    case ZoneExpr::Kind::Star:
      return arith::ps_star(evaluate_expr_at(expr->children[0], vars, v));
  }
  return arith::PeriodicSet::empty_set();
}

// ---------------------------------------------------------------------------

PetExpression pet_via_zones(const model::PTA& pta,
                            const zonegraph::ExplorationBudget& budget) {
  PetExpression out;
  out.automaton = build_zone_automaton(pta, budget);
  out.expr = regex_extract(out.automaton);
  out.vars = pta.params;
  out.vars.push_back(model::kDurationParam);
  out.terms = normalize(out.expr, out.vars);
  out.status = out.automaton.status;
  return out;
}

std::string terms_to_json(const std::vector<NormalTerm>& terms) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : terms) {
    nlohmann::json jt;
    jt["params_constraint"] =
        nlohmann::json::parse(geo::polyhedron_to_json(t.params_constraint));
    jt["base"] = nlohmann::json::parse(geo::polyhedron_to_json(t.base));
    nlohmann::json loops = nlohmann::json::array();
    for (const auto& l : t.loops)
      loops.push_back(nlohmann::json::parse(geo::polyhedron_to_json(l)));
    jt["loops"] = std::move(loops);
    arr.push_back(std::move(jt));
  }
  return arr.dump();
}

}  // namespace opaq::pet
