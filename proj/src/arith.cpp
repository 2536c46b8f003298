#include <opaq/arith.hpp>

#include <opaq/model.hpp>

#include <json.hpp>

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace opaq::arith {

namespace {

long to_long(const Rational& r) { return rat_to_long(r); }

long floor_long(const Rational& r) { return to_long(Rational(rat_floor(r))); }
long ceil_long(const Rational& r) { return to_long(Rational(rat_ceil(r))); }

// Smallest integer satisfying the lower bound / largest satisfying the upper.
long eff_lower(const AffineBound& b, long p) {
  Rational v = b.at(p);
  return b.strict ? floor_long(v) + 1 : ceil_long(v);
}
long eff_upper(const AffineBound& b, long p) {
  Rational v = b.at(p);
  return b.strict ? ceil_long(v) - 1 : floor_long(v);
}

// Bounds on the parameter itself, from a one-variable polyhedron.
struct ParamWindow {
  long live_from = 0;                // rows hold for all integers >= live_from
  std::optional<long> dead_from;     // rows fail for all integers >= dead_from
};

ParamWindow analyze_param_rows(const geo::Polyhedron& p, const std::string& param) {
  ParamWindow w;
  auto kill_from = [&](long m) {
    m = std::max(m, 0L);
    w.dead_from = w.dead_from ? std::min(*w.dead_from, m) : m;
  };
  for (const auto& r : p.rows()) {
    auto it = r.coeffs.find(param);
    if (it == r.coeffs.end()) continue;  // constant rows never survive canon
    Rational a = it->second;
    Rational bound = r.constant / a;
    if (r.rel == geo::Rel::Eq) {
      // a single admissible value
      kill_from(floor_long(bound) + 1);
      w.live_from = std::max(w.live_from, ceil_long(bound));
    } else if (a > 0) {
      // p <= bound (or <): dead beyond it
      bool strict = (r.rel == geo::Rel::Lt);
      kill_from(strict ? ceil_long(bound) : floor_long(bound) + 1);
    } else {
      // p >= bound (or >): live from it
      bool strict = (r.rel == geo::Rel::Lt);
      w.live_from = std::max(w.live_from,
                             strict ? floor_long(bound) + 1 : ceil_long(bound));
    }
  }
  return w;
}

struct BoundLists {
  std::vector<AffineBound> lowers;
  std::vector<AffineBound> uppers;
};

BoundLists extract_affine_bounds(const geo::Polyhedron& poly, const std::string& param) {
  BoundLists out;
  for (const auto& r : poly.rows()) {
    auto it = r.coeffs.find(model::kDurationParam);
    if (it == r.coeffs.end()) continue;
    Rational cd = it->second;
    Rational cp = 0;
    if (auto pit = r.coeffs.find(param); pit != r.coeffs.end()) cp = pit->second;
    AffineBound b;
    b.slope = -cp / cd;
    b.offset = r.constant / cd;
    if (r.rel == geo::Rel::Eq) {
      out.lowers.push_back(b);
      out.uppers.push_back(b);
    } else if (cd > 0) {
      b.strict = (r.rel == geo::Rel::Lt);
      out.uppers.push_back(b);
    } else {
      b.strict = (r.rel == geo::Rel::Lt);
      out.lowers.push_back(b);
    }
  }
  return out;
}

// Pick the bound that is binding for every sufficiently large p, recording
// the crossover requirements that make "sufficiently large" concrete.
AffineBound dominant(const std::vector<AffineBound>& bounds, bool lower,
                     long& req_m) {
  AffineBound best = bounds.front();
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    const AffineBound& b = bounds[i];
    bool wins;
    if (b.slope != best.slope) {
      Rational cross = (best.offset - b.offset) / (b.slope - best.slope);
      req_m = std::max(req_m, floor_long(cross) + 1);
      wins = lower ? b.slope > best.slope : b.slope < best.slope;
    } else if (b.offset != best.offset) {
      wins = lower ? b.offset > best.offset : b.offset < best.offset;
    } else {
      wins = b.strict && !best.strict;  // the strict twin binds tighter
    }
    if (wins) best = b;
  }
  return best;
}

}  // namespace

LpSlSet to_lpsl(const std::vector<pet::NormalTerm>& terms, const std::string& param) {
  LpSlSet out;
  out.param = param;
  long req_m = 0;
  std::vector<LpSlTerm> shapes;

  for (const auto& t : terms) {
    for (const auto& v : t.base.vars())
      if (v != param && v != model::kDurationParam)
        throw std::invalid_argument("lpsl form needs exactly one parameter; found " + v);

    ParamWindow w = analyze_param_rows(t.params_constraint, param);
    if (w.dead_from) {
      req_m = std::max(req_m, *w.dead_from);
      continue;  // only contributes below the threshold
    }
    req_m = std::max(req_m, w.live_from);

    LpSlTerm shape;
    BoundLists bl = extract_affine_bounds(t.base, param);
    if (bl.lowers.empty()) bl.lowers.push_back(AffineBound{});  // d >= 0
    shape.base_lo = dominant(bl.lowers, true, req_m);
    if (!bl.uppers.empty())
      shape.base_hi = dominant(bl.uppers, false, req_m);

    for (const auto& loop : t.loops) {
      geo::Polyhedron pp = loop.project({param});
      ParamWindow lw = analyze_param_rows(pp, param);
      if (lw.dead_from) {
        req_m = std::max(req_m, *lw.dead_from);
        continue;  // the loop is inactive for all p >= M
      }
      req_m = std::max(req_m, lw.live_from);
      LoopShape ls;
      BoundLists lb = extract_affine_bounds(loop, param);
      if (lb.lowers.empty()) lb.lowers.push_back(AffineBound{});
      ls.lo = dominant(lb.lowers, true, req_m);
      if (!lb.uppers.empty()) ls.hi = dominant(lb.uppers, false, req_m);
      shape.loops.push_back(std::move(ls));
    }
    shapes.push_back(std::move(shape));
  }

  out.threshold = req_m;
  out.terms = std::move(shapes);
  for (long p = 0; p < out.threshold; ++p)
    out.low_valuations[p] = pet::evaluate_at(terms, {{param, Rational(p)}});
  return out;
}

PeriodicSet evaluate_lpsl(const LpSlSet& s, long p) {
  if (p < 0) return PeriodicSet::empty_set();
  if (p < s.threshold) {
    auto it = s.low_valuations.find(p);
    return it == s.low_valuations.end() ? PeriodicSet::empty_set() : it->second;
  }
  PeriodicSet acc = PeriodicSet::empty_set();
  for (const auto& t : s.terms) {
    long lo = std::max(0L, eff_lower(t.base_lo, p));
    std::optional<long> hi;
    if (t.base_hi) {
      hi = eff_upper(*t.base_hi, p);
      if (*hi < lo) continue;  // no integer point at this p
    }
    PeriodicSet ps;
    if (hi) {
      std::set<long> elems;
      for (long n = lo; n <= *hi; ++n) elems.insert(n);
      ps = PeriodicSet::from_elements(elems);
    } else {
      ps = PeriodicSet::from_lower_bound(lo);
    }
    for (const auto& loop : t.loops) {
      long llo = std::max(0L, eff_lower(loop.lo, p));
      std::optional<long> lhi;
      if (loop.hi) {
        lhi = eff_upper(*loop.hi, p);
        if (*lhi < llo) continue;  // empty loop: zero iterations only
      }
      ps = ps_sum(ps, interval_star(llo, lhi));
    }
    acc = ps_union(acc, ps);
  }
  return acc;
}

namespace {

nlohmann::json affine_json(const AffineBound& b) {
  return {{"slope", rat_to_string(b.slope)},
          {"offset", rat_to_string(b.offset)},
          {"strict", b.strict}};
}

}  // namespace

std::string lpsl_to_json(const LpSlSet& s) {
  nlohmann::json j;
  j["param"] = s.param;
  j["threshold"] = s.threshold;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : s.terms) {
    nlohmann::json jt;
    jt["base_lo"] = affine_json(t.base_lo);
    jt["base_hi"] = t.base_hi ? affine_json(*t.base_hi) : nlohmann::json();
    nlohmann::json loops = nlohmann::json::array();
    for (const auto& l : t.loops) {
      nlohmann::json jl;
      jl["lo"] = affine_json(l.lo);
      jl["hi"] = l.hi ? affine_json(*l.hi) : nlohmann::json();
      loops.push_back(std::move(jl));
    }
    jt["loops"] = std::move(loops);
    terms.push_back(std::move(jt));
  }
  j["terms"] = std::move(terms);
  nlohmann::json low;
  for (const auto& [p, ps] : s.low_valuations)
    low[std::to_string(p)] = nlohmann::json::parse(ps_to_json(ps));
  j["low_valuations"] = std::move(low);
  return j.dump();
}

// ---------------------------------------------------------------------------

namespace {

DivFormulaPtr df_wrap(DivFormula f) {
  return std::make_shared<const DivFormula>(std::move(f));
}

}  // namespace

DivFormulaPtr df_true() {
  static const DivFormulaPtr t = df_wrap(DivFormula{});
  return t;
}

DivFormulaPtr df_false() {
  static const DivFormulaPtr f = [] {
    DivFormula d;
    d.kind = DivFormula::Kind::False;
    return df_wrap(std::move(d));
  }();
  return f;
}

DivFormulaPtr df_atom(geo::Row row) {
  DivFormula d;
  d.kind = DivFormula::Kind::Atom;
  d.atom = std::move(row);
  return df_wrap(std::move(d));
}

DivFormulaPtr df_div(std::string y, std::string z) {
  DivFormula d;
  d.kind = DivFormula::Kind::Div;
  d.div_y = std::move(y);
  d.div_z = std::move(z);
  return df_wrap(std::move(d));
}

DivFormulaPtr df_and(std::vector<DivFormulaPtr> xs) {
  std::vector<DivFormulaPtr> flat;
  for (auto& x : xs) {
    if (!x || x->kind == DivFormula::Kind::True) continue;
    if (x->kind == DivFormula::Kind::False) return df_false();
    if (x->kind == DivFormula::Kind::And)
      flat.insert(flat.end(), x->children.begin(), x->children.end());
    else
      flat.push_back(std::move(x));
  }
  if (flat.empty()) return df_true();
  if (flat.size() == 1) return flat[0];
  DivFormula d;
  d.kind = DivFormula::Kind::And;
  d.children = std::move(flat);
  return df_wrap(std::move(d));
}

DivFormulaPtr df_or(std::vector<DivFormulaPtr> xs) {
  std::vector<DivFormulaPtr> flat;
  for (auto& x : xs) {
    if (!x || x->kind == DivFormula::Kind::False) continue;
    if (x->kind == DivFormula::Kind::True) return df_true();
    if (x->kind == DivFormula::Kind::Or)
      flat.insert(flat.end(), x->children.begin(), x->children.end());
    else
      flat.push_back(std::move(x));
  }
  if (flat.empty()) return df_false();
  if (flat.size() == 1) return flat[0];
  DivFormula d;
  d.kind = DivFormula::Kind::Or;
  d.children = std::move(flat);
  return df_wrap(std::move(d));
}

DivFormulaPtr df_exists(std::vector<std::string> bound, DivFormulaPtr body) {
  if (!body || body->kind == DivFormula::Kind::True ||
      body->kind == DivFormula::Kind::False)
    return body ? body : df_true();
  DivFormula d;
  d.kind = DivFormula::Kind::Exists;
  d.bound = std::move(bound);
  d.children.push_back(std::move(body));
  return df_wrap(std::move(d));
}

namespace {

geo::Row rename_var(geo::Row r, const std::string& from, const std::string& to) {
  auto it = r.coeffs.find(from);
  if (it != r.coeffs.end()) {
    Rational c = it->second;
    r.coeffs.erase(it);
    r.coeffs[to] += c;
  }
  return r;
}

geo::Row eq_row(std::map<std::string, Rational> coeffs, Rational k) {
  geo::Row r;
  r.coeffs = std::move(coeffs);
  r.constant = std::move(k);
  r.rel = geo::Rel::Eq;
  return r;
}

}  // namespace

DivSystem build_div_formula(const std::vector<pet::NormalTerm>& terms,
                            const std::vector<std::string>& params) {
  DivSystem sys;
  sys.free_vars.push_back(model::kDurationParam);
  for (const auto& p : params) sys.free_vars.push_back(p);

  std::vector<DivFormulaPtr> disjuncts;
  for (const auto& t : terms) {
    std::size_t m = t.loops.size();
    std::vector<std::string> xs;
    for (std::size_t j = 0; j <= m; ++j) xs.push_back("x" + std::to_string(j));

    std::vector<DivFormulaPtr> conj;
    {
      std::map<std::string, Rational> c;
      c[model::kDurationParam] = 1;
      for (const auto& x : xs) c[x] = -1;
      conj.push_back(df_atom(eq_row(std::move(c), 0)));  // d = sum of x_j
    }
    for (const auto& r : t.base.rows())
      conj.push_back(df_atom(rename_var(r, model::kDurationParam, xs[0])));

    for (std::size_t j = 1; j <= m; ++j) {
      const geo::Polyhedron& loop = t.loops[j - 1];
      std::vector<DivFormulaPtr> block;
      for (const auto& r : loop.rows()) {
        if (r.coeffs.count(model::kDurationParam)) {
          block.push_back(df_atom(rename_var(r, model::kDurationParam, "y1")));
          block.push_back(df_atom(rename_var(r, model::kDurationParam, "y2")));
          block.push_back(df_atom(rename_var(r, model::kDurationParam, "y3")));
        } else {
          block.push_back(df_atom(r));  // parameter rows, once
        }
      }
      block.push_back(df_or({df_atom(eq_row({{"z1", 1}}, 0)), df_div("y1", "z1")}));
      block.push_back(df_or({df_atom(eq_row({{"z2", 1}}, 0)), df_div("y2", "z2")}));
      block.push_back(df_atom(
          eq_row({{xs[j], 1}, {"z1", -1}, {"z2", -1}, {"y3", -1}}, 0)));
      DivFormulaPtr some = df_exists({"y1", "y2", "y3", "z1", "z2"},
                                     df_and(std::move(block)));
      conj.push_back(df_or({df_atom(eq_row({{xs[j], 1}}, 0)), std::move(some)}));
    }
    disjuncts.push_back(df_exists(std::move(xs), df_and(std::move(conj))));
  }
  sys.formula = df_or(std::move(disjuncts));
  return sys;
}

// ---------------------------------------------------------------------------

namespace {

bool eval_row(const geo::Row& r, const std::map<std::string, long>& env) {
  Rational sum = 0;
  for (const auto& [v, c] : r.coeffs) sum += c * env.at(v);
  switch (r.rel) {
    case geo::Rel::Lt: return sum < r.constant;
    case geo::Rel::Le: return sum <= r.constant;
    case geo::Rel::Eq: return sum == r.constant;
  }
  return false;
}

void collect_conjunct_atoms(const DivFormulaPtr& f, std::vector<const geo::Row*>& out) {
  if (f->kind == DivFormula::Kind::Atom) {
    out.push_back(&f->atom);
  } else if (f->kind == DivFormula::Kind::And) {
    for (const auto& c : f->children) collect_conjunct_atoms(c, out);
  }
}

struct Evaluator {
  long cap;

  bool eval(const DivFormulaPtr& f, std::map<std::string, long>& env) const {
    switch (f->kind) {
      case DivFormula::Kind::True:
        return true;
      case DivFormula::Kind::False:
        return false;
      case DivFormula::Kind::Atom:
        return eval_row(f->atom, env);
      case DivFormula::Kind::Div: {
        long y = env.at(f->div_y), z = env.at(f->div_z);
        return y == 0 ? z == 0 : z % y == 0;
      }
      case DivFormula::Kind::And:
        for (const auto& c : f->children)
          if (!eval(c, env)) return false;
        return true;
      case DivFormula::Kind::Or:
        for (const auto& c : f->children)
          if (eval(c, env)) return true;
        return false;
      case DivFormula::Kind::Exists: {
        std::vector<const geo::Row*> atoms;
        collect_conjunct_atoms(f->children[0], atoms);
        return enumerate(f, 0, atoms, env);
      }
    }
    return false;
  }

  // Assign bound variables one by one, narrowing each to the interval the
  // sibling atoms allow (unassigned variables contribute [0, cap]).
  bool enumerate(const DivFormulaPtr& f, std::size_t i,
                 const std::vector<const geo::Row*>& atoms,
                 std::map<std::string, long>& env) const {
    if (i == f->bound.size()) return eval(f->children[0], env);
    const std::string& var = f->bound[i];

    long lo = 0, hi = cap;
    for (const geo::Row* r : atoms) {
      auto it = r->coeffs.find(var);
      if (it == r->coeffs.end()) continue;
      Rational c = it->second;
      Rational assigned = 0;
      Rational smin = 0, smax = 0;
      for (const auto& [v, cv] : r->coeffs) {
        if (v == var) continue;
        auto ev = env.find(v);
        if (ev != env.end()) {
          assigned += cv * ev->second;
        } else {
          // an unassigned sibling: range [0, cap]
          if (cv > 0)
            smax += cv * cap;
          else
            smin += cv * cap;
        }
      }
      // c*var ∈ [k - assigned - smax, k - assigned - smin] for Eq;
      // upper only for Le/Lt.
      Rational upper = r->constant - assigned - smin;
      if (r->rel == geo::Rel::Eq) {
        Rational lower = r->constant - assigned - smax;
        if (c > 0) {
          lo = std::max(lo, ceil_long(lower / c));
          hi = std::min(hi, floor_long(upper / c));
        } else {
          lo = std::max(lo, ceil_long(upper / c));
          hi = std::min(hi, floor_long(lower / c));
        }
      } else {
        bool strict = (r->rel == geo::Rel::Lt);
        if (c > 0) {
          long b = strict ? ceil_long(upper / c) - 1 : floor_long(upper / c);
          hi = std::min(hi, b);
        } else {
          long b = strict ? floor_long(upper / c) + 1 : ceil_long(upper / c);
          lo = std::max(lo, b);
        }
      }
    }

    for (long val = lo; val <= hi; ++val) {
      env[var] = val;
      bool viable = true;
      for (const geo::Row* r : atoms) {
        if (!r->coeffs.count(var)) continue;
        bool all_assigned = true;
        for (const auto& [v, cv] : r->coeffs)
          if (!env.count(v)) { all_assigned = false; break; }
        if (all_assigned && !eval_row(*r, env)) { viable = false; break; }
      }
      if (viable && enumerate(f, i + 1, atoms, env)) {
        env.erase(var);
        return true;
      }
    }
    env.erase(var);
    return false;
  }
};

void max_abs_constant(const DivFormulaPtr& f, Rational& mx) {
  if (f->kind == DivFormula::Kind::Atom) {
    Rational a = abs(f->atom.constant);
    if (a > mx) mx = a;
  }
  for (const auto& c : f->children) max_abs_constant(c, mx);
}

}  // namespace

bool eval_div_formula(const DivSystem& sys, const std::map<std::string, long>& assignment,
                      long witness_bound) {
  std::map<std::string, long> env;
  long max_env = 0;
  for (const auto& v : sys.free_vars) {
    auto it = assignment.find(v);
    if (it == assignment.end())
      throw std::invalid_argument("assignment misses variable " + v);
    if (it->second < 0) return false;  // sets of naturals
    env[v] = it->second;
    max_env = std::max(max_env, it->second);
  }
  Rational mc = 0;
  max_abs_constant(sys.formula, mc);
  Evaluator ev{witness_bound + max_env + ceil_long(mc)};
  return ev.eval(sys.formula, env);
}

// ---------------------------------------------------------------------------

namespace {

std::string df_to_string(const DivFormulaPtr& f) {
  switch (f->kind) {
    case DivFormula::Kind::True:
      return "true";
    case DivFormula::Kind::False:
      return "false";
    case DivFormula::Kind::Atom:
      return geo::pretty_row(f->atom);
    case DivFormula::Kind::Div:
      return f->div_y + " | " + f->div_z;
    case DivFormula::Kind::And:
    case DivFormula::Kind::Or: {
      std::string sep = f->kind == DivFormula::Kind::And ? " && " : " || ";
      std::string out = "(";
      for (std::size_t i = 0; i < f->children.size(); ++i) {
        if (i) out += sep;
        out += df_to_string(f->children[i]);
      }
      return out + ")";
    }
    case DivFormula::Kind::Exists: {
      std::string out = "exists ";
      for (std::size_t i = 0; i < f->bound.size(); ++i) {
        if (i) out += ",";
        out += f->bound[i];
      }
      return out + ". " + df_to_string(f->children[0]);
    }
  }
  return "";
}

std::string smt_int(const Rational& r) {
  long v = rat_to_long(r);
  if (v < 0) return "(- " + std::to_string(-v) + ")";
  return std::to_string(v);
}

std::string smt_linear(const geo::Row& r) {
  std::vector<std::string> parts;
  for (const auto& [v, c] : r.coeffs) {
    if (c == 1)
      parts.push_back(v);
    else if (c == -1)
      parts.push_back("(- " + v + ")");
    else
      parts.push_back("(* " + smt_int(c) + " " + v + ")");
  }
  if (parts.empty()) return "0";
  if (parts.size() == 1) return parts[0];
  std::string out = "(+";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

std::string df_to_smt(const DivFormulaPtr& f) {
  switch (f->kind) {
    case DivFormula::Kind::True:
      return "true";
    case DivFormula::Kind::False:
      return "false";
    case DivFormula::Kind::Atom: {
      const char* rel = f->atom.rel == geo::Rel::Lt   ? "<"
                        : f->atom.rel == geo::Rel::Le ? "<="
                                                      : "=";
      return std::string("(") + rel + " " + smt_linear(f->atom) + " " +
             smt_int(f->atom.constant) + ")";
    }
    case DivFormula::Kind::Div:
      return "(exists ((k Int)) (and (>= k 0) (= " + f->div_z + " (* k " +
             f->div_y + "))))";
    case DivFormula::Kind::And:
    case DivFormula::Kind::Or: {
      std::string out = f->kind == DivFormula::Kind::And ? "(and" : "(or";
      for (const auto& c : f->children) out += " " + df_to_smt(c);
      return out + ")";
    }
    case DivFormula::Kind::Exists: {
      std::string out = "(exists (";
      for (std::size_t i = 0; i < f->bound.size(); ++i) {
        if (i) out += " ";
        out += "(" + f->bound[i] + " Int)";
      }
      out += ") (and";
      for (const auto& v : f->bound) out += " (>= " + v + " 0)";
      out += " " + df_to_smt(f->children[0]) + "))";
      return out;
    }
  }
  return "true";
}

}  // namespace

std::string div_formula_to_string(const DivSystem& sys) {
  std::string out = "free ";
  for (std::size_t i = 0; i < sys.free_vars.size(); ++i) {
    if (i) out += ",";
    out += sys.free_vars[i];
  }
  return out + ". " + df_to_string(sys.formula);
}

std::string emit_smt(const DivSystem& sys, const std::string& comment) {
  std::ostringstream os;
  if (!comment.empty()) os << "; " << comment << "\n";
  os << "(set-logic ALL)\n";
  for (const auto& v : sys.free_vars) {
    os << "(declare-const " << v << " Int)\n";
    os << "(assert (>= " << v << " 0))\n";
  }
  os << "(assert " << df_to_smt(sys.formula) << ")\n";
  os << "(check-sat)\n";
  os << "(get-model)\n";
  return os.str();
}

std::string emit_smt_intersection(const DivSystem& a, const DivSystem& b,
                                  const std::string& comment) {
  if (a.free_vars != b.free_vars)
    throw std::invalid_argument("intersection needs matching free variables");
  std::ostringstream os;
  if (!comment.empty()) os << "; " << comment << "\n";
  os << "(set-logic ALL)\n";
  for (const auto& v : a.free_vars) {
    os << "(declare-const " << v << " Int)\n";
    os << "(assert (>= " << v << " 0))\n";
  }
  os << "(assert " << df_to_smt(a.formula) << ")\n";
  os << "(assert " << df_to_smt(b.formula) << ")\n";
  os << "(check-sat)\n";
  os << "(get-model)\n";
  return os.str();
}

}  // namespace opaq::arith
