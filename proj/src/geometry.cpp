#include <opaq/geometry.hpp>

#include <json.hpp>

#include <algorithm>
#include <cassert>
#include <optional>
#include <stdexcept>

namespace opaq::geo {

namespace {

using Json = nlohmann::json;

bool coeffs_all_zero(const Row& r) { return r.coeffs.empty(); }

/// 0 REL const, for rows whose coefficients are all zero.
bool const_row_holds(const Row& r) {
  switch (r.rel) {
    case Rel::Lt: return r.constant > 0;
    case Rel::Le: return r.constant >= 0;
    case Rel::Eq: return r.constant == 0;
  }
  return false;
}

void drop_zero_coeffs(Row& r) {
  for (auto it = r.coeffs.begin(); it != r.coeffs.end();) {
    if (it->second == 0)
      it = r.coeffs.erase(it);
    else
      ++it;
  }
}

/// Scales the row to primitive integer form (lcm of denominators, then gcd of
/// numerators). Equalities additionally get a positive leading coefficient.
/// Only positive scaling is applied to inequalities, preserving direction.
Row normalize_row(Row r) {
  drop_zero_coeffs(r);
  if (r.coeffs.empty()) return r;
  Integer den_lcm = r.constant.get_den();
  for (const auto& [v, c] : r.coeffs) {
    Integer l;
    mpz_lcm(l.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
    den_lcm = l;
  }
  Rational scale(den_lcm);
  Integer num_gcd = 0;
  auto fold_gcd = [&](const Rational& x) {
    Rational scaled = x * scale;
    assert(rat_is_integer(scaled));
    Integer g;
    mpz_gcd(g.get_mpz_t(), num_gcd.get_mpz_t(), scaled.get_num().get_mpz_t());
    num_gcd = g;
  };
  for (const auto& [v, c] : r.coeffs) fold_gcd(c);
  fold_gcd(r.constant);
  if (num_gcd != 0) scale /= Rational(num_gcd);
  if (r.rel == Rel::Eq && r.coeffs.begin()->second * scale < 0) scale = -scale;
  for (auto& [v, c] : r.coeffs) c *= scale;
  r.constant *= scale;
  return r;
}

Row scaled_row(const Row& r, const Rational& k) {
  Row out = r;
  for (auto& [v, c] : out.coeffs) c *= k;
  out.constant *= k;
  return out;
}

Row add_rows(const Row& a, const Row& b, Rel rel) {
  Row out;
  out.coeffs = a.coeffs;
  for (const auto& [v, c] : b.coeffs) out.coeffs[v] += c;
  out.constant = a.constant + b.constant;
  out.rel = rel;
  drop_zero_coeffs(out);
  return out;
}

/// The complement of a row as a disjunction of rows (an equality complements
/// into two strict half-spaces).
std::vector<Row> negate_row(const Row& r) {
  Row flipped;
  for (const auto& [v, c] : r.coeffs) flipped.coeffs[v] = -c;
  flipped.constant = -r.constant;
  switch (r.rel) {
    case Rel::Le:  // !(a <= c)  <=>  -a < -c
      flipped.rel = Rel::Lt;
      return {flipped};
    case Rel::Lt:  // !(a < c)  <=>  -a <= -c
      flipped.rel = Rel::Le;
      return {flipped};
    case Rel::Eq: {  // !(a = c)  <=>  a < c  or  -a < -c
      Row below = r;
      below.rel = Rel::Lt;
      flipped.rel = Rel::Lt;
      return {below, flipped};
    }
  }
  return {};
}

/// Eliminates one variable exactly. If an equality mentions the variable it is
/// used as a substitution; otherwise lower and upper bounds are combined
/// pairwise, a strict partner making the combination strict. Returns nullopt
/// when a trivially false row appears (the system is unsatisfiable).
std::optional<std::vector<Row>> fm_eliminate(const std::vector<Row>& rows,
                                             const std::string& var) {
  std::vector<Row> with;
  std::vector<Row> without;
  for (const auto& r : rows) {
    auto it = r.coeffs.find(var);
    if (it == r.coeffs.end() || it->second == 0)
      without.push_back(r);
    else
      with.push_back(r);
  }
  const Row* eq_row = nullptr;
  for (const auto& r : with)
    if (r.rel == Rel::Eq) {
      eq_row = &r;
      break;
    }

  std::vector<Row> fresh;
  if (eq_row != nullptr) {
    const Rational a = eq_row->coeffs.at(var);
    for (const auto& r : with) {
      if (&r == eq_row) continue;
      const Rational b = r.coeffs.at(var);
      // r - (b/a) * eq eliminates var; relation of r is preserved (exact
      // substitution through an equality).
      Row combined = add_rows(r, scaled_row(*eq_row, -b / a), r.rel);
      fresh.push_back(std::move(combined));
    }
  } else {
    std::vector<const Row*> uppers;
    std::vector<const Row*> lowers;
    for (const auto& r : with) {
      (r.coeffs.at(var) > 0 ? uppers : lowers).push_back(&r);
    }
    for (const Row* lo : lowers) {
      for (const Row* up : uppers) {
        const Rational a = -lo->coeffs.at(var);  // > 0
        const Rational b = up->coeffs.at(var);   // > 0
        Rel rel = (lo->rel == Rel::Lt || up->rel == Rel::Lt) ? Rel::Lt : Rel::Le;
        Row combined =
            add_rows(scaled_row(*lo, 1 / a), scaled_row(*up, 1 / b), rel);
        fresh.push_back(std::move(combined));
      }
    }
  }

  std::vector<Row> out = std::move(without);
  for (auto& r : fresh) {
    Row n = normalize_row(std::move(r));
    if (coeffs_all_zero(n)) {
      if (!const_row_holds(n)) return std::nullopt;
      continue;
    }
    out.push_back(std::move(n));
  }
  std::sort(out.begin(), out.end(), row_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool rows_satisfiable(std::vector<Row> rows, const std::vector<std::string>& vars) {
  for (const auto& r : rows)
    if (coeffs_all_zero(r) && !const_row_holds(r)) return false;
  for (const auto& v : vars) {
    auto next = fm_eliminate(rows, v);
    if (!next) return false;
    rows = std::move(*next);
  }
  for (const auto& r : rows)
    if (coeffs_all_zero(r) && !const_row_holds(r)) return false;
  return true;
}

/// True when rows imply r (rows AND NOT r is unsatisfiable).
bool rows_imply(const std::vector<Row>& rows, const Row& r,
                const std::vector<std::string>& vars) {
  for (const auto& neg : negate_row(r)) {
    std::vector<Row> test = rows;
    test.push_back(neg);
    if (rows_satisfiable(std::move(test), vars)) return false;
  }
  return true;
}

Row unsat_marker() {
  Row r;
  r.constant = rat(-1);
  r.rel = Rel::Le;  // 0 <= -1
  return r;
}

Row nonneg_row(const std::string& v) {
  Row r;
  r.coeffs[v] = rat(-1);
  r.constant = 0;
  r.rel = Rel::Le;  // -v <= 0
  return r;
}

Rational eval_lhs(const Row& r, const std::map<std::string, Rational>& point) {
  Rational sum = 0;
  for (const auto& [v, c] : r.coeffs) {
    auto it = point.find(v);
    if (it == point.end()) throw std::invalid_argument("point misses variable " + v);
    sum += c * it->second;
  }
  return sum;
}

bool row_holds_at(const Row& r, const std::map<std::string, Rational>& point) {
  // cmp cross-multiplies, so callers may pass rationals in any representation;
  // mpq equality would demand canonical form.
  int c = cmp(eval_lhs(r, point), r.constant);
  switch (r.rel) {
    case Rel::Lt: return c < 0;
    case Rel::Le: return c <= 0;
    case Rel::Eq: return c == 0;
  }
  return false;
}

}  // namespace

std::string rel_to_string(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "=";
  }
  return "?";
}

bool row_less(const Row& a, const Row& b) {
  // Lexicographic on (variable, coefficient) pairs, then constant, then rel.
  auto ai = a.coeffs.begin(), ae = a.coeffs.end();
  auto bi = b.coeffs.begin(), be = b.coeffs.end();
  for (; ai != ae && bi != be; ++ai, ++bi) {
    if (ai->first != bi->first) return ai->first < bi->first;
    if (ai->second != bi->second) return ai->second < bi->second;
  }
  if (ai != ae || bi != be) return bi != be;
  if (a.constant != b.constant) return a.constant < b.constant;
  return static_cast<int>(a.rel) < static_cast<int>(b.rel);
}

Polyhedron Polyhedron::universe(std::vector<std::string> vars) {
  return from_rows(std::move(vars), {});
}

Polyhedron Polyhedron::from_rows(std::vector<std::string> vars, std::vector<Row> rows) {
  Polyhedron p;
  p.vars_ = std::move(vars);
  for (const auto& v : p.vars_) rows.push_back(nonneg_row(v));
  p.rows_ = std::move(rows);
  p.canonicalize();
  return p;
}

bool Polyhedron::has_var(const std::string& v) const {
  return std::find(vars_.begin(), vars_.end(), v) != vars_.end();
}

void Polyhedron::canonicalize() {
  // Normalize, drop trivia, detect constant falsehood.
  std::vector<Row> rows;
  rows.reserve(rows_.size());
  for (auto& r : rows_) {
    for (const auto& [v, c] : r.coeffs) {
      if (c != 0 && !has_var(v))
        throw std::invalid_argument("row mentions unknown variable " + v);
    }
    Row n = normalize_row(std::move(r));
    if (coeffs_all_zero(n)) {
      if (!const_row_holds(n)) {
        rows_ = {unsat_marker()};
        satisfiable_ = false;
        return;
      }
      continue;
    }
    rows.push_back(std::move(n));
  }
  std::sort(rows.begin(), rows.end(), row_less);
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

  // Merge opposing non-strict pairs into equalities. A primitive row scaled
  // by -1 is still primitive, so a plain value match finds the partner.
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < rows.size() && !merged; ++i) {
      if (rows[i].rel != Rel::Le) continue;
      Row opposite = scaled_row(rows[i], rat(-1));
      opposite.rel = Rel::Le;
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (j == i || rows[j].rel != Rel::Le) continue;
        if (rows[j].coeffs == opposite.coeffs &&
            rows[j].constant == opposite.constant) {
          Row eq = rows[i];
          eq.rel = Rel::Eq;
          eq = normalize_row(std::move(eq));
          rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
          rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
          rows.push_back(std::move(eq));
          merged = true;
          break;
        }
      }
    }
  }
  std::sort(rows.begin(), rows.end(), row_less);

  if (!rows_satisfiable(rows, vars_)) {
    rows_ = {unsat_marker()};
    satisfiable_ = false;
    return;
  }
  satisfiable_ = true;

  // Remove redundant rows until stable. Deterministic scan order keeps the
  // canonical form unique for a given input set.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<Row> rest;
      rest.reserve(rows.size() - 1);
      for (std::size_t j = 0; j < rows.size(); ++j)
        if (j != i) rest.push_back(rows[j]);
      if (rows_imply(rest, rows[i], vars_)) {
        rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
  std::sort(rows.begin(), rows.end(), row_less);
  rows_ = std::move(rows);
}

bool Polyhedron::contains_point(const std::map<std::string, Rational>& point) const {
  if (!satisfiable_) return false;
  for (const auto& r : rows_)
    if (!row_holds_at(r, point)) return false;
  return true;
}

bool Polyhedron::includes(const Polyhedron& other) const {
  if (vars_ != other.vars_)
    throw std::invalid_argument("includes: variable spaces differ");
  if (!other.satisfiable_) return true;
  if (!satisfiable_) return false;
  for (const auto& r : rows_)
    if (!rows_imply(other.rows_, r, vars_)) return false;
  return true;
}

Polyhedron Polyhedron::project(const std::vector<std::string>& keep) const {
  std::vector<std::string> kept;
  for (const auto& v : vars_)
    if (std::find(keep.begin(), keep.end(), v) != keep.end()) kept.push_back(v);
  if (!satisfiable_) {
    Polyhedron p;
    p.vars_ = kept;
    p.rows_ = {unsat_marker()};
    p.satisfiable_ = false;
    return p;
  }
  std::vector<Row> rows = rows_;
  for (const auto& v : vars_) {
    if (std::find(kept.begin(), kept.end(), v) != kept.end()) continue;
    auto next = fm_eliminate(rows, v);
    if (!next) {
      Polyhedron p;
      p.vars_ = kept;
      p.rows_ = {unsat_marker()};
      p.satisfiable_ = false;
      return p;
    }
    rows = std::move(*next);
  }
  return from_rows(kept, std::move(rows));
}

Polyhedron Polyhedron::time_elapse(const std::vector<std::string>& clocks) const {
  if (!satisfiable_) return *this;
  const std::string delay = "__delay";
  if (has_var(delay)) throw std::invalid_argument("reserved variable name in use");
  // mu' = mu + delay: substitute clock := clock' - delay in every row.
  std::vector<Row> rows;
  rows.reserve(rows_.size() + 1);
  for (const auto& r : rows_) {
    Row n = r;
    Rational dcoeff = 0;
    for (const auto& c : clocks) {
      auto it = n.coeffs.find(c);
      if (it != n.coeffs.end()) dcoeff -= it->second;
    }
    if (dcoeff != 0) n.coeffs[delay] = dcoeff;
    rows.push_back(std::move(n));
  }
  rows.push_back(nonneg_row(delay));
  auto next = fm_eliminate(rows, delay);
  if (!next) {
    Polyhedron p;
    p.vars_ = vars_;
    p.rows_ = {unsat_marker()};
    p.satisfiable_ = false;
    return p;
  }
  return from_rows(vars_, std::move(*next));
}

Polyhedron Polyhedron::reset_clocks(const std::vector<std::string>& clocks) const {
  if (!satisfiable_) return *this;
  std::vector<Row> rows = rows_;
  for (const auto& c : clocks) {
    if (!has_var(c)) throw std::invalid_argument("reset of unknown variable " + c);
    auto next = fm_eliminate(rows, c);
    if (!next) {
      Polyhedron p;
      p.vars_ = vars_;
      p.rows_ = {unsat_marker()};
      p.satisfiable_ = false;
      return p;
    }
    rows = std::move(*next);
  }
  for (const auto& c : clocks) {
    Row zero;
    zero.coeffs[c] = rat(1);
    zero.constant = 0;
    zero.rel = Rel::Eq;
    rows.push_back(std::move(zero));
  }
  return from_rows(vars_, std::move(rows));
}

Polyhedron Polyhedron::rename_vars(
    const std::map<std::string, std::string>& renaming) const {
  std::vector<std::string> vars;
  vars.reserve(vars_.size());
  for (const auto& v : vars_) {
    auto it = renaming.find(v);
    vars.push_back(it == renaming.end() ? v : it->second);
  }
  {
    auto sorted = vars;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("rename_vars: mapping is not injective");
  }
  std::vector<Row> rows;
  rows.reserve(rows_.size());
  for (const auto& r : rows_) {
    Row n;
    n.constant = r.constant;
    n.rel = r.rel;
    for (const auto& [v, c] : r.coeffs) {
      auto it = renaming.find(v);
      n.coeffs[it == renaming.end() ? v : it->second] = c;
    }
    rows.push_back(std::move(n));
  }
  if (!satisfiable_) {
    Polyhedron p;
    p.vars_ = std::move(vars);
    p.rows_ = {unsat_marker()};
    p.satisfiable_ = false;
    return p;
  }
  return from_rows(std::move(vars), std::move(rows));
}

Polyhedron Polyhedron::lift_to(std::vector<std::string> new_vars) const {
  for (const auto& v : vars_)
    if (std::find(new_vars.begin(), new_vars.end(), v) == new_vars.end())
      throw std::invalid_argument("lift_to: dropped variable " + v);
  if (!satisfiable_) {
    Polyhedron p;
    p.vars_ = std::move(new_vars);
    p.rows_ = {unsat_marker()};
    p.satisfiable_ = false;
    return p;
  }
  return from_rows(std::move(new_vars), rows_);
}

Polyhedron intersect(const Polyhedron& a, const Polyhedron& b) {
  if (a.vars() != b.vars())
    throw std::invalid_argument("intersect: variable spaces differ");
  if (!a.is_satisfiable()) return a;
  if (!b.is_satisfiable()) return b;
  std::vector<Row> rows = a.rows();
  rows.insert(rows.end(), b.rows().begin(), b.rows().end());
  return Polyhedron::from_rows(a.vars(), std::move(rows));
}

// --- PolySet ---------------------------------------------------------------

namespace {

bool poly_order_less(const Polyhedron& a, const Polyhedron& b) {
  const auto& ra = a.rows();
  const auto& rb = b.rows();
  for (std::size_t i = 0; i < ra.size() && i < rb.size(); ++i) {
    if (!(ra[i] == rb[i])) return row_less(ra[i], rb[i]);
  }
  return ra.size() < rb.size();
}

}  // namespace

PolySet PolySet::from_disjuncts(std::vector<std::string> vars,
                                std::vector<Polyhedron> disjuncts) {
  PolySet ps(std::move(vars));
  std::vector<Polyhedron> kept;
  for (auto& d : disjuncts) {
    if (!d.is_satisfiable()) continue;
    if (d.vars() != ps.vars_)
      throw std::invalid_argument("from_disjuncts: variable spaces differ");
    kept.push_back(std::move(d));
  }
  std::sort(kept.begin(), kept.end(), poly_order_less);
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  // Drop disjuncts included in another; on mutual inclusion keep the earlier.
  std::vector<bool> dropped(kept.size(), false);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = 0; j < kept.size(); ++j) {
      if (i == j || dropped[j]) continue;
      if (kept[j].includes(kept[i]) && (!kept[i].includes(kept[j]) || j < i)) {
        dropped[i] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (!dropped[i]) ps.disjuncts_.push_back(std::move(kept[i]));
  return ps;
}

bool PolySet::contains_point(const std::map<std::string, Rational>& point) const {
  for (const auto& d : disjuncts_)
    if (d.contains_point(point)) return true;
  return false;
}

PolySet PolySet::project(const std::vector<std::string>& keep) const {
  std::vector<Polyhedron> out;
  out.reserve(disjuncts_.size());
  for (const auto& d : disjuncts_) out.push_back(d.project(keep));
  std::vector<std::string> kept;
  for (const auto& v : vars_)
    if (std::find(keep.begin(), keep.end(), v) != keep.end()) kept.push_back(v);
  return from_disjuncts(std::move(kept), std::move(out));
}

PolySet PolySet::rename_vars(const std::map<std::string, std::string>& renaming) const {
  std::vector<Polyhedron> out;
  out.reserve(disjuncts_.size());
  for (const auto& d : disjuncts_) out.push_back(d.rename_vars(renaming));
  std::vector<std::string> vars;
  for (const auto& v : vars_) {
    auto it = renaming.find(v);
    vars.push_back(it == renaming.end() ? v : it->second);
  }
  return from_disjuncts(std::move(vars), std::move(out));
}

PolySet PolySet::lift_to(std::vector<std::string> new_vars) const {
  std::vector<Polyhedron> out;
  out.reserve(disjuncts_.size());
  for (const auto& d : disjuncts_) out.push_back(d.lift_to(new_vars));
  return from_disjuncts(std::move(new_vars), std::move(out));
}

PolySet polyset_union(const PolySet& a, const PolySet& b) {
  if (a.vars() != b.vars())
    throw std::invalid_argument("polyset_union: variable spaces differ");
  std::vector<Polyhedron> all = a.disjuncts();
  all.insert(all.end(), b.disjuncts().begin(), b.disjuncts().end());
  return PolySet::from_disjuncts(a.vars(), std::move(all));
}

PolySet polyset_intersect(const PolySet& a, const PolySet& b) {
  if (a.vars() != b.vars())
    throw std::invalid_argument("polyset_intersect: variable spaces differ");
  std::vector<Polyhedron> out;
  for (const auto& da : a.disjuncts())
    for (const auto& db : b.disjuncts()) out.push_back(intersect(da, db));
  return PolySet::from_disjuncts(a.vars(), std::move(out));
}

namespace {

/// P minus one polyhedron Q, as pairwise disjoint satisfiable pieces:
/// walking Q's rows in canonical order, the piece at step i satisfies rows
/// 0..i-1 and violates row i.
std::vector<Polyhedron> subtract_poly(const Polyhedron& p, const Polyhedron& q) {
  if (!p.is_satisfiable()) return {};
  if (!q.is_satisfiable()) return {p};
  std::vector<Polyhedron> pieces;
  std::vector<Row> acc = p.rows();
  for (const auto& qrow : q.rows()) {
    for (const auto& neg : negate_row(qrow)) {
      std::vector<Row> piece_rows = acc;
      piece_rows.push_back(neg);
      Polyhedron piece = Polyhedron::from_rows(p.vars(), std::move(piece_rows));
      if (piece.is_satisfiable()) pieces.push_back(std::move(piece));
    }
    acc.push_back(qrow);
  }
  return pieces;
}

}  // namespace

PolySet polyset_difference(const PolySet& a, const PolySet& b) {
  if (a.vars() != b.vars())
    throw std::invalid_argument("polyset_difference: variable spaces differ");
  std::vector<Polyhedron> current = a.disjuncts();
  for (const auto& q : b.disjuncts()) {
    std::vector<Polyhedron> next;
    for (const auto& p : current) {
      auto pieces = subtract_poly(p, q);
      next.insert(next.end(), pieces.begin(), pieces.end());
    }
    current = std::move(next);
    if (current.empty()) break;
  }
  return PolySet::from_disjuncts(a.vars(), std::move(current));
}

bool polyset_equal(const PolySet& a, const PolySet& b) {
  return polyset_difference(a, b).is_empty() && polyset_difference(b, a).is_empty();
}

// --- serialization ----------------------------------------------------------

namespace {

Json row_to_json_obj(const Row& r) {
  Json coeffs = Json::object();
  for (const auto& [v, c] : r.coeffs) coeffs[v] = rat_to_string(c);
  return Json{{"coeffs", std::move(coeffs)},
              {"const", rat_to_string(r.constant)},
              {"rel", rel_to_string(r.rel)}};
}

Json poly_to_json_obj(const Polyhedron& p) {
  Json rows = Json::array();
  for (const auto& r : p.rows()) rows.push_back(row_to_json_obj(r));
  return Json{{"rows", std::move(rows)}};
}

}  // namespace

std::string polyhedron_to_json(const Polyhedron& p) {
  return poly_to_json_obj(p).dump();
}

std::string polyset_to_json(const PolySet& ps) {
  Json arr = Json::array();
  for (const auto& d : ps.disjuncts()) arr.push_back(poly_to_json_obj(d));
  return arr.dump();
}

PolySet polyset_from_json(const std::string& text, std::vector<std::string> vars) {
  Json parsed = Json::parse(text);
  if (!parsed.is_array()) throw std::invalid_argument("polyset JSON must be an array");
  std::vector<Polyhedron> disjuncts;
  for (const auto& dj : parsed) {
    std::vector<Row> rows;
    for (const auto& rj : dj.at("rows")) {
      Row r;
      for (const auto& [v, cj] : rj.at("coeffs").items()) {
        auto c = rat_from_string(cj.get<std::string>());
        if (!c) throw std::invalid_argument("bad rational in polyset JSON");
        r.coeffs[v] = *c;
      }
      auto k = rat_from_string(rj.at("const").get<std::string>());
      if (!k) throw std::invalid_argument("bad rational in polyset JSON");
      r.constant = *k;
      std::string rel = rj.at("rel").get<std::string>();
      if (rel == "<")
        r.rel = Rel::Lt;
      else if (rel == "<=")
        r.rel = Rel::Le;
      else if (rel == "=")
        r.rel = Rel::Eq;
      else
        throw std::invalid_argument("bad relation in polyset JSON: " + rel);
      rows.push_back(std::move(r));
    }
    disjuncts.push_back(Polyhedron::from_rows(vars, std::move(rows)));
  }
  return PolySet::from_disjuncts(std::move(vars), std::move(disjuncts));
}

// --- pretty rendering --------------------------------------------------------

std::string pretty_row(const Row& row) {
  auto term = [](const Rational& k, const std::string& v) {
    return k == 1 ? v : rat_to_string(k) + "*" + v;
  };
  std::string left;
  std::string right;
  auto append = [](std::string& side, const std::string& t) {
    if (!side.empty()) side += " + ";
    side += t;
  };
  for (const auto& [v, c] : row.coeffs) {
    if (c > 0)
      append(left, term(c, v));
    else
      append(right, term(-c, v));
  }
  if (row.constant > 0)
    append(right, rat_to_string(row.constant));
  else if (row.constant < 0)
    append(left, rat_to_string(-row.constant));
  if (left.empty()) left = "0";
  if (right.empty()) right = "0";
  return left + " " + rel_to_string(row.rel) + " " + right;
}

std::string pretty_polyhedron(const Polyhedron& p) {
  if (!p.is_satisfiable()) return "false";
  if (p.rows().empty()) return "true";
  std::string out;
  for (const auto& r : p.rows()) {
    if (!out.empty()) out += " && ";
    out += pretty_row(r);
  }
  return out;
}

std::string pretty_polyset(const PolySet& ps) {
  if (ps.is_empty()) return "false";
  if (ps.disjuncts().size() == 1) return pretty_polyhedron(ps.disjuncts()[0]);
  std::string out;
  for (const auto& d : ps.disjuncts()) {
    if (!out.empty()) out += " || ";
    out += "(" + pretty_polyhedron(d) + ")";
  }
  return out;
}

}  // namespace opaq::geo
