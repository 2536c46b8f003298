#pragma once

#include <opaq/rational.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opaq::geo {

/// Relation of a constraint row. >= and > are normalized away at construction
/// by negating the row, so only these three survive.
enum class Rel { Lt, Le, Eq };

std::string rel_to_string(Rel r);

/// One linear constraint: sum(coeffs[v] * v) REL constant.
/// Only nonzero coefficients are stored.
struct Row {
  std::map<std::string, Rational> coeffs;
  Rational constant{0};
  Rel rel{Rel::Le};

  bool operator==(const Row&) const = default;
};

/// Deterministic ordering used for canonical row lists and JSON output:
/// lexicographic by (variable, coefficient) pairs, then constant, then relation.
bool row_less(const Row& a, const Row& b);

/// A convex polyhedron over named non-negative variables, stored in H-form
/// (a conjunction of Row constraints). Non-negativity of every variable is an
/// implicit part of the theory and is materialized as explicit rows at
/// construction so that all operations see it.
///
/// Construction canonicalizes: rows are scaled to primitive integer form,
/// trivial rows dropped, duplicates removed, opposing non-strict pairs merged
/// into equalities, redundant rows eliminated (a row is redundant when the
/// remaining rows imply it), and satisfiability is decided exactly by
/// Fourier-Motzkin elimination and cached.
class Polyhedron {
 public:
  Polyhedron() = default;

  /// Polyhedron with no constraints beyond non-negativity.
  static Polyhedron universe(std::vector<std::string> vars);

  /// Polyhedron from explicit rows; non-negativity rows are added.
  static Polyhedron from_rows(std::vector<std::string> vars, std::vector<Row> rows);

  const std::vector<std::string>& vars() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }
  bool is_satisfiable() const { return satisfiable_; }
  bool has_var(const std::string& v) const;

  bool contains_point(const std::map<std::string, Rational>& point) const;

  /// True when other is a subset of *this (same variable space required).
  bool includes(const Polyhedron& other) const;

  /// Fourier-Motzkin elimination of all variables not in keep. Strictness is
  /// propagated: combining a strict with a non-strict bound yields a strict
  /// bound. The result's variable order follows this polyhedron's order.
  Polyhedron project(const std::vector<std::string>& keep) const;

  /// Future of the polyhedron when all clocks advance uniformly: the given
  /// variables are shifted by a fresh non-negative amount which is then
  /// eliminated. Remaining variables are unchanged.
  Polyhedron time_elapse(const std::vector<std::string>& clocks) const;

  /// Existentially quantifies the given variables, then fixes them to zero.
  Polyhedron reset_clocks(const std::vector<std::string>& clocks) const;

  /// Renames variables according to the (injective) mapping; unmapped names
  /// are kept.
  Polyhedron rename_vars(const std::map<std::string, std::string>& renaming) const;

  /// Re-hosts the polyhedron in a larger variable space. New variables are
  /// unconstrained apart from implicit non-negativity. Every current variable
  /// must appear in new_vars.
  Polyhedron lift_to(std::vector<std::string> new_vars) const;

  bool operator==(const Polyhedron& o) const {
    return vars_ == o.vars_ && rows_ == o.rows_;
  }

 private:
  std::vector<std::string> vars_;
  std::vector<Row> rows_;
  bool satisfiable_ = true;

  void canonicalize();
  friend Polyhedron intersect(const Polyhedron&, const Polyhedron&);
};

Polyhedron intersect(const Polyhedron& a, const Polyhedron& b);

/// A finite union of satisfiable polyhedra over a common variable space.
/// Canonical form: no empty disjunct, no disjunct included in another,
/// deterministic disjunct order.
class PolySet {
 public:
  PolySet() = default;
  explicit PolySet(std::vector<std::string> vars) : vars_(std::move(vars)) {}
  static PolySet from_disjuncts(std::vector<std::string> vars,
                                std::vector<Polyhedron> disjuncts);

  const std::vector<std::string>& vars() const { return vars_; }
  const std::vector<Polyhedron>& disjuncts() const { return disjuncts_; }
  bool is_empty() const { return disjuncts_.empty(); }
  bool contains_point(const std::map<std::string, Rational>& point) const;

  PolySet project(const std::vector<std::string>& keep) const;
  PolySet rename_vars(const std::map<std::string, std::string>& renaming) const;
  PolySet lift_to(std::vector<std::string> new_vars) const;

 private:
  std::vector<std::string> vars_;
  std::vector<Polyhedron> disjuncts_;
};

PolySet polyset_union(const PolySet& a, const PolySet& b);
PolySet polyset_intersect(const PolySet& a, const PolySet& b);

/// Exact set difference a \ b, computed per pair by distributing the negated
/// rows of the subtrahend (an equality negates into two strict half-spaces)
/// and keeping the satisfiable pieces. The pieces produced for one pair are
/// pairwise disjoint.
PolySet polyset_difference(const PolySet& a, const PolySet& b);

/// Exact set equality: both differences are empty.
bool polyset_equal(const PolySet& a, const PolySet& b);

// --- serialization -------------------------------------------------------

/// Canonical JSON: an array of disjuncts, each {"rows": [...]} with rows as
/// {"coeffs": {var: "num/den"}, "const": "num/den", "rel": "<"|"<="|"="} in
/// canonical row order. Byte-stable for equal values.
std::string polyset_to_json(const PolySet& ps);
std::string polyhedron_to_json(const Polyhedron& p);

/// Parses the canonical JSON form; needs the variable space because empty
/// row sets do not mention variables.
PolySet polyset_from_json(const std::string& text, std::vector<std::string> vars);

/// Human-readable conjunction like "p1 <= d && d <= p2". Negative-coefficient
/// terms are moved across the relation so both sides stay non-negative.
std::string pretty_row(const Row& row);
std::string pretty_polyhedron(const Polyhedron& p);
std::string pretty_polyset(const PolySet& ps);

}  // namespace opaq::geo
