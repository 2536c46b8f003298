#pragma once

// Symbolic duration sets for one-parameter models, in two exchangeable
// encodings:
//  - LpSlSet: beyond an explicitly computed threshold M the normal form is
//    uniform in p — every term keeps the same dominant affine bounds and the
//    same active loops for all p >= M — so the set is described by affine
//    interval progressions plus exact per-valuation sets below M.
//  - DivSystem: an existential formula over integers with divisibility
//    atoms, one block per normal-form term, suitable for SMT export.

#include <opaq/geometry.hpp>
#include <opaq/periodic.hpp>
#include <opaq/pet.hpp>
#include <opaq/rational.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace opaq::arith {

// slope * p + offset; `strict` marks a strict comparison.
struct AffineBound {
  Rational slope{0};
  Rational offset{0};
  bool strict = false;

  Rational at(const Rational& p) const { return slope * p + offset; }
  bool operator==(const AffineBound&) const = default;
};

struct LoopShape {
  AffineBound lo;
  std::optional<AffineBound> hi;  // nullopt: unbounded
  bool operator==(const LoopShape&) const = default;
};

struct LpSlTerm {
  AffineBound base_lo;
  std::optional<AffineBound> base_hi;
  std::vector<LoopShape> loops;
  bool operator==(const LpSlTerm&) const = default;
};

struct LpSlSet {
  std::string param;
  long threshold = 0;  // M
  std::vector<LpSlTerm> terms;                 // the uniform shape for p >= M
  std::map<long, PeriodicSet> low_valuations;  // exact sets for 0 <= p < M
};

// Requires a normal form over exactly {param, d}.
LpSlSet to_lpsl(const std::vector<pet::NormalTerm>& terms, const std::string& param);

PeriodicSet evaluate_lpsl(const LpSlSet& s, long p);

std::string lpsl_to_json(const LpSlSet& s);

// ---------------------------------------------------------------------------
// Existential Presburger formulas with divisibility.

struct DivFormula;
using DivFormulaPtr = std::shared_ptr<const DivFormula>;

struct DivFormula {
  enum class Kind { True, False, Atom, Div, And, Or, Exists };
  Kind kind = Kind::True;
  geo::Row atom;              // Atom: linear constraint over named variables
  std::string div_y, div_z;   // Div: y divides z
  std::vector<DivFormulaPtr> children;  // And/Or: 1+; Exists: exactly 1
  std::vector<std::string> bound;       // Exists: nonnegative integer variables
};

DivFormulaPtr df_true();
DivFormulaPtr df_false();
DivFormulaPtr df_atom(geo::Row row);
DivFormulaPtr df_div(std::string y, std::string z);
DivFormulaPtr df_and(std::vector<DivFormulaPtr> xs);
DivFormulaPtr df_or(std::vector<DivFormulaPtr> xs);
DivFormulaPtr df_exists(std::vector<std::string> bound, DivFormulaPtr body);

struct DivSystem {
  std::vector<std::string> free_vars;  // d first, then the parameters
  DivFormulaPtr formula;
};

// One disjunct per normal-form term t with loops S_1..S_m:
//   ∃ x_0..x_m >= 0:  d = Σ x_j  ∧  base rows on x_0
//     ∧ for each loop j:  x_j = 0  ∨  ∃ y1 y2 y3 z1 z2 >= 0:
//         loop rows on y1, y2, y3 (parameter rows once)
//         ∧ (z1 = 0 ∨ y1 | z1) ∧ (z2 = 0 ∨ y2 | z2) ∧ x_j = z1 + z2 + y3,
// which captures sums of loop values exactly: a sum of k >= 1 values of
// [lo, hi] is a multiple of one value plus a multiple of another plus one
// more value, and conversely.
DivSystem build_div_formula(const std::vector<pet::NormalTerm>& terms,
                            const std::vector<std::string>& params);

// Ground evaluation by bounded witness search: existential variables range
// over [0, B] with interval pruning from the atoms; B grows with the
// assignment values and the formula constants, `witness_bound` is the floor.
bool eval_div_formula(const DivSystem& sys, const std::map<std::string, long>& assignment,
                      long witness_bound = 64);

std::string div_formula_to_string(const DivSystem& sys);

// SMT-LIB 2 script: free variables as nonnegative integer constants, the
// formula asserted, divisibility y | z as ∃k >= 0: z = k·y.
std::string emit_smt(const DivSystem& sys, const std::string& comment = "");

// Satisfiable iff some (d, parameters) lies in both systems — the formulas
// share their free variables.
std::string emit_smt_intersection(const DivSystem& a, const DivSystem& b,
                                  const std::string& comment = "");

}  // namespace opaq::arith
