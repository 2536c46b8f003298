#include <doctest.h>

#include "helpers.hpp"

#include <json.hpp>
#include <opaq/arith.hpp>
#include <opaq/model.hpp>
#include <opaq/pet.hpp>

#include <string>
#include <vector>

using namespace opaq;
using arith::AffineBound;
using arith::PeriodicSet;

namespace {

bool parens_balanced(const std::string& s) {
  long depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) return false;
  }
  return depth == 0;
}

long count_occurrences(const std::string& hay, const std::string& needle) {
  long n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("affine interval description of the loop model") {
  model::PTA pta = testutil::load_model("fig4a_q2.pta");
  pet::PetExpression pe = pet::pet_via_zones(pta);
  REQUIRE(pe.status == zonegraph::Status::Complete);

  arith::LpSlSet s = arith::to_lpsl(pe.terms, "p");
  CHECK(s.param == "p");
  CHECK(s.threshold == 2);
  // Below the threshold the exit window [2, p] is empty.
  REQUIRE(s.low_valuations.size() == 2);
  CHECK(s.low_valuations.at(0).is_empty());
  CHECK(s.low_valuations.at(1).is_empty());

  REQUIRE(s.terms.size() == 2);
  const arith::LpSlTerm* plain = &s.terms[0];
  const arith::LpSlTerm* looped = &s.terms[1];
  if (!plain->loops.empty()) std::swap(plain, looped);
  // [2, p]
  CHECK(plain->loops.empty());
  CHECK(plain->base_lo == AffineBound{0, 2, false});
  REQUIRE(plain->base_hi.has_value());
  CHECK(*plain->base_hi == AffineBound{1, 0, false});
  // [p + 2, 2p] with a loop of exactly p
  REQUIRE(looped->loops.size() == 1);
  CHECK(looped->base_lo == AffineBound{1, 2, false});
  REQUIRE(looped->base_hi.has_value());
  CHECK(*looped->base_hi == AffineBound{2, 0, false});
  CHECK(looped->loops[0].lo == AffineBound{1, 0, false});
  REQUIRE(looped->loops[0].hi.has_value());
  CHECK(*looped->loops[0].hi == AffineBound{1, 0, false});

  // p = 2: [2,2] plus [4,4] with step 2 -> the positive even numbers
  CHECK(arith::ps_equal(arith::evaluate_lpsl(s, 2), PeriodicSet::make({}, 2, 2, {0})));

  std::string json = arith::lpsl_to_json(s);
  nlohmann::json parsed = nlohmann::json::parse(json);
  CHECK(parsed.at("param") == "p");
  CHECK(parsed.at("threshold") == 2);
  CHECK(parsed.at("terms").size() == 2);
  CHECK(parsed.at("low_valuations").size() == 2);
}

TEST_CASE("interval description agrees with the normal form everywhere") {
  for (const std::string name : {"fig4a_q2.pta", "c02_loop_private.pta",
                                 "c11_unit_loop.pta", "c08_strict.pta"}) {
    INFO("model ", name);
    model::PTA pta = testutil::load_model(name);
    if (name == "c08_strict.pta") pta = model::double_system(pta);
    pet::PetExpression pe = pet::pet_via_zones(pta);
    REQUIRE(pe.status == zonegraph::Status::Complete);
    REQUIRE(pta.params.size() == 1);
    const std::string& param = pta.params[0];

    arith::LpSlSet s = arith::to_lpsl(pe.terms, param);
    for (long p = 0; p < s.threshold + 10; ++p) {
      INFO("p = ", p);
      CHECK(arith::ps_equal(arith::evaluate_lpsl(s, p),
                            pet::evaluate_at(pe.terms, {{param, p}})));
    }
  }
}

TEST_CASE("formula constructors simplify trivial cases") {
  CHECK(arith::df_true()->kind == arith::DivFormula::Kind::True);
  CHECK(arith::df_false()->kind == arith::DivFormula::Kind::False);
  CHECK(arith::df_and({})->kind == arith::DivFormula::Kind::True);
  CHECK(arith::df_or({})->kind == arith::DivFormula::Kind::False);
  CHECK(arith::df_and({arith::df_true(), arith::df_false()})->kind ==
        arith::DivFormula::Kind::False);
  CHECK(arith::df_or({arith::df_false(), arith::df_true()})->kind ==
        arith::DivFormula::Kind::True);

  geo::Row row;
  row.coeffs["d"] = 1;
  row.constant = 3;
  row.rel = geo::Rel::Le;
  auto atom = arith::df_atom(row);
  CHECK(arith::df_and({atom})->kind == arith::DivFormula::Kind::Atom);
  auto ex = arith::df_exists({"x0"}, atom);
  CHECK(ex->kind == arith::DivFormula::Kind::Exists);
  CHECK(ex->bound == std::vector<std::string>{"x0"});
}

TEST_CASE("membership formula of the loop model") {
  model::PTA pta = testutil::load_model("fig4a.pta");
  pet::PetExpression pe = pet::pet_via_zones(pta);
  arith::DivSystem sys = arith::build_div_formula(pe.terms, pta.params);
  CHECK(sys.free_vars ==
        std::vector<std::string>{model::kDurationParam, "p", "q"});

  // p = 3, q = 2: durations are {2,3} + multiples of 3
  CHECK(arith::eval_div_formula(sys, {{"d", 5}, {"p", 3}, {"q", 2}}));
  CHECK(arith::eval_div_formula(sys, {{"d", 6}, {"p", 3}, {"q", 2}}));
  CHECK(!arith::eval_div_formula(sys, {{"d", 4}, {"p", 3}, {"q", 2}}));
  CHECK(!arith::eval_div_formula(sys, {{"d", 1}, {"p", 3}, {"q", 2}}));
  CHECK(arith::eval_div_formula(sys, {{"d", 0}, {"p", 0}, {"q", 0}}));
  // q > p: empty at every duration
  CHECK(!arith::eval_div_formula(sys, {{"d", 0}, {"p", 1}, {"q", 5}}));

  std::string text = arith::div_formula_to_string(sys);
  CHECK(text.rfind("free d,p,q. ", 0) == 0);
  CHECK(text.find("exists") != std::string::npos);
  CHECK(text.find(" | ") != std::string::npos);  // divisibility atoms
  CHECK(parens_balanced(text));

  // no terms: the constant-false system
  arith::DivSystem none = arith::build_div_formula({}, {"p"});
  CHECK(none.formula->kind == arith::DivFormula::Kind::False);
  CHECK(!arith::eval_div_formula(none, {{"d", 0}, {"p", 0}}));
}

TEST_CASE("SMT scripts are well formed") {
  model::PTA pta = testutil::load_model("fig4a.pta");
  pet::PetExpression pe = pet::pet_via_zones(pta);
  arith::DivSystem sys = arith::build_div_formula(pe.terms, pta.params);

  std::string script = arith::emit_smt(sys, "loop model durations");
  CHECK(script.rfind("; loop model durations\n", 0) == 0);
  CHECK(script.find("(set-logic ALL)") != std::string::npos);
  CHECK(count_occurrences(script, "(declare-const") == 3);
  CHECK(script.find("(declare-const d Int)") != std::string::npos);
  CHECK(script.find("(check-sat)") != std::string::npos);
  CHECK(script.find("(get-model)") != std::string::npos);
  CHECK(parens_balanced(script));

  // the trivial formulas assert their constants
  arith::DivSystem truthy{{"d"}, arith::df_true()};
  CHECK(arith::emit_smt(truthy).find("(assert true)") != std::string::npos);
  arith::DivSystem falsy{{"d"}, arith::df_false()};
  CHECK(arith::emit_smt(falsy).find("(assert false)") != std::string::npos);

  // intersections share one declaration block and assert both formulas
  model::PTA dbl = model::double_system(pta);
  pet::PetExpression pe2 = pet::pet_via_zones(dbl);
  arith::DivSystem sys2 = arith::build_div_formula(pe2.terms, dbl.params);
  std::string both = arith::emit_smt_intersection(sys, sys2);
  CHECK(count_occurrences(both, "(declare-const") == 3);
  CHECK(count_occurrences(both, "(assert") >= 5);  // 3 nonneg + 2 formulas
  CHECK(count_occurrences(both, "(check-sat)") == 1);
  CHECK(parens_balanced(both));

  CHECK_THROWS_AS(
      arith::emit_smt_intersection(sys, arith::DivSystem{{"d"}, arith::df_true()}),
      std::invalid_argument);
}

TEST_CASE("formula membership matches the evaluated durations") {
  // One model inline; the whole corpus is covered by the agreement suites.
  model::PTA pta = testutil::load_model("fig4a_q2.pta");
  pet::PetExpression pe = pet::pet_via_zones(pta);
  arith::DivSystem sys = arith::build_div_formula(pe.terms, pta.params);
  for (long p = 0; p <= 5; ++p) {
    PeriodicSet expected = pet::evaluate_at(pe.terms, {{"p", p}});
    for (long d = 0; d <= 24; ++d) {
      INFO("p = ", p, ", d = ", d);
      CHECK(arith::eval_div_formula(sys, {{"d", d}, {"p", p}}, 32) ==
            expected.contains(d));
    }
  }
}
