#include <doctest.h>

#include "helpers.hpp"
#include "properties.hpp"

#include <opaq/model.hpp>
#include <opaq/opacity.hpp>

#include <map>
#include <string>
#include <vector>

using namespace opaq;
using opacity::Method;
using opacity::Mode;

namespace {

geo::Row row_of(std::map<std::string, Rational> coeffs, Rational constant,
                geo::Rel rel) {
  geo::Row r;
  r.coeffs = std::move(coeffs);
  r.constant = std::move(constant);
  r.rel = rel;
  return r;
}

geo::Polyhedron poly_of(const std::vector<std::string>& vars,
                        std::vector<geo::Row> rows) {
  return geo::Polyhedron::from_rows(vars, std::move(rows));
}

geo::PolySet set_of(const std::vector<std::string>& vars,
                    std::vector<geo::Polyhedron> ds) {
  return geo::PolySet::from_disjuncts(vars, std::move(ds));
}

// A model with two clocks, to exercise the method-selection rules.
model::PTA two_clock_model() {
  return model::parse_model(
      "pta twoclock\n"
      "params p\n"
      "clocks x y\n"
      "loc l0 init invariant x <= 3\n"
      "loc lp private invariant y <= 3\n"
      "loc lf final\n"
      "edge l0 -> lp when x >= 1 reset x\n"
      "edge lp -> lf when y <= p\n"
      "edge l0 -> lf when x <= 2\n");
}

}  // namespace

TEST_CASE("synthesis pins the expected sets on the branching model") {
  model::PTA pta = testutil::load_model("fig2a.pta");
  const std::vector<std::string> pd = {"p1", "p2", "d"};
  const std::vector<std::string> pp = {"p1", "p2"};

  opacity::SynthesisResult eos_d = opacity::d_eos(pta);
  CHECK(eos_d.status == zonegraph::Status::Complete);
  geo::PolySet eos_d_pinned = set_of(
      pd, {poly_of(pd, {row_of({{"p1", 1}, {"d", -1}}, 0, geo::Rel::Le),
                        row_of({{"d", 1}}, 3, geo::Rel::Le),
                        row_of({{"d", 1}, {"p2", -1}}, 0, geo::Rel::Le)})});
  CHECK(geo::polyset_equal(eos_d.set, eos_d_pinned));

  // Leaking durations: private-only ones past the public deadline, and
  // public-only ones outside the private window.
  opacity::SynthesisResult diff = opacity::diff_set(pta);
  CHECK(diff.status == zonegraph::Status::Complete);
  geo::PolySet diff_pinned = set_of(
      pd, {poly_of(pd, {row_of({{"p1", 1}}, 3, geo::Rel::Le),
                        row_of({{"d", -1}}, -3, geo::Rel::Lt),
                        row_of({{"d", 1}, {"p2", -1}}, 0, geo::Rel::Le)}),
           poly_of(pd, {row_of({{"d", 1}}, 3, geo::Rel::Le),
                        row_of({{"d", 1}, {"p1", -1}}, 0, geo::Rel::Lt)}),
           poly_of(pd, {row_of({{"p2", 1}, {"d", -1}}, 0, geo::Rel::Lt),
                        row_of({{"d", 1}}, 3, geo::Rel::Le)})});
  CHECK(geo::polyset_equal(diff.set, diff_pinned));

  opacity::SynthesisResult fos_d = opacity::d_fos(pta);
  CHECK(fos_d.status == zonegraph::Status::Complete);
  geo::PolySet fos_d_pinned = set_of(
      pd, {poly_of(pd, {row_of({{"p1", 1}, {"d", -1}}, 0, geo::Rel::Le),
                        row_of({{"d", 1}, {"p2", -1}}, 0, geo::Rel::Le),
                        row_of({{"p1", 1}}, 0, geo::Rel::Eq),
                        row_of({{"p2", 1}}, 3, geo::Rel::Eq)})});
  CHECK(geo::polyset_equal(fos_d.set, fos_d_pinned));

  opacity::SynthesisResult eos = opacity::eos_synth(pta);
  CHECK(eos.status == zonegraph::Status::Complete);
  geo::PolySet eos_pinned = set_of(
      pp, {poly_of(pp, {row_of({{"p1", 1}}, 3, geo::Rel::Le),
                        row_of({{"p1", 1}, {"p2", -1}}, 0, geo::Rel::Le)})});
  CHECK(geo::polyset_equal(eos.set, eos_pinned));

  opacity::SynthesisResult fos = opacity::fos_synth(pta);
  CHECK(fos.status == zonegraph::Status::Complete);
  geo::PolySet fos_pinned = set_of(
      pp, {poly_of(pp, {row_of({{"p1", 1}}, 0, geo::Rel::Eq),
                        row_of({{"p2", 1}}, 3, geo::Rel::Eq)})});
  CHECK(geo::polyset_equal(fos.set, fos_pinned));

  // Spot checks: a valuation inside the full-opacity set is also in the
  // existential one, and the known leaky valuation is in neither.
  CHECK(fos.set.contains_point({{"p1", 0}, {"p2", 3}}));
  CHECK(eos.set.contains_point({{"p1", 0}, {"p2", 3}}));
  CHECK(eos.set.contains_point({{"p1", 1}, {"p2", 4}}));
  CHECK(!fos.set.contains_point({{"p1", 1}, {"p2", 4}}));
  CHECK(!eos.set.contains_point({{"p1", 4}, {"p2", 9}}));
}

TEST_CASE("full-opacity sets are contained in the existential ones") {
  // By construction the fully opaque durations are a subset of the opaque
  // ones, whatever the exploration budget; check it holds on every model.
  // Loop-heavy models grow their duration unions with the depth budget, so
  // keep the budget modest to bound the polyhedral set sizes.
  zonegraph::ExplorationBudget budget{.max_states = 120, .max_depth = 12};
  std::vector<std::string> names = testutil::corpus();
  names.push_back("fig2a.pta");
  for (const auto& name : names) {
    INFO("model ", name);
    model::PTA pta = testutil::load_model(name);
    opacity::SynthesisResult eos_d = opacity::d_eos(pta, budget);
    opacity::SynthesisResult fos_d = opacity::d_fos(pta, budget);
    CHECK(geo::polyset_difference(fos_d.set, eos_d.set).is_empty());
  }

  // Same containment after projecting to the parameters.
  model::PTA fig2a = testutil::load_model("fig2a.pta");
  geo::PolySet eos = opacity::eos_synth(fig2a).set;
  geo::PolySet fos = opacity::fos_synth(fig2a).set;
  CHECK(geo::polyset_difference(fos, eos).is_empty());
}

TEST_CASE("synthesis classifies the always and never opaque models") {
  // Disjoint private and public windows: no valuation is opaque.
  opacity::SynthesisResult never = opacity::eos_synth(testutil::load_model("c07_disjoint.pta"));
  CHECK(never.status == zonegraph::Status::Complete);
  CHECK(never.set.is_empty());

  // Symmetric branches: fully opaque wherever the final location is
  // reachable at all, i.e. for p <= 3.
  opacity::SynthesisResult sym = opacity::fos_synth(testutil::load_model("c06_symmetric.pta"));
  CHECK(sym.status == zonegraph::Status::Complete);
  const std::vector<std::string> pv = {"p"};
  CHECK(geo::polyset_equal(
      sym.set, set_of(pv, {poly_of(pv, {row_of({{"p", 1}}, 3, geo::Rel::Le)})})));
  CHECK(sym.set.contains_point({{"p", 2}}));
}

TEST_CASE("per-valuation checks on the branching model") {
  model::PTA pta = testutil::load_model("fig2a.pta");

  opacity::CheckResult ex =
      opacity::check_valuation(pta, {{"p1", 1}, {"p2", 4}}, Mode::Exist);
  CHECK(ex.method == "zones");
  CHECK(ex.status == zonegraph::Status::Complete);
  CHECK(ex.opaque);
  CHECK(ex.conclusive);
  REQUIRE(ex.witness.has_value());
  CHECK(*ex.witness == Rational(1));

  opacity::CheckResult fu =
      opacity::check_valuation(pta, {{"p1", 1}, {"p2", 4}}, Mode::Full);
  CHECK(fu.method == "zones");
  CHECK(!fu.opaque);
  CHECK(fu.conclusive);
  CHECK(!fu.witness.has_value());
  REQUIRE(fu.least_public_only.has_value());
  CHECK(*fu.least_public_only == Rational(0));
  REQUIRE(fu.least_private_only.has_value());
  CHECK(*fu.least_private_only == rat(7, 2));

  // The one valuation where the private and public duration sets coincide.
  opacity::CheckResult full_ok =
      opacity::check_valuation(pta, {{"p1", 0}, {"p2", 3}}, Mode::Full);
  CHECK(full_ok.opaque);
  CHECK(full_ok.conclusive);
  REQUIRE(full_ok.witness.has_value());
  CHECK(*full_ok.witness == Rational(0));

  // Rational valuations go through the same integer-scaling route.
  opacity::CheckResult half =
      opacity::check_valuation(pta, {{"p1", rat(7, 2)}, {"p2", 4}}, Mode::Exist);
  CHECK(!half.opaque);       // private window (7/2, 4] misses public [0, 3]
  CHECK(half.conclusive);
  opacity::CheckResult third =
      opacity::check_valuation(pta, {{"p1", rat(8, 3)}, {"p2", 3}}, Mode::Exist);
  CHECK(third.opaque);       // 8/3 <= 3, so durations [8/3, 3] are shared
  REQUIRE(third.witness.has_value());
  CHECK(*third.witness == rat(8, 3));
}

TEST_CASE("the polyhedral method agrees with the zone method") {
  model::PTA pta = testutil::load_model("fig2a.pta");

  opacity::CheckResult ex = opacity::check_valuation(
      pta, {{"p1", 1}, {"p2", 4}}, Mode::Exist, Method::Semialg);
  CHECK(ex.method == "semialg");
  CHECK(ex.opaque);
  CHECK(ex.conclusive);
  REQUIRE(ex.witness.has_value());
  CHECK(*ex.witness == Rational(1));

  opacity::CheckResult fu = opacity::check_valuation(
      pta, {{"p1", 1}, {"p2", 4}}, Mode::Full, Method::Semialg);
  CHECK(!fu.opaque);
  REQUIRE(fu.least_public_only.has_value());
  CHECK(*fu.least_public_only == Rational(0));
  REQUIRE(fu.least_private_only.has_value());
  CHECK(*fu.least_private_only == rat(7, 2));

  opacity::CheckResult full_ok = opacity::check_valuation(
      pta, {{"p1", 0}, {"p2", 3}}, Mode::Full, Method::Semialg);
  CHECK(full_ok.opaque);
  REQUIRE(full_ok.witness.has_value());
  CHECK(*full_ok.witness == Rational(0));

  // Forcing the zone method is fine on one clock and rejected otherwise;
  // automatic selection falls back to the polyhedral route on two clocks.
  CHECK(opacity::check_valuation(pta, {{"p1", 1}, {"p2", 4}}, Mode::Exist,
                                 Method::Zones)
            .method == "zones");
  model::PTA twoclk = two_clock_model();
  CHECK_THROWS_WITH_AS(opacity::check_valuation(twoclk, {{"p", 2}}, Mode::Exist,
                                                Method::Zones),
                       "the zones method needs a single clock", model::ModelError);
  opacity::CheckResult auto_pick =
      opacity::check_valuation(twoclk, {{"p", 2}}, Mode::Exist);
  CHECK(auto_pick.method == "semialg");
  CHECK(auto_pick.opaque);  // waiting in l0 makes both windows overlap
}

TEST_CASE("bounded grid search finds the least opaque valuation") {
  model::PTA pta = testutil::load_model("fig2a.pta");

  opacity::BoundedSearch ex = opacity::eoe_bounded(pta, 5);
  CHECK(ex.found);
  CHECK(ex.bound == 5);
  CHECK(ex.status == zonegraph::Status::Complete);
  CHECK(ex.witness == std::map<std::string, Rational>{{"p1", 0}, {"p2", 0}});

  opacity::BoundedSearch fu = opacity::foe_bounded(pta, 5);
  CHECK(fu.found);
  CHECK(fu.witness == std::map<std::string, Rational>{{"p1", 0}, {"p2", 3}});

  // The parallel search partitions the same grid and reports the same least
  // witness.
  opacity::BoundedSearch ex4 = opacity::eoe_bounded(pta, 5, 4);
  CHECK(ex4.found == ex.found);
  CHECK(ex4.witness == ex.witness);
  opacity::BoundedSearch fu4 = opacity::foe_bounded(pta, 5, 4);
  CHECK(fu4.found == fu.found);
  CHECK(fu4.witness == fu.witness);

  // Never-opaque model: the whole grid is searched and nothing is found.
  opacity::BoundedSearch none =
      opacity::eoe_bounded(testutil::load_model("c07_disjoint.pta"), 5, 2);
  CHECK(!none.found);
  CHECK(none.status == zonegraph::Status::Complete);
}

TEST_CASE("verdicts and duration sets agree with brute force on the corpus") {
  std::vector<std::string> failures = testutil::corpus_agreement_suite(24);
  for (const auto& f : failures) {
    INFO(f);
    CHECK(false);
  }
  CHECK(failures.empty());
}

TEST_CASE("divisibility formulas agree with brute force on the corpus") {
  std::vector<std::string> failures = testutil::div_agreement_suite(16);
  for (const auto& f : failures) {
    INFO(f);
    CHECK(false);
  }
  CHECK(failures.empty());
}
