#include <doctest.h>

#include "helpers.hpp"

#include <opaq/model.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace opaq;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse and render round-trip on every bundled model") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(OPAQ_MODELS_DIR)) {
    if (entry.path().extension() != ".pta") continue;
    ++seen;
    INFO("model ", entry.path().filename().string());
    model::PTA parsed = model::parse_model(slurp(entry.path()));
    std::string canon = model::render_model(parsed);
    model::PTA reparsed = model::parse_model(canon);
    CHECK(reparsed == parsed);
    // Rendering is a fixpoint: canonical text re-renders byte-identically.
    CHECK(model::render_model(reparsed) == canon);
  }
  CHECK(seen >= 15);
}

TEST_CASE("parsing a small model populates every field") {
  model::PTA pta = model::parse_model(
      "pta tiny\n"
      "params p\n"
      "clocks x\n"
      "loc a init invariant x <= 2 * p + 1\n"
      "loc b private urgent\n"
      "loc c final\n"
      "edge a -> b when x >= p && x < 3 act go reset x\n"
      "edge b -> c\n");
  CHECK(pta.name == "tiny");
  CHECK(pta.params == std::vector<std::string>{"p"});
  CHECK(pta.clocks == std::vector<std::string>{"x"});
  CHECK(pta.initial().name == "a");
  CHECK(pta.final().name == "c");
  REQUIRE(pta.private_location() != nullptr);
  CHECK(pta.private_location()->name == "b");
  CHECK(pta.location("b").is_urgent);
  CHECK(pta.has_location("c"));
  CHECK(!pta.has_location("z"));
  CHECK(pta.is_clock("x"));
  CHECK(pta.is_param("p"));
  CHECK(!pta.is_param("x"));

  REQUIRE(pta.location("a").invariant.size() == 1);
  const model::Ineq& inv = pta.location("a").invariant[0];
  CHECK(inv.lhs_kind == model::AtomKind::Clock);
  CHECK(inv.lhs_name == "x");
  CHECK(inv.rel == model::Rel::Le);
  CHECK(inv.rhs.coeffs.at("p") == 2);
  CHECK(inv.rhs.constant == 1);

  REQUIRE(pta.edges.size() == 2);
  const model::Edge& e = pta.edges[0];
  CHECK(e.source == "a");
  CHECK(e.target == "b");
  REQUIRE(e.guard.size() == 2);
  CHECK(e.guard[0].rel == model::Rel::Ge);
  CHECK(e.guard[1].rel == model::Rel::Lt);
  CHECK(e.guard[1].rhs.constant == 3);
  CHECK(e.action == "go");
  CHECK(e.resets == std::vector<std::string>{"x"});
  CHECK(pta.edges[1].action.empty());
}

TEST_CASE("structural rules are enforced") {
  CHECK_THROWS_WITH_AS(model::parse_model(""),
                       "empty model: missing 'pta' line", model::ModelError);
  CHECK_THROWS_WITH_AS(
      model::parse_model("pta t\nclocks x\nloc a init\n"),
      "model must have exactly one final location", model::ModelError);
  CHECK_THROWS_WITH_AS(
      model::parse_model("pta t\nclocks x\nloc a init\nloc b init\nloc c final\n"),
      "model must have exactly one initial location", model::ModelError);
  CHECK_THROWS_WITH_AS(
      model::parse_model("pta t\nclocks x\nloc a init\nloc b private\n"
                         "loc c private\nloc f final\nedge a -> f\n"),
      "model must have at most one private location", model::ModelError);

  // Lexical and reference errors carry the offending line.
  auto message_of = [](const std::string& text) {
    try {
      model::parse_model(text);
    } catch (const model::ModelError& e) {
      return std::string(e.what());
    }
    return std::string("(no error)");
  };
  std::string undeclared =
      message_of("pta t\nclocks x\nloc a init\nloc f final\nedge a -> f when y >= 1\n");
  CHECK(undeclared.find("line 5") != std::string::npos);
  CHECK(undeclared.find("y") != std::string::npos);
  std::string bad_edge =
      message_of("pta t\nclocks x\nloc a init\nloc f final\nedge a -> nowhere\n");
  CHECK(bad_edge.find("nowhere") != std::string::npos);
}

TEST_CASE("valuation parsing") {
  auto v = model::parse_valuation("p1=2,p2=7/2");
  CHECK(v.at("p1") == 2);
  CHECK(v.at("p2") == Rational(7, 2));
  CHECK(v.size() == 2);

  CHECK_THROWS_AS(model::parse_valuation(""), model::ModelError);
  CHECK_THROWS_AS(model::parse_valuation("p1"), model::ModelError);
  CHECK_THROWS_WITH_AS(model::parse_valuation("p=1,p=2"),
                       "duplicate valuation for 'p'", model::ModelError);
}

TEST_CASE("substitution grounds all parameters") {
  model::PTA pta = testutil::load_model("fig2a.pta");
  model::PTA ground =
      model::substitute(pta, {{"p1", Rational(1)}, {"p2", Rational(4)}});
  CHECK(ground.params.empty());
  // x >= p1 becomes x >= 1
  const model::Ineq& g = ground.edges[0].guard[0];
  CHECK(g.rhs.coeffs.empty());
  CHECK(g.rhs.constant == 1);
  // invariant x <= p2 becomes x <= 4
  CHECK(ground.location("lpriv").invariant[0].rhs.constant == 4);

  CHECK_THROWS_WITH_AS(model::substitute(pta, {{"p1", Rational(1)}}),
                       "valuation misses parameter 'p2'", model::ModelError);
  CHECK_THROWS_WITH_AS(
      model::substitute(pta, {{"p1", Rational(1)},
                              {"p2", Rational(1)},
                              {"zz", Rational(1)}}),
      "valuation binds unknown parameter 'zz'", model::ModelError);
  CHECK_THROWS_AS(
      model::substitute(pta, {{"p1", Rational(-1)}, {"p2", Rational(1)}}),
      model::ModelError);
}

TEST_CASE("diagnostics classify models") {
  model::Diagnostics f2 = model::validate(testutil::load_model("fig2a.pta"));
  CHECK(f2.num_clocks == 1);
  CHECK(f2.num_params == 2);
  CHECK(f2.parametric_clocks == std::vector<std::string>{"x"});
  CHECK(f2.class_parametric_clocks == 1);
  CHECK(f2.class_nonparametric_clocks == 0);
  CHECK(f2.class_params == 2);
  CHECK(f2.reset_free);
  CHECK(f2.exact_pet_available);
  CHECK(f2.warnings.empty());

  model::Diagnostics f4 = model::validate(testutil::load_model("fig4a.pta"));
  CHECK(!f4.reset_free);
  CHECK(f4.exact_pet_available);
  // no private location -> degenerate-analysis warning
  REQUIRE(f4.warnings.size() == 1);
  CHECK(f4.warnings[0].find("private") != std::string::npos);

  model::Diagnostics c5 = model::validate(testutil::load_model("c05_noparams.pta"));
  CHECK(c5.num_params == 0);
  CHECK(c5.class_parametric_clocks == 0);
  CHECK(c5.class_nonparametric_clocks == 1);
}

TEST_CASE("guards lower to geometry rows") {
  model::PTA pta = model::parse_model(
      "pta g\n"
      "params p\n"
      "clocks x\n"
      "loc a init\n"
      "loc f final\n"
      "edge a -> f when x >= p && x < 3 && x = 2 * p\n");
  std::vector<geo::Row> rows = model::guard_to_rows(pta.edges[0].guard);
  REQUIRE(rows.size() == 3);
  // x >= p normalizes to p - x <= 0
  CHECK(rows[0].rel == geo::Rel::Le);
  CHECK(rows[0].coeffs.at("x") == -1);
  CHECK(rows[0].coeffs.at("p") == 1);
  CHECK(rows[0].constant == 0);
  // x < 3 stays strict
  CHECK(rows[1].rel == geo::Rel::Lt);
  CHECK(rows[1].coeffs.at("x") == 1);
  CHECK(rows[1].constant == 3);
  // x = 2p becomes the equality x - 2p = 0
  CHECK(rows[2].rel == geo::Rel::Eq);
  CHECK(rows[2].coeffs.at("x") == 1);
  CHECK(rows[2].coeffs.at("p") == -2);
}
