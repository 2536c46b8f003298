#include <doctest.h>

#include "helpers.hpp"

#include <opaq/model.hpp>
#include <opaq/oracle.hpp>

#include <set>
#include <string>

using namespace opaq;

namespace {

model::PTA ground(const std::string& name,
                  const std::map<std::string, Rational>& v) {
  return model::substitute(testutil::load_model(name), v);
}

std::set<long> upto(const std::set<long>& s, long bound) {
  std::set<long> out;
  for (long n : s)
    if (n <= bound) out.insert(n);
  return out;
}

}  // namespace

TEST_CASE("duration enumeration on the branching model") {
  oracle::DurationSets ds =
      oracle::enumerate_durations(ground("fig2a.pta", {{"p1", 1}, {"p2", 4}}), 10);
  CHECK(ds.private_durations == std::set<long>{1, 2, 3, 4});
  CHECK(ds.public_durations == std::set<long>{0, 1, 2, 3});
}

TEST_CASE("duration enumeration follows reset loops") {
  oracle::DurationSets ds =
      oracle::enumerate_durations(ground("fig4a.pta", {{"p", 3}, {"q", 2}}), 14);
  CHECK(ds.private_durations.empty());  // no private location
  CHECK(ds.public_durations == std::set<long>{2, 3, 5, 6, 8, 9, 11, 12, 14});
}

TEST_CASE("urgent locations admit no delay") {
  oracle::DurationSets ds =
      oracle::enumerate_durations(ground("c03_urgent.pta", {{"p", 1}}), 6);
  CHECK(ds.private_durations == std::set<long>{1, 2});
  CHECK(ds.public_durations == std::set<long>{1, 2, 3});
}

TEST_CASE("an unreachable final location yields empty sets") {
  model::PTA dead = model::parse_model(
      "pta dead\nclocks x\nloc a init invariant x <= 1\nloc f final\n"
      "edge a -> f when x >= 2\n");
  oracle::DurationSets ds = oracle::enumerate_durations(dead, 10);
  CHECK(ds.private_durations.empty());
  CHECK(ds.public_durations.empty());

  // Degenerate classification: nothing leaks, nothing is hidden.
  oracle::ConcreteOpacity table = oracle::check_opacity_concrete(dead, 10);
  CHECK(!table.exist_opaque);
  CHECK(table.fully_opaque);
  CHECK(table.both.empty());
}

TEST_CASE("longer horizons only extend the sets") {
  model::PTA m = ground("c02_loop_private.pta", {{"p", 3}});
  oracle::DurationSets small = oracle::enumerate_durations(m, 20);
  oracle::DurationSets large = oracle::enumerate_durations(m, 40);
  CHECK(upto(large.private_durations, 20) == small.private_durations);
  CHECK(upto(large.public_durations, 20) == small.public_durations);
}

TEST_CASE("classification of the branching model") {
  oracle::ConcreteOpacity table =
      oracle::check_opacity_concrete(ground("fig2a.pta", {{"p1", 1}, {"p2", 4}}), 5);
  CHECK(table.horizon == 5);
  CHECK(table.both == std::set<long>{1, 2, 3});
  CHECK(table.public_only == std::set<long>{0});
  CHECK(table.private_only == std::set<long>{4});
  CHECK(table.exist_opaque);
  CHECK(!table.fully_opaque);

  CHECK(oracle::to_csv(table) ==
        "duration,visibility-class\n"
        "0,public-only\n"
        "1,both\n"
        "2,both\n"
        "3,both\n"
        "4,private-only\n"
        "5,none\n");

  // p1 = 0, p2 = 3 makes the two branches indistinguishable.
  oracle::ConcreteOpacity full =
      oracle::check_opacity_concrete(ground("fig2a.pta", {{"p1", 0}, {"p2", 3}}), 8);
  CHECK(full.fully_opaque);
  CHECK(full.both == std::set<long>{0, 1, 2, 3});
  CHECK(full.private_only.empty());
  CHECK(full.public_only.empty());
}

TEST_CASE("symmetric branches are fully opaque, disjoint ones never") {
  CHECK(oracle::check_opacity_concrete(ground("c06_symmetric.pta", {{"p", 2}}), 12)
            .fully_opaque);
  for (long p : {0L, 2L, 4L}) {
    INFO("p = ", p);
    oracle::ConcreteOpacity table =
        oracle::check_opacity_concrete(ground("c07_disjoint.pta", {{"p", p}}), 12);
    CHECK(!table.exist_opaque);
    CHECK(table.both.empty());
  }
}
