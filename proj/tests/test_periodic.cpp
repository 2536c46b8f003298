#include <doctest.h>

#include "properties.hpp"

#include <opaq/periodic.hpp>

using namespace opaq;
using arith::PeriodicSet;

TEST_CASE("canonical form minimizes threshold and period") {
  // A prefix that already matches the tail pattern is absorbed.
  PeriodicSet s = PeriodicSet::make({0, 3}, 6, 3, {0});
  CHECK(s.prefix.empty());
  CHECK(s.threshold == 0);
  CHECK(s.period == 3);
  CHECK(s.residues == std::set<long>{0});
  CHECK(s.contains(0));
  CHECK(s.contains(9));
  CHECK(!s.contains(4));

  // A non-minimal period collapses to a divisor.
  PeriodicSet t = PeriodicSet::make({}, 0, 6, {0, 2, 4});
  CHECK(t.period == 2);
  CHECK(t.residues == std::set<long>{0});

  // Empty residues force period one.
  PeriodicSet fin = PeriodicSet::make({1, 2}, 5, 4, {});
  CHECK(fin.period == 1);
  CHECK(fin.is_finite());
  CHECK(testutil::enum_upto(fin, 100) == std::set<long>{1, 2});
}

TEST_CASE("interval star closed forms") {
  // star([2,3]) = {0} then everything from 2 on
  PeriodicSet s23 = arith::interval_star(2, 3);
  CHECK(s23.contains(0));
  CHECK(!s23.contains(1));
  for (long n = 2; n <= 50; ++n) CHECK(s23.contains(n));

  // star([3,4]) has a hole at 5
  PeriodicSet s34 = arith::interval_star(3, 4);
  CHECK(s34.contains(0));
  CHECK(s34.contains(3));
  CHECK(s34.contains(4));
  CHECK(!s34.contains(5));
  for (long n = 6; n <= 50; ++n) CHECK(s34.contains(n));

  // a degenerate interval gives the multiples
  PeriodicSet s33 = arith::interval_star(3, 3);
  for (long n = 0; n <= 30; ++n) CHECK(s33.contains(n) == (n % 3 == 0));

  // empty interval, zero interval, unbounded interval
  CHECK(testutil::enum_upto(arith::interval_star(4, 2), 50) == std::set<long>{0});
  CHECK(testutil::enum_upto(arith::interval_star(0, 0), 50) == std::set<long>{0});
  PeriodicSet tail = arith::interval_star(3, std::nullopt);
  CHECK(tail.contains(0));
  CHECK(!tail.contains(2));
  CHECK(tail.contains(3));
  CHECK(tail.contains(1000));
}

TEST_CASE("sum and union on pinned values") {
  PeriodicSet window = PeriodicSet::from_elements({2, 3});
  PeriodicSet loop = arith::interval_star(3, 3);
  PeriodicSet total = arith::ps_sum(window, loop);
  // {2,3} + multiples of 3: residues 2 and 0 mod 3, from 2 on
  std::set<long> expected;
  for (long k = 0; k <= 60; k += 3) {
    if (k + 2 <= 60) expected.insert(k + 2);
    if (k + 3 <= 60) expected.insert(k + 3);
  }
  CHECK(testutil::enum_upto(total, 60) == expected);

  PeriodicSet evens = PeriodicSet::make({}, 0, 2, {0});
  PeriodicSet odds = PeriodicSet::make({}, 0, 2, {1});
  CHECK(testutil::enum_upto(arith::ps_union(evens, odds), 20) ==
        testutil::enum_upto(arith::interval_star(0, 1), 20));
  CHECK(arith::ps_sum(evens, evens).period == 2);

  // least common element
  CHECK(arith::ps_intersect_nonempty(evens, odds) == std::nullopt);
  CHECK(arith::ps_intersect_nonempty(evens, loop) == 0);
  CHECK(arith::ps_intersect_nonempty(odds, loop) == 3);
}

TEST_CASE("star fixpoint matches the closed form") {
  PeriodicSet s = PeriodicSet::from_elements({4, 5});
  CHECK(arith::ps_equal(arith::ps_star(s), arith::interval_star(4, 5)));

  PeriodicSet zero = PeriodicSet::from_elements({0});
  CHECK(arith::ps_star(zero) == zero);

  PeriodicSet empty = PeriodicSet::empty_set();
  CHECK(arith::ps_star(empty) == zero);
}

TEST_CASE("property suite: algebra vs enumeration") {
  auto failures = testutil::periodic_suite(500);
  for (const auto& f : failures) MESSAGE(f);
  CHECK(failures.empty());
}

TEST_CASE("property suite: interval star brute force") {
  auto failures = testutil::interval_star_suite();
  for (const auto& f : failures) MESSAGE(f);
  CHECK(failures.empty());
}
