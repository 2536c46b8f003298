#pragma once

// Ultimately periodic sets of naturals in canonical form: a finite prefix
// below a threshold, then membership by residue. Closed under union and
// Minkowski sum, with an exact star of integer intervals — enough to evaluate
// duration-set expressions at integer parameter valuations.

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace opaq::arith {

struct PeriodicSet {
  // Canonical: prefix ⊆ [0, threshold), residues ⊆ [0, period), period
  // minimal (1 when residues is empty), threshold minimal.
  std::set<long> prefix;
  long threshold = 0;
  long period = 1;
  std::set<long> residues;

  bool operator==(const PeriodicSet&) const = default;

  bool contains(long n) const;
  bool is_empty() const;
  bool is_finite() const;

  // Normalizing factory: accepts any raw description (prefix elements beyond
  // the threshold included) and returns the canonical form.
  static PeriodicSet make(std::set<long> prefix, long threshold, long period,
                          std::set<long> residues);
  static PeriodicSet empty_set();
  static PeriodicSet from_elements(const std::set<long>& elements);
  // The full tail {n : n >= threshold} plus nothing below.
  static PeriodicSet from_lower_bound(long threshold);
};

PeriodicSet ps_union(const PeriodicSet& a, const PeriodicSet& b);

// Minkowski sum {a + b}. Exact: beyond ta+pa+tb+pb+pa*pb the sum is periodic
// with period lcm(pa, pb).
PeriodicSet ps_sum(const PeriodicSet& a, const PeriodicSet& b);

// {0} ∪ [lo,hi] ∪ [2lo,2hi] ∪ …, with hi = nullopt meaning unbounded. An
// empty interval (hi < lo) gives {0}.
PeriodicSet interval_star(long lo, std::optional<long> hi);

// {0} ∪ S ∪ (S ⊕ S) ∪ … — the additive closure. Exact: every star element
// is a multiple of g = gcd(S), and above gcd-scaled min(S)·max(S) the
// closure holds every such multiple; the finite pattern below is computed
// directly.
PeriodicSet ps_star(const PeriodicSet& s);

bool ps_equal(const PeriodicSet& a, const PeriodicSet& b);

// Least common element, if any; scanning up to max(thresholds) + lcm(periods)
// is conclusive.
std::optional<long> ps_intersect_nonempty(const PeriodicSet& a, const PeriodicSet& b);

std::vector<long> elements_upto(const PeriodicSet& s, long bound);

std::string ps_to_string(const PeriodicSet& s);
std::string ps_to_json(const PeriodicSet& s);
PeriodicSet ps_from_json(const std::string& text);

}  // namespace opaq::arith
