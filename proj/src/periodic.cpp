#include <opaq/periodic.hpp>

#include <json.hpp>

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace opaq::arith {

namespace {

long lcm_periods(long a, long b) { return std::lcm(a, b); }

}  // namespace

bool PeriodicSet::contains(long n) const {
  if (n < 0) return false;
  if (n < threshold) return prefix.count(n) != 0;
  return residues.count(n % period) != 0;
}

bool PeriodicSet::is_empty() const { return prefix.empty() && residues.empty(); }

bool PeriodicSet::is_finite() const { return residues.empty(); }

PeriodicSet PeriodicSet::make(std::set<long> prefix, long threshold, long period,
                              std::set<long> residues) {
  if (period < 1) throw std::invalid_argument("period must be positive");
  for (long r : residues)
    if (r < 0 || r >= period) throw std::invalid_argument("residue out of range");
  PeriodicSet s;
  s.period = period;
  s.residues = std::move(residues);

  // Absorb explicit elements at or above the threshold by raising it.
  long t = std::max(threshold, 0L);
  for (long e : prefix) {
    if (e < 0) throw std::invalid_argument("negative element");
    if (e >= t) t = e + 1;
  }
  for (long n = std::max(threshold, 0L); n < t; ++n)
    if (s.residues.count(n % s.period)) prefix.insert(n);
  s.threshold = t;
  s.prefix = std::move(prefix);

  if (s.residues.empty()) s.period = 1;

  // Minimize the period: the smallest divisor whose residue classes are
  // closed under the current ones.
  for (long q = 1; q < s.period; ++q) {
    if (s.period % q != 0) continue;
    bool closed = true;
    for (long r = 0; r < s.period && closed; ++r) {
      bool in_full = s.residues.count(r) != 0;
      bool in_q = false;
      for (long rr : s.residues)
        if (rr % q == r % q) { in_q = true; break; }
      if (in_full != in_q) closed = false;
    }
    if (closed) {
      std::set<long> reduced;
      for (long r : s.residues) reduced.insert(r % q);
      s.period = q;
      s.residues = std::move(reduced);
      break;
    }
  }

  // Minimize the threshold: peel off positions the tail already describes.
  while (s.threshold > 0) {
    long n = s.threshold - 1;
    bool tail_says = s.residues.count(n % s.period) != 0;
    bool actual = s.prefix.count(n) != 0;
    if (tail_says != actual) break;
    s.prefix.erase(n);
    s.threshold = n;
  }
  return s;
}

PeriodicSet PeriodicSet::empty_set() { return PeriodicSet{}; }

PeriodicSet PeriodicSet::from_elements(const std::set<long>& elements) {
  return make(elements, 0, 1, {});
}

PeriodicSet PeriodicSet::from_lower_bound(long threshold) {
  if (threshold < 0) threshold = 0;
  return make({}, threshold, 1, {0});
}

PeriodicSet ps_union(const PeriodicSet& a, const PeriodicSet& b) {
  long t = std::max(a.threshold, b.threshold);
  long l = lcm_periods(a.period, b.period);
  std::set<long> prefix;
  for (long n = 0; n < t; ++n)
    if (a.contains(n) || b.contains(n)) prefix.insert(n);
  std::set<long> residues;
  for (long n = t; n < t + l; ++n)
    if (a.contains(n) || b.contains(n)) residues.insert(n % l);
  return PeriodicSet::make(std::move(prefix), t, l, std::move(residues));
}

PeriodicSet ps_sum(const PeriodicSet& a, const PeriodicSet& b) {
  if (a.is_empty() || b.is_empty()) return PeriodicSet::empty_set();

  if (a.is_finite() && b.is_finite()) {
    std::set<long> sums;
    for (long x : a.prefix)
      for (long y : b.prefix) sums.insert(x + y);
    return PeriodicSet::from_elements(sums);
  }

  // Beyond bound every family of sums (prefix+tail, tail+prefix, tail+tail)
  // has stabilized: the tail+tail part fills whole gcd-classes by then, and
  // the mixed parts are periodic in each tail's own period.
  long bound = a.threshold + a.period + b.threshold + b.period +
               a.period * b.period + 1;
  long l = lcm_periods(a.period, b.period);

  std::vector<long> a_elems = elements_upto(a, bound + l);
  std::set<long> prefix;
  std::set<long> residues;
  for (long n = 0; n < bound + l; ++n) {
    bool member = false;
    for (long x : a_elems) {
      if (x > n) break;
      if (b.contains(n - x)) { member = true; break; }
    }
    if (!member) continue;
    if (n < bound)
      prefix.insert(n);
    else
      residues.insert(n % l);
  }
  return PeriodicSet::make(std::move(prefix), bound, l, std::move(residues));
}

PeriodicSet interval_star(long lo, std::optional<long> hi) {
  if (lo < 0) lo = 0;
  if (hi && *hi < lo) return PeriodicSet::from_elements({0});  // empty interval
  if (!hi) {
    // {0} ∪ [lo, ∞)
    if (lo == 0) return PeriodicSet::from_lower_bound(0);
    return ps_union(PeriodicSet::from_elements({0}),
                    PeriodicSet::from_lower_bound(lo));
  }
  long b = lo, c = *hi;
  if (c == 0) return PeriodicSet::from_elements({0});
  if (b == 0) return PeriodicSet::from_lower_bound(0);  // [0,c] generates ℕ
  if (b == c) return PeriodicSet::make({}, 0, b, {0});  // multiples of b
  // Bands [k·b, k·c] stay contiguous from k(c-b) >= b-1 onward.
  long kstar = std::max(1L, (b - 1 + (c - b) - 1) / (c - b));  // ceil((b-1)/(c-b))
  std::set<long> prefix{0};
  for (long k = 1; k < kstar; ++k)
    for (long n = k * b; n <= k * c; ++n) prefix.insert(n);
  PeriodicSet bands = PeriodicSet::from_elements(prefix);
  return ps_union(bands, PeriodicSet::from_lower_bound(kstar * b));
}

PeriodicSet ps_star(const PeriodicSet& s) {
  PeriodicSet zero = PeriodicSet::from_elements({0});
  if (s.is_empty()) return zero;

  // Every element reduces, by repeatedly subtracting the period, to an
  // element below threshold + 2·period, so that slice already realizes the
  // gcd of the whole set.
  std::vector<long> gens;
  for (long e : elements_upto(s, s.threshold + 2 * s.period))
    if (e > 0) gens.push_back(e);
  if (gens.empty()) return zero;  // S = {0}

  long g = 0;
  for (long e : gens) g = std::gcd(g, e);

  // In the domain scaled down by g the generators have gcd 1, so sums of
  // fewer than lo of them (each at most hi) reach every residue class
  // modulo lo; from lo·hi on, every scaled value is a sum. Below that cover
  // the membership pattern comes from dynamic programming.
  long lo = gens.front() / g;
  long hi = gens.back() / g;
  long cover = lo * hi;
  std::vector<char> reach(cover + 1, 0);
  reach[0] = 1;
  for (long n = 1; n <= cover; ++n)
    for (long m = 1; m <= n; ++m)
      if (reach[n - m] != 0 && s.contains(m * g)) {
        reach[n] = 1;
        break;
      }
  std::set<long> prefix;
  for (long n = 0; n <= cover; ++n)
    if (reach[n] != 0) prefix.insert(n * g);
  return ps_union(PeriodicSet::from_elements(prefix),
                  PeriodicSet::make({}, cover * g, g, {0}));
}

bool ps_equal(const PeriodicSet& a, const PeriodicSet& b) {
  long t = std::max(a.threshold, b.threshold);
  long l = lcm_periods(a.period, b.period);
  for (long n = 0; n < t + l; ++n)
    if (a.contains(n) != b.contains(n)) return false;
  return true;
}

std::optional<long> ps_intersect_nonempty(const PeriodicSet& a, const PeriodicSet& b) {
  long t = std::max(a.threshold, b.threshold);
  long l = lcm_periods(a.period, b.period);
  for (long n = 0; n < t + l; ++n)
    if (a.contains(n) && b.contains(n)) return n;
  return std::nullopt;
}

std::vector<long> elements_upto(const PeriodicSet& s, long bound) {
  std::vector<long> out;
  for (long n = 0; n <= bound; ++n)
    if (s.contains(n)) out.push_back(n);
  return out;
}

std::string ps_to_string(const PeriodicSet& s) {
  if (s.is_empty()) return "{}";
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (long e : s.prefix) {
    if (!first) os << ',';
    os << e;
    first = false;
  }
  os << '}';
  if (!s.residues.empty()) {
    os << " u {n >= " << s.threshold << " : n mod " << s.period << " in {";
    first = true;
    for (long r : s.residues) {
      if (!first) os << ',';
      os << r;
      first = false;
    }
    os << "}}";
  }
  return os.str();
}

std::string ps_to_json(const PeriodicSet& s) {
  nlohmann::json j;
  j["prefix"] = s.prefix;
  j["threshold"] = s.threshold;
  j["period"] = s.period;
  j["residues"] = s.residues;
  return j.dump();
}

PeriodicSet ps_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::set<long> prefix(j.at("prefix").begin(), j.at("prefix").end());
  std::set<long> residues(j.at("residues").begin(), j.at("residues").end());
  return PeriodicSet::make(std::move(prefix), j.at("threshold").get<long>(),
                           j.at("period").get<long>(), std::move(residues));
}

}  // namespace opaq::arith
