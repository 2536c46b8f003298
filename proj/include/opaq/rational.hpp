#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace opaq {

/// Exact rational arithmetic. All geometry and set computations are exact;
/// no floating point is used anywhere in the library.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rat(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Canonical textual form: "n" for integers, "n/d" otherwise (GMP canonical form).
inline std::string rat_to_string(const Rational& r) { return r.get_str(); }

/// Parses "n" or "n/d" (optionally signed). Returns nullopt on malformed input
/// or a zero denominator.
inline std::optional<Rational> rat_from_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  // mpq_class accepts whitespace and some surprising forms; pre-validate.
  std::size_t i = 0;
  auto digits = [&](std::size_t& pos) {
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    return pos > start;
  };
  if (s[i] == '-' || s[i] == '+') ++i;
  if (!digits(i)) return std::nullopt;
  if (i < s.size()) {
    if (s[i] != '/') return std::nullopt;
    ++i;
    if (s[i] == '-' || s[i] == '+') ++i;
    if (!digits(i) || i != s.size()) return std::nullopt;
  }
  Rational r;
  if (r.set_str(s, 10) != 0) return std::nullopt;
  if (r.get_den() == 0) return std::nullopt;
  r.canonicalize();
  return r;
}

/// Largest integer <= r.
inline Integer rat_floor(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  return q;
}

/// Smallest integer >= r.
inline Integer rat_ceil(const Rational& r) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  return q;
}

inline bool rat_is_integer(const Rational& r) { return r.get_den() == 1; }

/// Converts to a machine integer, throwing if out of range.
inline long rat_to_long(const Rational& r) {
  if (!rat_is_integer(r)) throw std::invalid_argument("not an integer: " + r.get_str());
  if (!r.get_num().fits_slong_p())
    throw std::overflow_error("integer out of range: " + r.get_str());
  return r.get_num().get_si();
}

}  // namespace opaq
