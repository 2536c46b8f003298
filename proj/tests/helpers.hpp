#pragma once

// Shared test utilities: model loading, deterministic random generators for
// geometry and periodic-set instances, and dense grid enumeration.

#include <opaq/geometry.hpp>
#include <opaq/model.hpp>
#include <opaq/periodic.hpp>
#include <opaq/rational.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

namespace geo = opaq::geo;
using opaq::Rational;

inline std::string model_path(const std::string& name) {
  return std::string(OPAQ_MODELS_DIR) + "/" + name;
}

inline opaq::model::PTA load_model(const std::string& name) {
  std::ifstream in(model_path(name));
  if (!in) throw std::runtime_error("missing model file: " + model_path(name));
  std::ostringstream ss;
  ss << in.rdbuf();
  return opaq::model::parse_model(ss.str());
}

// The hand-written corpus used by the cross-validation suites.
inline const std::vector<std::string>& corpus() {
  static const std::vector<std::string> names = {
      "c01_branch.pta",     "c02_loop_private.pta", "c03_urgent.pta",
      "c04_reset_private.pta", "c05_noparams.pta",  "c06_symmetric.pta",
      "c07_disjoint.pta",   "c08_strict.pta",       "c09_twoloops.pta",
      "c10_priv_chain.pta", "c11_unit_loop.pta",    "c12_deadend.pta"};
  return names;
}

// ---------------------------------------------------------------------------
// Random geometry instances. Small integer coefficients and constants keep
// Fourier-Motzkin outputs tame while still hitting plenty of degenerate
// configurations (empty sets, single points, unbounded cones).

inline geo::Row random_row(std::mt19937& rng,
                           const std::vector<std::string>& vars) {
  std::uniform_int_distribution<int> coeff(-2, 2);
  std::uniform_int_distribution<int> constant(-2, 6);
  std::uniform_int_distribution<int> rel(0, 9);
  geo::Row row;
  bool nonzero = false;
  for (const auto& v : vars) {
    int c = coeff(rng);
    if (c != 0) {
      row.coeffs[v] = c;
      nonzero = true;
    }
  }
  if (!nonzero) row.coeffs[vars[rng() % vars.size()]] = 1;
  row.constant = constant(rng);
  int r = rel(rng);
  row.rel = r == 0 ? geo::Rel::Eq : (r <= 3 ? geo::Rel::Lt : geo::Rel::Le);
  return row;
}

inline geo::Polyhedron random_poly(std::mt19937& rng,
                                   const std::vector<std::string>& vars,
                                   int max_rows = 4) {
  std::uniform_int_distribution<int> count(0, max_rows);
  std::vector<geo::Row> rows;
  int n = count(rng);
  for (int i = 0; i < n; ++i) rows.push_back(random_row(rng, vars));
  return geo::Polyhedron::from_rows(vars, std::move(rows));
}

inline geo::PolySet random_polyset(std::mt19937& rng,
                                   const std::vector<std::string>& vars,
                                   int max_disjuncts = 3) {
  std::uniform_int_distribution<int> count(0, max_disjuncts);
  std::vector<geo::Polyhedron> ds;
  int n = count(rng);
  for (int i = 0; i < n; ++i) ds.push_back(random_poly(rng, vars));
  return geo::PolySet::from_disjuncts(vars, std::move(ds));
}

// All points of {0, 1/2, 1, ..., hi}^vars, passed to f as valuation maps.
inline void for_grid(const std::vector<std::string>& vars, long hi,
                     const std::function<void(const std::map<std::string, Rational>&)>& f) {
  long steps = 2 * hi + 1;
  std::vector<long> idx(vars.size(), 0);
  while (true) {
    std::map<std::string, Rational> point;
    for (std::size_t i = 0; i < vars.size(); ++i)
      point[vars[i]] = opaq::rat(idx[i], 2);
    f(point);
    std::size_t k = 0;
    while (k < vars.size() && ++idx[k] == steps) idx[k++] = 0;
    if (k == vars.size()) break;
  }
}

// All integer points of [0, hi]^names.
inline void for_integer_grid(
    const std::vector<std::string>& names, long hi,
    const std::function<void(const std::map<std::string, Rational>&)>& f) {
  std::vector<long> idx(names.size(), 0);
  while (true) {
    std::map<std::string, Rational> point;
    for (std::size_t i = 0; i < names.size(); ++i) point[names[i]] = idx[i];
    f(point);
    std::size_t k = 0;
    while (k < names.size() && ++idx[k] > hi) idx[k++] = 0;
    if (k == names.size()) break;
  }
}

// ---------------------------------------------------------------------------
// Random periodic sets, canonical by construction.

inline opaq::arith::PeriodicSet random_periodic(std::mt19937& rng) {
  std::uniform_int_distribution<long> thr(0, 12);
  std::uniform_int_distribution<long> per(1, 6);
  std::uniform_int_distribution<int> pick(0, 2);
  long threshold = thr(rng);
  long period = per(rng);
  std::set<long> prefix;
  for (long n = 0; n < threshold; ++n)
    if (pick(rng) == 0) prefix.insert(n);
  std::set<long> residues;
  for (long r = 0; r < period; ++r)
    if (pick(rng) == 0) residues.insert(r);
  return opaq::arith::PeriodicSet::make(prefix, threshold, period, residues);
}

}  // namespace testutil
