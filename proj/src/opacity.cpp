#include <opaq/opacity.hpp>

#include <opaq/arith.hpp>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

namespace opaq::opacity {

namespace {

zonegraph::Status worst(zonegraph::Status a, zonegraph::Status b) {
  return (a == zonegraph::Status::Complete && b == zonegraph::Status::Complete)
             ? zonegraph::Status::Complete
             : zonegraph::Status::BudgetExhausted;
}

struct PetPair {
  pet::PetResult priv;
  pet::PetResult pub;
  zonegraph::Status status;
};

PetPair pet_pair(const model::PTA& pta, const zonegraph::ExplorationBudget& budget) {
  PetPair out{pet::pet_semialg(model::build_private_projection(pta), budget),
              pet::pet_semialg(model::build_public_projection(pta), budget),
              zonegraph::Status::Complete};
  out.status = worst(out.priv.status, out.pub.status);
  return out;
}

std::vector<std::string> param_vars(const model::PTA& pta) { return pta.params; }

}  // namespace

SynthesisResult d_eos(const model::PTA& pta, const zonegraph::ExplorationBudget& budget) {
  PetPair p = pet_pair(pta, budget);
  return SynthesisResult{p.status, geo::polyset_intersect(p.priv.set, p.pub.set)};
}

SynthesisResult diff_set(const model::PTA& pta, const zonegraph::ExplorationBudget& budget) {
  PetPair p = pet_pair(pta, budget);
  geo::PolySet all = geo::polyset_union(p.priv.set, p.pub.set);
  geo::PolySet common = geo::polyset_intersect(p.priv.set, p.pub.set);
  return SynthesisResult{p.status, geo::polyset_difference(all, common)};
}

SynthesisResult d_fos(const model::PTA& pta, const zonegraph::ExplorationBudget& budget) {
  PetPair p = pet_pair(pta, budget);
  geo::PolySet common = geo::polyset_intersect(p.priv.set, p.pub.set);
  geo::PolySet all = geo::polyset_union(p.priv.set, p.pub.set);
  geo::PolySet diff = geo::polyset_difference(all, common);
  geo::PolySet leaky_params = diff.project(param_vars(pta));
  geo::PolySet lifted = leaky_params.lift_to(common.vars());
  return SynthesisResult{p.status, geo::polyset_difference(common, lifted)};
}

SynthesisResult eos_synth(const model::PTA& pta, const zonegraph::ExplorationBudget& budget) {
  SynthesisResult r = d_eos(pta, budget);
  return SynthesisResult{r.status, r.set.project(param_vars(pta))};
}

SynthesisResult fos_synth(const model::PTA& pta, const zonegraph::ExplorationBudget& budget) {
  SynthesisResult r = d_fos(pta, budget);
  return SynthesisResult{r.status, r.set.project(param_vars(pta))};
}

// ---------------------------------------------------------------------------

namespace {

// Least common multiple of the denominators of every constant in the model
// (parameters must already be substituted away).
Integer denominator_lcm(const model::PTA& pta) {
  Integer l = 1;
  auto scan = [&](const model::Guard& g) {
    for (const auto& q : g) {
      mpz_class den = q.rhs.constant.get_den();
      mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), den.get_mpz_t());
      den = q.lhs_value.get_den();
      mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), den.get_mpz_t());
    }
  };
  for (const auto& l2 : pta.locations) scan(l2.invariant);
  for (const auto& e : pta.edges) scan(e.guard);
  return l;
}

model::PTA scale_constants(const model::PTA& pta, const Rational& s) {
  model::PTA out = pta;
  auto scale = [&](model::Guard& g) {
    for (auto& q : g) {
      q.lhs_value *= s;
      for (auto& [p, c] : q.rhs.coeffs) c *= s;
      q.rhs.constant *= s;
    }
  };
  for (auto& l : out.locations) scale(l.invariant);
  for (auto& e : out.edges) scale(e.guard);
  return out;
}

Rational halve_back(long n, const Rational& scale) { return Rational(n) / scale; }

}  // namespace

CheckResult check_valuation(const model::PTA& pta,
                            const std::map<std::string, Rational>& v, Mode mode,
                            Method method, const zonegraph::ExplorationBudget& budget) {
  CheckResult out;
  out.mode = mode;
  bool zones = method == Method::Zones ||
               (method == Method::Auto && pta.clocks.size() == 1);
  if (zones && pta.clocks.size() != 1)
    throw model::ModelError("the zones method needs a single clock");

  model::PTA sub = model::substitute(pta, v);

  if (zones) {
    // Make all constants even integers: scaling a timed system scales every
    // run duration by the same factor, and with even integer constants the
    // strict bounds shift onto the integer grid, so integer durations decide
    // dense-time questions exactly.
    Rational lcm(denominator_lcm(sub));
    Rational scale = 2 * lcm;
    model::PTA doubled = model::double_system(scale_constants(sub, lcm));

    pet::PetExpression priv = pet::pet_via_zones(model::build_private_projection(doubled), budget);
    pet::PetExpression pub = pet::pet_via_zones(model::build_public_projection(doubled), budget);
    out.method = "zones";
    out.status = worst(priv.status, pub.status);

    arith::PeriodicSet sp = pet::evaluate_at(priv.terms, {});
    arith::PeriodicSet su = pet::evaluate_at(pub.terms, {});

    if (mode == Mode::Exist) {
      auto w = arith::ps_intersect_nonempty(sp, su);
      out.opaque = w.has_value();
      if (w) out.witness = halve_back(*w, scale);
      out.conclusive = out.opaque || out.status == zonegraph::Status::Complete;
    } else {
      out.opaque = arith::ps_equal(sp, su);
      if (out.opaque) {
        if (auto w = arith::ps_intersect_nonempty(sp, su))
          out.witness = halve_back(*w, scale);
        out.conclusive = out.status == zonegraph::Status::Complete;
      } else {
        // Beyond both thresholds the membership patterns repeat with the
        // least common multiple of the periods, so a discrepancy must show
        // within this horizon.
        long horizon = std::max(sp.threshold, su.threshold) +
                       std::lcm(sp.period, su.period);
        for (long n = 0; n < horizon; ++n) {
          if (su.contains(n) && !sp.contains(n) && !out.least_public_only) {
            out.least_public_only = halve_back(n, scale);
          }
          if (sp.contains(n) && !su.contains(n) && !out.least_private_only) {
            out.least_private_only = halve_back(n, scale);
          }
        }
        // A found discrepancy is real even on a truncated exploration only
        // when the side claiming the duration was fully explored; with a
        // complete status it always is.
        out.conclusive = out.status == zonegraph::Status::Complete;
      }
    }
    return out;
  }

  // Polyhedral fallback: exact dense-time sets over {d}.
  pet::PetResult priv = pet::pet_semialg(model::build_private_projection(sub), budget);
  pet::PetResult pub = pet::pet_semialg(model::build_public_projection(sub), budget);
  out.method = "semialg";
  out.status = worst(priv.status, pub.status);

  auto pick_point = [](const geo::PolySet& s) -> std::optional<Rational> {
    if (s.is_empty()) return std::nullopt;
    const geo::Polyhedron& p = s.disjuncts().front();
    // Bounds of d within this disjunct.
    Rational lo = 0;
    bool lo_strict = false;
    std::optional<Rational> hi;
    for (const auto& r : p.rows()) {
      auto it = r.coeffs.find(model::kDurationParam);
      if (it == r.coeffs.end()) continue;
      Rational bound = r.constant / it->second;
      if (r.rel == geo::Rel::Eq) return bound;
      bool strict = (r.rel == geo::Rel::Lt);
      if (it->second > 0) {
        if (!hi || bound < *hi) hi = bound;
      } else if (bound > lo || (bound == lo && strict)) {
        lo = bound;
        lo_strict = strict;
      }
    }
    if (!lo_strict) return lo;
    // Strict lower bound: any point strictly between lo and the upper bound
    // lies in the disjunct (it is satisfiable, so the interval is nonempty).
    if (hi) return (lo + *hi) / 2;
    return lo + 1;
  };

  geo::PolySet common = geo::polyset_intersect(priv.set, pub.set);
  if (mode == Mode::Exist) {
    out.opaque = !common.is_empty();
    out.witness = pick_point(common);
    out.conclusive = out.opaque || out.status == zonegraph::Status::Complete;
  } else {
    geo::PolySet pub_only = geo::polyset_difference(pub.set, priv.set);
    geo::PolySet priv_only = geo::polyset_difference(priv.set, pub.set);
    out.opaque = pub_only.is_empty() && priv_only.is_empty();
    if (out.opaque)
      out.witness = pick_point(common);
    else {
      out.least_public_only = pick_point(pub_only);
      out.least_private_only = pick_point(priv_only);
    }
    out.conclusive = out.status == zonegraph::Status::Complete;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct GridSearch {
  bool full_mode;
  long bound;
  int jobs;

  BoundedSearch run(const model::PTA& pta, const zonegraph::ExplorationBudget& budget) const {
    model::PTA doubled = model::double_system(pta);
    pet::PetExpression priv =
        pet::pet_via_zones(model::build_private_projection(doubled), budget);
    pet::PetExpression pub =
        pet::pet_via_zones(model::build_public_projection(doubled), budget);

    BoundedSearch out;
    out.bound = bound;
    out.status = worst(priv.status, pub.status);

    const std::size_t k = pta.params.size();
    long total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= bound + 1;

    auto decode = [&](long idx) {
      std::map<std::string, Rational> v;
      for (std::size_t i = k; i-- > 0;) {
        v[pta.params[i]] = Rational(idx % (bound + 1));
        idx /= bound + 1;
      }
      return v;
    };

    auto matches = [&](const std::map<std::string, Rational>& v) {
      arith::PeriodicSet sp = pet::evaluate_at(priv.terms, v);
      arith::PeriodicSet su = pet::evaluate_at(pub.terms, v);
      if (full_mode) return !sp.is_empty() && arith::ps_equal(sp, su);
      return arith::ps_intersect_nonempty(sp, su).has_value();
    };

    int n_threads = std::max(1, jobs);
    std::atomic<long> best{total};
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      threads.emplace_back([&, t] {
        try {
          for (long idx = t; idx < total; idx += n_threads) {
            if (idx >= best.load()) break;  // a smaller witness exists
            if (matches(decode(idx))) {
              long cur = best.load();
              while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
              }
              break;
            }
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    if (best.load() < total) {
      out.found = true;
      out.witness = decode(best.load());
    }
    return out;
  }
};

}  // namespace

BoundedSearch eoe_bounded(const model::PTA& pta, long bound, int jobs,
                          const zonegraph::ExplorationBudget& budget) {
  return GridSearch{false, bound, jobs}.run(pta, budget);
}

BoundedSearch foe_bounded(const model::PTA& pta, long bound, int jobs,
                          const zonegraph::ExplorationBudget& budget) {
  return GridSearch{true, bound, jobs}.run(pta, budget);
}

}  // namespace opaq::opacity
