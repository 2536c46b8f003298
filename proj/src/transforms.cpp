#include <opaq/model.hpp>

#include <algorithm>
#include <set>

namespace opaq::model {

namespace {

std::string fresh_name(std::string base, const std::set<std::string>& taken) {
  while (taken.count(base)) base += "_";
  return base;
}

void check_reserved_free(const PTA& pta, const std::string& name) {
  if (pta.is_clock(name) || pta.is_param(name) || pta.has_location(name))
    throw ModelError("model already uses the reserved name '" + name + "'");
}

Ineq clock_equals_param(const std::string& clock, const std::string& param) {
  Ineq q;
  q.lhs_kind = AtomKind::Clock;
  q.lhs_name = clock;
  q.rel = Rel::Eq;
  q.rhs.coeffs[param] = 1;
  return q;
}

}  // namespace

PTA build_pet_target(const PTA& pta) {
  check_reserved_free(pta, kAbsClock);
  check_reserved_free(pta, kDurationParam);
  PTA out = pta;
  out.clocks.push_back(kAbsClock);
  out.params.push_back(kDurationParam);
  const std::string final_name = out.final().name;
  std::vector<Edge> edges;
  edges.reserve(out.edges.size());
  for (auto& e : out.edges) {
    if (e.source == final_name) continue;  // runs stop at the first arrival
    if (e.target == final_name)
      e.guard.push_back(clock_equals_param(kAbsClock, kDurationParam));
    edges.push_back(std::move(e));
  }
  out.edges = std::move(edges);
  out.location(final_name).is_urgent = true;
  return out;
}

PTA build_private_projection(const PTA& pta) {
  const Location* priv = pta.private_location();
  if (priv == nullptr)
    throw ModelError("private projection needs a private location");
  const std::string priv_name = priv->name;
  const std::string final_name = pta.final().name;

  auto copy_name = [](const std::string& base, bool tracked) {
    // Suffixes of equal length cannot collide across distinct base names.
    return base + (tracked ? "_bt" : "_bf");
  };

  PTA out;
  out.name = pta.name + "_priv";
  out.params = pta.params;
  out.clocks = pta.clocks;
  for (const auto& l : pta.locations) {
    for (bool tracked : {false, true}) {
      Location c = l;
      c.name = copy_name(l.name, tracked);
      // The private role is absorbed by the tracking bit; roles on the copies
      // are: the initial location starts tracked exactly when it is itself the
      // private location, and only the tracked copy of the final location is
      // final.
      c.is_private = false;
      c.is_init = l.is_init && (tracked == l.is_private);
      c.is_final = l.is_final && tracked;
      out.locations.push_back(std::move(c));
    }
  }
  for (const auto& e : pta.edges) {
    for (bool tracked : {false, true}) {
      // Entering the final location demands the bit to be set already, and
      // entering the private location sets it.
      if (e.target == final_name && !tracked) continue;
      // The untracked copy of the final location is not a final role, but a
      // run passing through it would still have visited the final location;
      // first-visit semantics require pruning its outgoing edges too.
      if (e.source == final_name && !tracked) continue;
      bool target_tracked = (e.target == priv_name) ? true : tracked;
      Edge c = e;
      c.source = copy_name(e.source, tracked);
      c.target = copy_name(e.target, target_tracked);
      out.edges.push_back(std::move(c));
    }
  }
  return out;
}

PTA build_public_projection(const PTA& pta) {
  PTA out = pta;
  out.name = pta.name + "_pub";
  const Location* priv = pta.private_location();
  if (priv == nullptr) return out;
  const std::string priv_name = priv->name;

  std::vector<Edge> edges;
  for (auto& e : out.edges)
    if (e.source != priv_name && e.target != priv_name) edges.push_back(std::move(e));
  out.edges = std::move(edges);

  bool keep_bare = priv->is_init || priv->is_final;
  std::vector<Location> locations;
  for (auto& l : out.locations) {
    if (l.name == priv_name) {
      if (!keep_bare) continue;
      // Removing an initial or final location would leave the model without
      // that role; keep it as a disconnected location with the private role
      // cleared, so no run can make a private visit.
      l.is_private = false;
    }
    locations.push_back(std::move(l));
  }
  out.locations = std::move(locations);
  return out;
}

std::vector<std::pair<std::string, std::string>> compute_frp(const PTA& pta) {
  if (pta.clocks.size() != 1)
    throw ModelError("final-reset pairs are defined for single-clock models only");
  const std::string init_name = pta.initial().name;
  const std::string final_name = pta.final().name;
  auto reset_into = [&](const std::string& l) {
    return std::any_of(pta.edges.begin(), pta.edges.end(), [&](const Edge& e) {
      return e.target == l && !e.resets.empty();
    });
  };
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& li : pta.locations) {
    bool i_ok = li.name == init_name ||
                (li.name != final_name && reset_into(li.name));
    if (!i_ok) continue;
    for (const auto& lj : pta.locations) {
      bool j_ok = lj.name == final_name || reset_into(lj.name);
      if (j_ok) pairs.emplace_back(li.name, lj.name);
    }
  }
  return pairs;
}

PTA build_resetfree(const PTA& pta, const std::string& li, const std::string& lj) {
  if (pta.clocks.size() != 1)
    throw ModelError("reset-free fragments are defined for single-clock models only");
  auto frp = compute_frp(pta);
  if (std::find(frp.begin(), frp.end(), std::make_pair(li, lj)) == frp.end())
    throw ModelError("(" + li + ", " + lj + ") is not a final-reset pair");
  check_reserved_free(pta, kDurationParam);

  PTA out = pta;
  out.name = pta.name + "_frag_" + li + "_" + lj;
  const std::string clock = out.clocks[0];
  const std::string final_name = out.final().name;

  std::set<std::string> taken;
  for (const auto& l : out.locations) taken.insert(l.name);
  const std::string dup = fresh_name(lj + "_dup", taken);

  // 1. Duplicate lj (invariant and urgency inherited; plumbing only, so no
  // roles).
  {
    Location d = out.location(lj);
    d.name = dup;
    d.is_init = false;
    d.is_final = false;
    d.is_private = false;
    out.locations.push_back(std::move(d));
  }
  // 2. Reset-free incoming edges of lj enter the duplicate instead.
  for (auto& e : out.edges)
    if (e.target == lj && e.resets.empty()) e.target = dup;
  // 3. If lj is not final, its outgoing edges leave from the duplicate; else
  // the duplicate becomes urgent and falls through to lj immediately.
  if (lj != final_name) {
    for (auto& e : out.edges)
      if (e.source == lj) e.source = dup;
  } else {
    out.location(dup).is_urgent = true;
    Edge eps;
    eps.source = dup;
    eps.target = lj;
    out.edges.push_back(std::move(eps));
  }
  // 4. Drop upper-bound invariant conjuncts on lj and make it urgent. An
  // equality pins both bounds; its lower half is kept.
  {
    Location& tgt = out.location(lj);
    Guard kept;
    for (auto& q : tgt.invariant) {
      if (q.lhs_kind == AtomKind::Clock && (q.rel == Rel::Lt || q.rel == Rel::Le))
        continue;
      if (q.lhs_kind == AtomKind::Clock && q.rel == Rel::Eq) {
        q.rel = Rel::Ge;
      }
      kept.push_back(std::move(q));
    }
    tgt.invariant = std::move(kept);
    tgt.is_urgent = true;
  }
  // 5. Initial location.
  for (auto& l : out.locations) l.is_init = false;
  out.location(li == lj ? dup : li).is_init = true;
  // 6. Strip resets on edges into lj; prune all other resetting edges and
  // everything leaving the final location.
  {
    std::vector<Edge> edges;
    for (auto& e : out.edges) {
      if (e.source == final_name) continue;
      if (e.target == lj) {
        e.resets.clear();
        edges.push_back(std::move(e));
      } else if (e.resets.empty()) {
        edges.push_back(std::move(e));
      }
    }
    out.edges = std::move(edges);
  }
  // 7. Duration parameter and measurement guard on entry of lj.
  out.params.push_back(kDurationParam);
  for (auto& e : out.edges)
    if (e.target == lj) e.guard.push_back(clock_equals_param(clock, kDurationParam));
  return out;
}

PTA double_system(const PTA& pta) {
  PTA out = pta;
  out.name = pta.name + "_x2";
  auto double_guard = [](Guard& g) {
    for (auto& q : g) {
      if (q.lhs_kind == AtomKind::Int) q.lhs_value *= 2;
      for (auto& [p, c] : q.rhs.coeffs) c *= 2;
      q.rhs.constant *= 2;
      // With every constant even, strict integer comparisons shift one unit
      // inward and become non-strict.
      if (q.rel == Rel::Lt) {
        q.rhs.constant -= 1;
        q.rel = Rel::Le;
      } else if (q.rel == Rel::Gt) {
        q.rhs.constant += 1;
        q.rel = Rel::Ge;
      }
    }
  };
  for (auto& l : out.locations) double_guard(l.invariant);
  for (auto& e : out.edges) double_guard(e.guard);
  return out;
}

namespace {

PTA rename_clocks_suffix(const PTA& pta, const std::string& suffix) {
  PTA out = pta;
  std::map<std::string, std::string> renaming;
  for (auto& c : out.clocks) {
    renaming[c] = c + suffix;
    c += suffix;
  }
  auto fix_guard = [&](Guard& g) {
    for (auto& q : g)
      if (q.lhs_kind == AtomKind::Clock) q.lhs_name = renaming.at(q.lhs_name);
  };
  for (auto& l : out.locations) fix_guard(l.invariant);
  for (auto& e : out.edges) {
    fix_guard(e.guard);
    for (auto& r : e.resets) r = renaming.at(r);
  }
  return out;
}

}  // namespace

PTA build_self_composition(const PTA& pta) {
  if (pta.params.size() > 1)
    throw ModelError("self-composition needs at most one parameter");
  PTA a = rename_clocks_suffix(build_private_projection(pta), "_1");
  PTA b = rename_clocks_suffix(build_public_projection(pta), "_2");
  const std::string fa = a.final().name;
  const std::string fb = b.final().name;

  PTA out;
  out.name = pta.name + "_sq";
  out.params = pta.params;
  out.clocks = a.clocks;
  out.clocks.insert(out.clocks.end(), b.clocks.begin(), b.clocks.end());

  std::set<std::string> taken;
  std::map<std::pair<std::string, std::string>, std::string> prod_name;
  for (const auto& la : a.locations) {
    for (const auto& lb : b.locations) {
      std::string name = fresh_name(la.name + "__" + lb.name, taken);
      taken.insert(name);
      prod_name[{la.name, lb.name}] = name;
      Location l;
      l.name = name;
      l.is_init = la.is_init && lb.is_init;
      l.is_final = la.is_final && lb.is_final;
      l.is_urgent = la.is_urgent || lb.is_urgent;
      l.invariant = la.invariant;
      l.invariant.insert(l.invariant.end(), lb.invariant.begin(), lb.invariant.end());
      out.locations.push_back(std::move(l));
    }
  }
  const std::string prod_final = prod_name.at({fa, fb});

  // Interleaved moves; entry into a final component happens only through the
  // synchronized edges below, and nothing leaves the product final location.
  for (const auto& ea : a.edges) {
    if (ea.target == fa) continue;
    for (const auto& lb : b.locations) {
      Edge e = ea;
      e.source = prod_name.at({ea.source, lb.name});
      e.target = prod_name.at({ea.target, lb.name});
      if (e.source == prod_final) continue;
      out.edges.push_back(std::move(e));
    }
  }
  for (const auto& eb : b.edges) {
    if (eb.target == fb) continue;
    for (const auto& la : a.locations) {
      Edge e = eb;
      e.source = prod_name.at({la.name, eb.source});
      e.target = prod_name.at({la.name, eb.target});
      if (e.source == prod_final) continue;
      out.edges.push_back(std::move(e));
    }
  }
  for (const auto& ea : a.edges) {
    if (ea.target != fa) continue;
    for (const auto& eb : b.edges) {
      if (eb.target != fb) continue;
      Edge e;
      e.source = prod_name.at({ea.source, eb.source});
      e.target = prod_final;
      if (e.source == prod_final) continue;
      e.guard = ea.guard;
      e.guard.insert(e.guard.end(), eb.guard.begin(), eb.guard.end());
      e.action = "sync";
      e.resets = ea.resets;
      e.resets.insert(e.resets.end(), eb.resets.begin(), eb.resets.end());
      out.edges.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace opaq::model
