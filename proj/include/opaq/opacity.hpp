#pragma once

// Execution-time opacity. An observer sees only the total run duration; a
// duration is opaque when both a private-visiting and a private-avoiding run
// produce it. Synthesis works on the polyhedral sets
//   d_eos  = PET_priv ∩ PET_pub                  (durations opaque at v)
//   diff   = (PET_priv ∪ PET_pub) ∖ d_eos        (leaking durations)
//   d_fos  = d_eos ∖ lift(proj_P(diff))          (valuations fully opaque)
// and their parameter projections eos/fos. Per-valuation checks run exactly
// on one-clock models through the zone-automaton route (constants are scaled
// to make integer analysis complete for dense time), with a polyhedral
// fallback for other models.

#include <opaq/geometry.hpp>
#include <opaq/model.hpp>
#include <opaq/pet.hpp>
#include <opaq/zonegraph.hpp>

#include <map>
#include <optional>
#include <string>

namespace opaq::opacity {

struct SynthesisResult {
  zonegraph::Status status = zonegraph::Status::Complete;
  geo::PolySet set;  // exact iff status is complete
};

// Over parameters + d:
SynthesisResult d_eos(const model::PTA& pta, const zonegraph::ExplorationBudget& budget = {});
SynthesisResult diff_set(const model::PTA& pta, const zonegraph::ExplorationBudget& budget = {});
SynthesisResult d_fos(const model::PTA& pta, const zonegraph::ExplorationBudget& budget = {});
// Over parameters:
SynthesisResult eos_synth(const model::PTA& pta, const zonegraph::ExplorationBudget& budget = {});
SynthesisResult fos_synth(const model::PTA& pta, const zonegraph::ExplorationBudget& budget = {});

enum class Mode { Exist, Full };
enum class Method { Auto, Zones, Semialg };

struct CheckResult {
  Mode mode = Mode::Exist;
  bool opaque = false;
  // A negative verdict from an exhausted exploration is inconclusive.
  bool conclusive = true;
  std::string method;                            // "zones" or "semialg"
  zonegraph::Status status = zonegraph::Status::Complete;
  std::optional<Rational> witness;               // an opaque duration
  std::optional<Rational> least_public_only;     // full-mode counterexamples
  std::optional<Rational> least_private_only;
};

CheckResult check_valuation(const model::PTA& pta,
                            const std::map<std::string, Rational>& v, Mode mode,
                            Method method = Method::Auto,
                            const zonegraph::ExplorationBudget& budget = {});

// Bounded existence checks over the integer grid [0, bound]^P (one-clock
// models): is some valuation existentially / fully opaque? The duration-set
// expressions are computed once and evaluated per grid point, optionally in
// parallel. A negative answer only covers the searched grid.
struct BoundedSearch {
  bool found = false;
  std::map<std::string, Rational> witness;  // least grid point, when found
  long bound = 0;
  zonegraph::Status status = zonegraph::Status::Complete;
};

BoundedSearch eoe_bounded(const model::PTA& pta, long bound, int jobs = 1,
                          const zonegraph::ExplorationBudget& budget = {});
BoundedSearch foe_bounded(const model::PTA& pta, long bound, int jobs = 1,
                          const zonegraph::ExplorationBudget& budget = {});

}  // namespace opaq::opacity
