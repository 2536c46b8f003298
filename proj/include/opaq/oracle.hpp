#pragma once

// Discrete-time reference semantics: exhaustive breadth-first enumeration of
// runs with unit delays and integer clock values. Slow but straightforward by
// design — the symbolic engines are validated against it on models whose
// constants are integers (in particular models produced by
// model::double_system, where integer durations carry the full answer).

#include <opaq/model.hpp>

#include <set>
#include <string>
#include <vector>

namespace opaq::oracle {

struct Configuration {
  std::string location;
  std::map<std::string, long> clocks;
  long elapsed = 0;
  bool visited_private = false;

  auto operator<=>(const Configuration&) const = default;
};

// Durations (up to `horizon`) of runs reaching the final location, split by
// whether the run visited the private location. A model without a private
// location yields an empty private set. The model must be parameter-free
// (substitute first) and all guard/invariant constants must be integers.
struct DurationSets {
  std::set<long> private_durations;
  std::set<long> public_durations;
};

DurationSets enumerate_durations(const model::PTA& ta, long horizon);

// Classification of every duration in [0, horizon].
struct ConcreteOpacity {
  long horizon = 0;
  std::set<long> both;          // reached by a private and by a public run
  std::set<long> private_only;  // leaks: observer knows the secret was visited
  std::set<long> public_only;   // leaks: observer knows it was not
  bool exist_opaque = false;    // some duration is in `both`
  bool fully_opaque = false;    // the two duration sets are equal
};

ConcreteOpacity check_opacity_concrete(const model::PTA& ta, long horizon);

// One line per duration 0..horizon: "duration,visibility-class" with class in
// {both, private-only, public-only, none}; header row included.
std::string to_csv(const ConcreteOpacity& table);

}  // namespace opaq::oracle
