#pragma once

#include <optional>
#include <string>
#include <vector>

#include "finmart/market.hpp"
#include "finmart/noarb.hpp"
#include "finmart/prob.hpp"
#include "finmart/rational.hpp"

namespace finmart {

// A piece of outside information: a value grid over time and states that
// becomes observable at reveal_time. From then on the observer knows the
// row for every elapsed time >= reveal_time.
struct Signal {
  std::string name;
  std::vector<std::vector<Rat>> values;  // [t][state]
  int reveal_time = 0;
};

// Refines `base` with the level sets of every revealed signal row. The result
// is a filtration again (revealed rows only accumulate over time).
Filtration enlarge(const Filtration& base, const std::vector<Signal>& signals);

// Whether the ambient information is worthless for predicting price events:
// conditioning a terminal price event on everything known at t gives the same
// probability as conditioning on prices alone.
struct ProjectionWitness {
  int t = 0;
  int terminal_block = 0;   // terminal block of the price evolution
  int evolution_block = 0;  // block of the evolution at t the projection splits
};

struct SensitivityReport {
  bool sensitive = false;
  // Route one: conditional probabilities of terminal price events match
  // between the ambient and the evolution blocks at every time.
  ImmersionReport conditional_route;
  // Route two: projecting each terminal price indicator onto the ambient
  // information at t stays measurable for the evolution at t.
  bool projection_route = false;
  std::optional<ProjectionWitness> projection_witness;
  // Necessary identity: evolution at t equals the common refinement of the
  // ambient at t and the terminal price events.
  bool level_identity = false;
  std::optional<int> level_identity_failure_t;
};

SensitivityReport sensitivity_report(const Market& m, const Rat& tol = Rat(0));

// A market is efficient when prices already carry every piece of ambient
// information that matters (sensitivity) and the ambient information admits
// an equivalent martingale measure.
struct EfficiencyReport {
  bool sensitive = false;
  EmmClass ambient_class = EmmClass::Empty;
  bool ambient_boundary_only = false;
  bool ambient_emm_exists = false;
  EmmClass evolution_class = EmmClass::Empty;
  bool efficient = false;  // sensitive && ambient_emm_exists
  SensitivityReport sensitivity;
};

EfficiencyReport efficiency_check(const Market& m, const Rat& tol = Rat(0));

// Transport of pricing densities between the two information levels.
// Downward always holds: an ambient pricing density keeps pricing correctly
// when conditioning only on prices. Upward — reusing the evolution's pricing
// density under the full ambient information — holds exactly in sensitive
// markets and is the computable fingerprint of hidden information.
struct SdfCell {
  int asset = 0;
  int t = 0;
  int T = 0;
  int block = 0;  // block of the conditioning partition at t
  Rat lhs;        // current price
  Rat rhs;        // deflated conditional expectation of the time-T price
};

struct SdfReport {
  bool downward_checked = false;
  bool downward_ok = true;
  bool upward_checked = false;
  bool upward_ok = true;
  std::optional<SdfCell> upward_witness;
  bool sensitive = false;
  bool upward_matches_sensitivity = true;
};

SdfReport sdf_compatibility(const Market& m, const Rat& tol = Rat(0));

}  // namespace finmart
