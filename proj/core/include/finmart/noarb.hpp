#pragma once

#include <optional>
#include <string>
#include <vector>

#include "finmart/market.hpp"
#include "finmart/prob.hpp"
#include "finmart/rational.hpp"

namespace finmart {

// Probability measure on the atoms of a market's state space.
struct Measure {
  std::vector<Rat> weights;

  bool equivalent() const {
    for (const Rat& w : weights)
      if (sgn(w) <= 0) return false;
    return true;
  }
};

void require_measure(const Measure& q, int n_states);

// Density process of a measure with respect to a filtration, normalized to 1
// on every time-0 block; the applied per-block scales are recorded.
struct Rnp {
  AdaptedProcess levels;          // [t][state]
  std::vector<Rat> terminal;      // final row, kept for direct access
  std::vector<Rat> block_scale;   // per time-0 block: density mass before normalization
};

enum class NodeStatus { Infeasible, BoundaryOnly, Unique, Multiple };
const char* to_string(NodeStatus s);

// One-step transition system at a node (= block at time t): weights over the
// node's children that reprice every asset.
struct NodeSystem {
  int t = 0;
  int block = 0;
  std::vector<int> children;                 // block ids at t+1
  NodeStatus status = NodeStatus::Infeasible;
  Rat maxmin;                                // optimum of the min-weight program
  std::vector<Rat> representative;           // per child; strictly positive unless BoundaryOnly
  std::vector<std::vector<Rat>> vertices;    // of the solution polytope
  int dim = 0;                               // affine dimension of the solution set
};

enum class EmmClass { Empty, Unique, Multiple };
const char* to_string(EmmClass c);

struct EmmSet {
  std::vector<NodeSystem> nodes;
  EmmClass classification = EmmClass::Empty;
  // True when every node admits nonnegative weights but some node admits no
  // strictly positive ones: absolutely continuous pricing measures only.
  bool boundary_only = false;
  std::optional<std::pair<int, int>> failing_node;  // (t, block)
  std::optional<Measure> representative;            // equivalent; per-node averages
  int initial_blocks = 1;  // >1 leaves the time-0 block weights unconstrained
};

// Per-node one-step pricing systems for the given filtration (at least as
// fine as the market's price filtration). Strict positivity per node is
// decided by maximizing the minimum weight over the solution polytope.
EmmSet find_emms(const Market& m, const Filtration& f);
EmmSet find_emms(const Market& m);  // ambient filtration

// Self-financing predictable strategy with zero initial value, nonnegative
// final value in every state, and positive expected final value (scaled so
// the expectation is at least 1). nullopt when none exists.
std::optional<Strategy> find_arbitrage(const Market& m, const Filtration& f);
std::optional<Strategy> find_arbitrage(const Market& m);

// Strategy whose gains weakly dominate the buy-and-hold gains of the given
// asset in every state and strictly in expectation. nullopt when the asset is
// undominated.
std::optional<Strategy> find_dominating(const Market& m, int asset, const Filtration& f);
std::optional<Strategy> find_dominating(const Market& m, int asset);

Rnp rnp_from_measure(const Measure& q, const Filtration& f, const FiniteProbSpace& space);
Measure measure_from_rnp(const Rnp& rnp, const FiniteProbSpace& space);

// E_Q(x | f at t) computed twice: directly under Q, and under P against the
// density ratio. Both routes must agree exactly; returns the common value.
std::vector<Rat> bayes_conditional(const std::vector<Rat>& x, const Measure& q, int t,
                                   const Filtration& f, const FiniteProbSpace& space);

struct DeflatorAssetCheck {
  int asset = 0;
  bool deflated_price_martingale_under_p = false;
  bool price_martingale_under_q = false;
};

struct DeflatorReport {
  std::vector<DeflatorAssetCheck> assets;
  bool is_density_deflator = false;  // all assets pass
};

// Checks, per asset, that deflating by the density process is a martingale
// statement under P exactly when the plain price is one under the measure.
DeflatorReport verify_deflator(const Rnp& rnp, const Market& m);

// Measure reweighted onto a new numeraire: scale by the terminal price ratio
// of the new numeraire to the old one. Input must be a pricing measure for
// the market's current numeraire (NotEmm otherwise); the output prices every
// asset discounted by the new numeraire.
Measure change_numeraire_measure(const Measure& q, const Market& m, int new_numeraire);

struct CompletenessReport {
  bool complete = false;
  bool replication_rank_ok = false;
  std::optional<std::pair<int, int>> failing_node;  // (t, block) in the price filtration
  ImmersionReport q_immersion;  // price filtration immersed in ambient under q
};

// Complete iff (a) at every node of the price filtration the child price
// vectors span the full child space, and (b) the price filtration is immersed
// in the ambient one under the supplied measure. The measure is taken as
// given; callers normally pass a pricing measure for the ambient filtration.
CompletenessReport is_complete(const Market& m, const Measure& q);

// True when the measure makes every discounted asset a martingale with
// respect to the filtration.
bool is_emm(const Market& m, const Measure& q, const Filtration& f);

}  // namespace finmart
