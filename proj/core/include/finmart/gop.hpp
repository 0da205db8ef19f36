#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "finmart/market.hpp"
#include "finmart/noarb.hpp"
#include "finmart/prob.hpp"
#include "finmart/rational.hpp"

namespace finmart {

// One-step log-optimal solution at a single information node, with a
// first-order certificate: asset_defect[i] = E(g_i / X | node) - 1, which is
// exactly zero at an interior optimum.
struct GopNode {
  int t = 0;
  int block = 0;                  // index into filtration level t
  std::vector<Rat> fractions;     // wealth fractions per asset, sum to 1
  std::vector<Rat> wealth_ratio;  // per child block: one-step growth factor
  std::vector<Rat> asset_defect;  // first-order certificate per asset
  bool exact = true;              // optimum certified exactly
  bool complete_node = true;      // one-step returns span the child space
  double growth = 0.0;            // conditional expected log increment
};

// Growth-optimal portfolio for a market, computed node by node on a
// filtration that refines the price evolution.
struct GopResult {
  Filtration filtration;  // the information the portfolio trades on
  Strategy strategy;      // holdings in units, H_0 = H_1
  ValueProcess wealth;    // discounted wealth, starts at 1 in every state
  std::vector<GopNode> nodes;
  bool redundant_assets = false;  // some asset is a combination of others
  bool exact = true;              // every node certified exactly
  double log_growth = 0.0;        // E log W_T
};

// Computes the growth-optimal portfolio with respect to `info` (defaults to
// the market's ambient filtration). `info` must refine the price evolution.
// Throws ArbitrageUnboundedGrowth if some node admits a one-step arbitrage,
// which makes expected log growth unbounded.
GopResult compute_gop(const Market& m, const Filtration& info);
GopResult compute_gop(const Market& m);

// Supermartingale verification of a candidate numeraire wealth process.
struct ConditionalStat {
  int block = 0;       // block index in the conditioning partition
  Rat mean_excess;     // E(Q_T / Q_t | block) - 1, nonpositive for the GOP
  int log_sign = 0;    // sign of E(log(Q_T / Q_t) | block)
};

struct BenchmarkedCheck {
  std::string label;
  ProcessClass cls = ProcessClass::Martingale;
  bool supermartingale = true;
  std::optional<DefectCell> witness;  // worst upward defect, if any
  std::vector<ConditionalStat> stats;
};

struct NumeraireReport {
  std::vector<BenchmarkedCheck> assets;      // each primary asset over W
  std::vector<BenchmarkedCheck> strategies;  // random normalized V over W
  int stat_t = 0;
  int stat_T = 0;
  bool all_supermartingales = true;  // every benchmarked process
  bool stats_consistent = true;      // mean_excess <= 0 and log_sign <= 0
};

// Checks that every benchmarked primary asset, and a batch of seeded random
// normalized strategies, is a supermartingale relative to the candidate
// wealth process `w` under the real-world measure with respect to `info`.
// Also evaluates the two conditional statistics E(Q_T/Q_t - 1 | I) and
// sign E(log(Q_T/Q_t) | I) for a conditioning partition I (must be coarser
// than info at stat_t; defaults to info at stat_t).
NumeraireReport verify_numeraire_portfolio(const ValueProcess& w, const Market& m,
                                           const Filtration& info,
                                           const Partition* conditioning = nullptr,
                                           int stat_t = 0, int stat_T = -1,
                                           int n_random = 8, std::uint64_t seed = 1,
                                           const Rat& tol = Rat(0));

// Two-sided check of the minimal-price property of the GOP numeraire:
// for each asset and each block B of the filtration at time t,
//   lhs = P_i,t(B)   vs   rhs = E(P_i,T * W_t / W_T | B).
// The bound holds when lhs >= rhs. Violations are reported, not thrown:
// they are exactly the fingerprint of pricing with the wrong information.
struct MinimalPriceCell {
  int asset = 0;
  int block = 0;
  Rat lhs;
  Rat rhs;
  bool holds = true;
  bool tight = true;  // lhs == rhs (within tol in float mode)
};

struct MinimalPriceReport {
  int t = 0;
  int T = 0;
  std::vector<MinimalPriceCell> cells;
  bool holds = true;
};

MinimalPriceReport law_of_minimal_price_bound(const Market& m, const GopResult& gop,
                                              int t, int T, const Rat& tol = Rat(0));

// Value of a claim at time t under the real-world measure, using the GOP
// wealth as numeraire:  v_t = W_t * E(payoff / (S_T^num * W_T) | F_t).
// Returned per state, in discounted units. When the market is complete and
// the GOP's filtration equals the market's ambient one, this equals the
// risk-neutral value (asserted internally whenever both routes apply).
std::vector<Rat> real_world_value(const Claim& c, const Market& m,
                                  const GopResult& gop, int t);

// Replication by backward induction on the price evolution. Throws
// NotReplicable naming the first node whose one-step system is inconsistent.
// `q` is used only to cross-check the value process when it is an EMM.
struct Replication {
  Strategy strategy;
  ValueProcess value;  // discounted replication value, V_T = payoff / S_T^num
};

Replication replicate(const Claim& c, const Market& m, const Measure& q);

// Joint consistency check: are the benchmarked primary assets martingales
// under the real-world measure with respect to `info`, where the benchmark
// is the growth-optimal wealth computed on the price evolution? Fails
// exactly when `info` carries pricing-relevant information beyond prices.
struct HypothesisWitness {
  int asset = 0;
  int t = 0;
  int block = 0;         // block of info at t
  Rat conditional_mean;  // E(P_{t+1}/W_{t+1} | block)
  Rat current;           // P_t/W_t on the block
};

struct HypothesisReport {
  bool consistent = true;  // all benchmarked assets are exact martingales
  std::vector<ProcessClass> asset_class;
  std::optional<HypothesisWitness> witness;
  bool lambda_checked = false;        // unique pricing measure available
  bool lambda_is_inverse_wealth = true;  // density process == 1 / W
  bool nominal_route_agrees = true;   // same verdict from undiscounted prices
};

HypothesisReport martingale_hypothesis_check(const Market& m, const Filtration& info,
                                             const Rat& tol = Rat(0));

}  // namespace finmart
