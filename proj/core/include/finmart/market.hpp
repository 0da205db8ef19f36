#pragma once

#include <optional>
#include <string>
#include <vector>

#include "finmart/prob.hpp"
#include "finmart/rational.hpp"

namespace finmart {

// prices[t][asset][state], strictly positive.
using PriceCube = std::vector<std::vector<std::vector<Rat>>>;

// A finite-horizon market. Time-0 prices are 1 for every asset: the loader
// rescales and records the original scale per asset. `evolution` is the
// filtration generated by the joint price histories; `ambient` defaults to it
// and may be strictly finer (extra non-price information).
struct Market {
  std::vector<std::string> asset_names;
  PriceCube prices;  // nominal, rescaled so prices[0][i][s] == 1
  int numeraire = 0;
  FiniteProbSpace space;
  Filtration evolution;
  Filtration ambient;
  std::vector<Rat> initial_scale;  // original time-0 price per asset

  int horizon() const { return static_cast<int>(prices.size()) - 1; }
  int n_assets() const { return static_cast<int>(asset_names.size()); }
  int n_states() const { return space.size(); }
  int asset_index(const std::string& name) const;
};

Market make_market(std::vector<std::string> asset_names, PriceCube prices,
                   int numeraire, FiniteProbSpace space,
                   std::optional<Filtration> ambient = std::nullopt);
Market with_numeraire(const Market& m, int new_numeraire);
Market with_ambient(const Market& m, Filtration ambient);

// Discounted prices P_it = S_it / S_at. The numeraire row is identically 1.
PriceCube discount(const Market& m);

// holdings[t][asset][state]. holdings[t] is the portfolio held over the step
// into time t: it must be measurable at time t-1 (time 0: measurable at 0).
struct Strategy {
  std::vector<std::vector<std::vector<Rat>>> holdings;

  int horizon() const { return static_cast<int>(holdings.size()) - 1; }
};

struct ValueProcess {
  std::vector<std::vector<Rat>> values;  // [t][state], discounted units
};

void require_predictable(const Strategy& s, const Market& m);

// Discounted value V_t = H_t . P_t. Validates predictability and the
// rebalance identity H_t . P_t == H_{t+1} . P_t at every state and time;
// the result therefore also satisfies the telescoping gain form
// V_t = V_0 + sum_{s<=t} H_s . (P_s - P_{s-1}).
ValueProcess value_process(const Strategy& s, const Market& m);

// Shift-then-scale onto initial value 1 with everywhere-positive value:
// add (a - V_0) numeraire units at time 0 and divide the strategy by a, with
// a the smallest power of two exceeding the required shift. Scalars are fixed
// per time-0 block of the ambient filtration. Already-normalized strategies
// come back unchanged.
Strategy normalize(const Strategy& s, const Market& m);

// Elementwise v / w; w must be strictly positive.
std::vector<std::vector<Rat>> benchmark(const std::vector<std::vector<Rat>>& v,
                                        const std::vector<std::vector<Rat>>& w);

// Terminal payoff in nominal units; nonnegative and measurable with respect
// to the final partition of the price filtration.
struct Claim {
  std::string name;
  std::vector<Rat> payoff;  // per state
};

void require_claim(const Claim& c, const Market& m);

}  // namespace finmart
