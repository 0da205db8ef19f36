#pragma once

#include <memory>
#include <string>
#include <vector>

#include "finmart/market.hpp"
#include "finmart/rational.hpp"
#include "finmart/sensitivity.hpp"

namespace finmart {

// Payoff expression over terminal prices:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := number | 'S' name '[T]' | 'max(' expr ',' expr ')'
//           | 'min(' expr ',' expr ')' | '(' expr ')'
struct ClaimExpr;
using ClaimExprPtr = std::shared_ptr<const ClaimExpr>;

struct ClaimExpr {
  enum class Kind { Number, Price, Add, Sub, Mul, Div, Max, Min };
  Kind kind = Kind::Number;
  Rat number;
  std::string asset;  // Kind::Price
  ClaimExprPtr lhs, rhs;
};

struct ScenarioClaim {
  std::string name;
  ClaimExprPtr expr;
};

// A market description in the line-based text format:
//   scenario v1
//   mode rational            (or: mode float tol 1/1000000)
//   horizon 2
//   states 4
//   state uu 9/16            (one per state: id probability)
//   numeraire bond
//   asset bond               (one per asset, then one indented row per time)
//     t0 1 1 1 1
//   signal tip reveal 0      (optional, same row layout)
//     t0 1 1 0 0
//   claim call = max(S stock[T] - 1, 0)
// Directives appear in exactly this order. '#' starts a comment on parse;
// emit_scenario produces the canonical form, so parse(emit(s)) == s and
// emitting a canonical file reproduces it byte for byte.
struct Scenario {
  bool rational_mode = true;
  Rat tol;  // zero in rational mode
  int horizon = 0;
  FiniteProbSpace space;
  std::string numeraire;
  std::vector<std::string> asset_names;
  PriceCube prices;  // [t][asset][state], as written (undiscounted)
  std::vector<Signal> signals;
  std::vector<ScenarioClaim> claims;
};

Scenario parse_scenario(const std::string& text);
std::string emit_scenario(const Scenario& s);

// Canonical rendering of a payoff expression (used by emit_scenario).
std::string format_claim_expr(const ClaimExprPtr& e);

// Market with the scenario's signals folded into the ambient information.
Market build_market(const Scenario& s);

// Payoff per state at the horizon. Throws BadParams on an unknown asset or a
// division by zero; the claim must come out nonnegative.
Claim claim_payoff(const Scenario& s, const ScenarioClaim& c);
const ScenarioClaim& find_claim(const Scenario& s, const std::string& name);

// Generators. Binomial: per period the stock multiplies by u or d with
// probability p of u, the bond by 1 + r; requires d < 1 + r < u. States are
// the letter paths ("uu", "ud", ...). Each generated scenario carries an
// at-the-money call on the stock.
Scenario make_crr_scenario(int periods, const Rat& u, const Rat& d, const Rat& r,
                           const Rat& p);
// Trinomial: per period factors 2, 1, 1/2 with equal probability.
Scenario make_trinomial_scenario(int periods);
// One-period binomial (u = 2, d = 1/2, fair coin) plus a signal revealed at
// time 0 that calls the direction with the given accuracy in (1/2, 1).
Scenario make_insider_scenario(const Rat& accuracy);

}  // namespace finmart
