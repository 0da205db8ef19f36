#include <doctest.h>

#include "finmart/errors.hpp"
#include "finmart/market.hpp"
#include "finmart/noarb.hpp"
#include "finmart/prob.hpp"
#include "finmart/rational.hpp"
#include "finmart/sensitivity.hpp"
#include "testgen.hpp"

using finmart::EmmClass;
using finmart::Filtration;
using finmart::Market;
using finmart::Partition;
using finmart::PriceCube;
using finmart::Rat;
using finmart::rat;
using finmart::Signal;

namespace {

Market binomial() {
  PriceCube prices = {{{rat(1), rat(1)}, {rat(1), rat(1)}},
                      {{rat(1), rat(1)}, {rat(2), rat(1, 2)}}};
  auto space = finmart::make_space({"u", "d"}, {rat(1, 2), rat(1, 2)});
  return finmart::make_market({"bond", "stock"}, prices, 0, space);
}

Market insider(const Rat& accuracy) {
  Rat a = accuracy;
  PriceCube prices = {
      {{rat(1), rat(1), rat(1), rat(1)}, {rat(1), rat(1), rat(1), rat(1)}},
      {{rat(1), rat(1), rat(1), rat(1)},
       {rat(2), rat(2), rat(1, 2), rat(1, 2)}}};
  auto space = finmart::make_space(
      {"ug", "ub", "dg", "db"},
      {a / 2, (Rat(1) - a) / 2, (Rat(1) - a) / 2, a / 2});
  Market m = finmart::make_market({"bond", "stock"}, prices, 0, space);
  Signal tip{"tip",
             {{rat(1), rat(0), rat(1), rat(0)}, {rat(1), rat(0), rat(1), rat(0)}},
             0};
  return finmart::with_ambient(m, finmart::enlarge(m.evolution, {tip}));
}

}  // namespace

TEST_CASE("enlarge refines by revealed signal rows") {
  Market m = insider(rat(4, 5));
  CHECK(m.ambient.at(0) == Partition{{0, 2}, {1, 3}});
  CHECK(m.ambient.at(1) == Partition{{0}, {1}, {2}, {3}});
  // A signal revealed at the horizon changes nothing before it.
  Market base = binomial();
  Signal late{"late", {{rat(1), rat(0)}, {rat(1), rat(0)}}, 1};
  Filtration f = finmart::enlarge(base.evolution, {late});
  CHECK(f.at(0) == Partition{{0, 1}});
  CHECK(f.at(1) == Partition{{0}, {1}});
}

TEST_CASE("a market with no extra information is sensitive") {
  Market m = binomial();
  auto rep = finmart::sensitivity_report(m);
  CHECK(rep.sensitive);
  CHECK(rep.conditional_route.immersed);
  CHECK(rep.projection_route);
  CHECK(rep.level_identity);
}

TEST_CASE("independent noise keeps a market sensitive") {
  testgen::Rng rng(99);
  Market base = binomial();
  Market m = testgen::with_coin_signal(base, rng, rat(1, 2), 0);
  auto rep = finmart::sensitivity_report(m);
  CHECK(rep.sensitive);
  CHECK(rep.projection_route);
  // The ambient flow is strictly finer at time zero, yet worthless.
  CHECK(m.ambient.at(0).size() == 2);
  CHECK(m.evolution.at(0).size() == 1);
}

TEST_CASE("the insider tip destroys sensitivity with matching witnesses") {
  Market m = insider(rat(4, 5));
  auto rep = finmart::sensitivity_report(m);
  CHECK_FALSE(rep.sensitive);
  CHECK_FALSE(rep.conditional_route.immersed);
  CHECK_FALSE(rep.projection_route);
  REQUIRE(rep.conditional_route.witness.has_value());
  CHECK(rep.conditional_route.witness->t == 0);
  CHECK(rep.conditional_route.witness->p_given_fine == rat(4, 5));
  CHECK(rep.conditional_route.witness->p_given_coarse == rat(1, 2));
  REQUIRE(rep.projection_witness.has_value());
  CHECK(rep.projection_witness->t == 0);
  // The level identity still holds: the tip is new information, but price
  // levels are still recovered from ambient-and-terminal.
  CHECK(rep.level_identity);
}

TEST_CASE("a coin that merely repeats price history is no information") {
  // Signal equal to the first move indicator, revealed only at time 1 when
  // prices show it anyway: ambient equals evolution, market sensitive.
  Market base = binomial();
  Signal echo{"echo", {{rat(1), rat(0)}, {rat(1), rat(0)}}, 1};
  Market m = finmart::with_ambient(
      base, finmart::enlarge(base.evolution, {echo}));
  CHECK(finmart::same_partition(m.ambient.at(0), base.evolution.at(0)));
  CHECK(finmart::same_partition(m.ambient.at(1), base.evolution.at(1)));
  CHECK(finmart::sensitivity_report(m).sensitive);
}

TEST_CASE("efficiency requires both a pricing measure and sensitivity") {
  // Sensitive and priced: efficient.
  auto good = finmart::efficiency_check(binomial());
  CHECK(good.efficient);
  CHECK(good.sensitive);
  CHECK(good.ambient_emm_exists);
  CHECK(good.ambient_class == EmmClass::Unique);

  // Insider: ambient pricing measures exist, sensitivity fails.
  auto ins = finmart::efficiency_check(insider(rat(4, 5)));
  CHECK_FALSE(ins.efficient);
  CHECK(ins.ambient_emm_exists);
  CHECK(ins.ambient_class == EmmClass::Multiple);
  CHECK_FALSE(ins.sensitive);
  CHECK(ins.evolution_class == EmmClass::Unique);

  // Dominated: sensitive but nothing prices it.
  PriceCube prices = {{{rat(1), rat(1)}, {rat(1), rat(1)}},
                      {{rat(1), rat(1)}, {rat(2), rat(5, 4)}}};
  auto space = finmart::make_space({"u", "d"}, {rat(1, 2), rat(1, 2)});
  Market dom = finmart::make_market({"bond", "stock"}, prices, 0, space);
  auto bad = finmart::efficiency_check(dom);
  CHECK_FALSE(bad.efficient);
  CHECK(bad.sensitive);
  CHECK_FALSE(bad.ambient_emm_exists);
}

TEST_CASE("an accuracy-1/2 tip is pure noise and efficiency survives") {
  auto rep = finmart::efficiency_check(insider(rat(1, 2)));
  CHECK(rep.efficient);
  CHECK(rep.sensitive);
}

TEST_CASE("pricing-density transport: down always, up exactly when sensitive") {
  auto bi = finmart::sdf_compatibility(binomial());
  CHECK(bi.downward_checked);
  CHECK(bi.downward_ok);
  CHECK(bi.upward_checked);
  CHECK(bi.upward_ok);
  CHECK(bi.sensitive);
  CHECK(bi.upward_matches_sensitivity);

  auto ins = finmart::sdf_compatibility(insider(rat(4, 5)));
  CHECK(ins.downward_checked);
  CHECK(ins.downward_ok);
  CHECK(ins.upward_checked);
  CHECK_FALSE(ins.upward_ok);
  CHECK_FALSE(ins.sensitive);
  CHECK(ins.upward_matches_sensitivity);
  REQUIRE(ins.upward_witness.has_value());
  CHECK(ins.upward_witness->asset == 0);
  CHECK(ins.upward_witness->t == 0);
  CHECK(ins.upward_witness->block == 0);
  CHECK(ins.upward_witness->lhs == rat(1));
  CHECK(ins.upward_witness->rhs == rat(4, 5));
}

TEST_CASE("randomized independent enlargements stay immersed both routes") {
  testgen::Rng rng(20250817);
  for (int i = 0; i < 10; ++i) {
    testgen::TreeParams params;
    params.max_periods = 2;
    params.n_assets = 2;
    params.max_children = 3;
    params.leaf_budget = 8;
    params.style = testgen::TreeStyle::Martingale;
    Market base = testgen::random_tree_market(rng, params);
    Market m = testgen::with_coin_signal(base, rng, rat(1, 2),
                                         rng.below(base.horizon() + 1));
    auto rep = finmart::sensitivity_report(m);
    CHECK(rep.sensitive == rep.projection_route);
    CHECK(rep.sensitive == rep.conditional_route.immersed);
    CHECK(rep.sensitive);
  }
}
