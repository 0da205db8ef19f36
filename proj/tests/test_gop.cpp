#include <doctest.h>

#include <cmath>

#include "finmart/errors.hpp"
#include "finmart/gop.hpp"
#include "finmart/market.hpp"
#include "finmart/noarb.hpp"
#include "finmart/prob.hpp"
#include "finmart/rational.hpp"
#include "testgen.hpp"

using finmart::Market;
using finmart::Measure;
using finmart::PriceCube;
using finmart::ProcessClass;
using finmart::Rat;
using finmart::rat;

namespace {

Market binomial() {
  PriceCube prices = {{{rat(1), rat(1)}, {rat(1), rat(1)}},
                      {{rat(1), rat(1)}, {rat(2), rat(1, 2)}}};
  auto space = finmart::make_space({"u", "d"}, {rat(1, 2), rat(1, 2)});
  return finmart::make_market({"bond", "stock"}, prices, 0, space);
}

Market trinomial() {
  PriceCube prices = {{{rat(1), rat(1), rat(1)}, {rat(1), rat(1), rat(1)}},
                      {{rat(1), rat(1), rat(1)}, {rat(2), rat(1), rat(1, 2)}}};
  auto space = finmart::make_space({"u", "m", "d"},
                                   {rat(1, 3), rat(1, 3), rat(1, 3)});
  return finmart::make_market({"bond", "stock"}, prices, 0, space);
}

Market insider() {
  PriceCube prices = {
      {{rat(1), rat(1), rat(1), rat(1)}, {rat(1), rat(1), rat(1), rat(1)}},
      {{rat(1), rat(1), rat(1), rat(1)},
       {rat(2), rat(2), rat(1, 2), rat(1, 2)}}};
  auto space = finmart::make_space(
      {"ug", "ub", "dg", "db"}, {rat(2, 5), rat(1, 10), rat(1, 10), rat(2, 5)});
  Market m = finmart::make_market({"bond", "stock"}, prices, 0, space);
  finmart::Signal tip{"tip",
                      {{rat(1), rat(0), rat(1), rat(0)},
                       {rat(1), rat(0), rat(1), rat(0)}},
                      0};
  return finmart::with_ambient(m, finmart::enlarge(m.evolution, {tip}));
}

Market dominated() {
  PriceCube prices = {{{rat(1), rat(1)}, {rat(1), rat(1)}},
                      {{rat(1), rat(1)}, {rat(2), rat(5, 4)}}};
  auto space = finmart::make_space({"u", "d"}, {rat(1, 2), rat(1, 2)});
  return finmart::make_market({"bond", "stock"}, prices, 0, space);
}

}  // namespace

TEST_CASE("binomial growth-optimal portfolio in closed form") {
  Market m = binomial();
  auto gop = finmart::compute_gop(m);
  CHECK(gop.exact);
  CHECK_FALSE(gop.redundant_assets);
  REQUIRE(gop.nodes.size() == 1);
  CHECK(gop.nodes[0].fractions == std::vector<Rat>{rat(1, 2), rat(1, 2)});
  CHECK(gop.nodes[0].complete_node);
  for (const Rat& d : gop.nodes[0].asset_defect) CHECK(d == rat(0));
  CHECK(gop.wealth.values[0] == std::vector<Rat>{rat(1), rat(1)});
  CHECK(gop.wealth.values[1] == std::vector<Rat>{rat(3, 2), rat(3, 4)});
  CHECK(gop.log_growth ==
        doctest::Approx(0.5 * std::log(9.0 / 8.0)).epsilon(1e-12));
  // The density process of the unique pricing measure is the inverse wealth.
  auto set = finmart::find_emms(m);
  REQUIRE(set.representative.has_value());
  auto rnp = finmart::rnp_from_measure(*set.representative, m.evolution, m.space);
  for (int t = 0; t <= 1; ++t)
    for (int s = 0; s < 2; ++s)
      CHECK(rnp.levels.values[t][s] * gop.wealth.values[t][s] == rat(1));
}

TEST_CASE("trinomial incomplete node is certified exactly") {
  Market m = trinomial();
  auto gop = finmart::compute_gop(m);
  CHECK(gop.exact);
  REQUIRE(gop.nodes.size() == 1);
  CHECK_FALSE(gop.nodes[0].complete_node);
  CHECK(gop.nodes[0].fractions == std::vector<Rat>{rat(1, 2), rat(1, 2)});
  CHECK(gop.wealth.values[1] == std::vector<Rat>{rat(3, 2), rat(1), rat(3, 4)});
  for (const Rat& d : gop.nodes[0].asset_defect) CHECK(d == rat(0));
}

TEST_CASE("insider tip flips the portfolio block by block") {
  Market m = insider();
  auto gop = finmart::compute_gop(m);  // ambient information
  REQUIRE(gop.nodes.size() == 2);
  // Good-news block: leveraged long; bad-news block: mirrored.
  CHECK(gop.nodes[0].fractions == std::vector<Rat>{rat(-2, 5), rat(7, 5)});
  CHECK(gop.nodes[1].fractions == std::vector<Rat>{rat(7, 5), rat(-2, 5)});
  auto egop = finmart::compute_gop(m, m.evolution);
  REQUIRE(egop.nodes.size() == 1);
  CHECK(egop.nodes[0].fractions == std::vector<Rat>{rat(1, 2), rat(1, 2)});
  CHECK(egop.wealth.values[1] ==
        std::vector<Rat>{rat(3, 2), rat(3, 2), rat(3, 4), rat(3, 4)});
  // Knowing the tip grows wealth strictly faster on average.
  CHECK(gop.log_growth > egop.log_growth);
}

TEST_CASE("one-step arbitrage makes log growth unbounded") {
  CHECK_THROWS_AS(finmart::compute_gop(dominated()),
                  finmart::ArbitrageUnboundedGrowth);
}

TEST_CASE("gop holdings do not depend on the numeraire") {
  for (Market m : {binomial(), trinomial(), insider()}) {
    auto base = finmart::compute_gop(m);
    for (int a = 0; a < m.n_assets(); ++a) {
      auto other = finmart::compute_gop(finmart::with_numeraire(m, a));
      CHECK(other.strategy.holdings == base.strategy.holdings);
    }
  }
}

TEST_CASE("numeraire portfolio verification accepts the gop") {
  Market m = binomial();
  auto gop = finmart::compute_gop(m);
  auto report = finmart::verify_numeraire_portfolio(gop.wealth, m, m.ambient);
  CHECK(report.all_supermartingales);
  CHECK(report.stats_consistent);
  REQUIRE(report.assets.size() == 2);
  for (const auto& check : report.assets) {
    CHECK(check.cls == ProcessClass::Martingale);
    for (const auto& stat : check.stats) {
      CHECK(stat.mean_excess == rat(0));
      CHECK(stat.log_sign <= 0);
    }
  }
  CHECK(report.strategies.size() == 8);
}

TEST_CASE("numeraire portfolio verification rejects a non-optimal benchmark") {
  Market m = binomial();
  // Wealth of holding the stock only.
  finmart::Strategy s{{{{rat(0), rat(0)}, {rat(1), rat(1)}},
                       {{rat(0), rat(0)}, {rat(1), rat(1)}}}};
  auto w = finmart::value_process(s, m);
  auto report = finmart::verify_numeraire_portfolio(w, m, m.ambient);
  CHECK_FALSE(report.all_supermartingales);
  CHECK_FALSE(report.stats_consistent);
  // The benchmarked bond drifts upward: 1/2 * 1/2 + 1/2 * 2 = 5/4.
  REQUIRE(!report.assets.empty());
  CHECK(report.assets[0].stats[0].mean_excess == rat(1, 4));
}

TEST_CASE("conditioning partition must be coarse enough") {
  Market m = binomial();
  auto gop = finmart::compute_gop(m);
  finmart::Partition singletons = {{0}, {1}};
  CHECK_THROWS_AS(finmart::verify_numeraire_portfolio(gop.wealth, m, m.ambient,
                                                      &singletons, 0, 1),
                  finmart::NotMeasurable);
}

TEST_CASE("minimal-price bound is tight with full information") {
  Market m = binomial();
  auto gop = finmart::compute_gop(m);
  auto lomp = finmart::law_of_minimal_price_bound(m, gop, 0, 1);
  CHECK(lomp.holds);
  for (const auto& cell : lomp.cells) {
    CHECK(cell.holds);
    CHECK(cell.tight);
  }
}

TEST_CASE("minimal-price bound breaks under hidden information") {
  Market m = insider();
  // Growth-optimal wealth computed from prices alone, judged under the
  // ambient blocks: the bad-news block prices the bond above one.
  auto egop = finmart::compute_gop(m, m.evolution);
  auto lomp = finmart::law_of_minimal_price_bound(m, egop, 0, 1);
  CHECK_FALSE(lomp.holds);
  bool found = false;
  for (const auto& cell : lomp.cells) {
    if (!cell.holds) {
      found = true;
      CHECK(cell.rhs > cell.lhs);
      if (cell.asset == 0 && cell.block == 1) {
        CHECK(cell.lhs == rat(1));
        CHECK(cell.rhs == rat(6, 5));
      }
    }
  }
  CHECK(found);
  // With the ambient growth-optimal wealth the bound holds again.
  auto agop = finmart::compute_gop(m);
  CHECK(finmart::law_of_minimal_price_bound(m, agop, 0, 1).holds);
}

TEST_CASE("real-world value equals risk-neutral value on the binomial call") {
  Market m = binomial();
  finmart::Claim call{"call", {rat(1), rat(0)}};
  auto gop = finmart::compute_gop(m);
  auto v0 = finmart::real_world_value(call, m, gop, 0);
  CHECK(v0 == std::vector<Rat>{rat(1, 3), rat(1, 3)});
  auto v1 = finmart::real_world_value(call, m, gop, 1);
  CHECK(v1 == std::vector<Rat>{rat(1), rat(0)});
}

TEST_CASE("replication recovers the hedge and the value") {
  Market m = binomial();
  finmart::Claim call{"call", {rat(1), rat(0)}};
  auto set = finmart::find_emms(m);
  REQUIRE(set.representative.has_value());
  auto rep = finmart::replicate(call, m, *set.representative);
  CHECK(rep.value.values[0] == std::vector<Rat>{rat(1, 3), rat(1, 3)});
  CHECK(rep.value.values[1] == std::vector<Rat>{rat(1), rat(0)});
  CHECK(rep.strategy.holdings[1][0] == std::vector<Rat>{rat(-1, 3), rat(-1, 3)});
  CHECK(rep.strategy.holdings[1][1] == std::vector<Rat>{rat(2, 3), rat(2, 3)});
  // The trinomial call has no perfect hedge.
  Market tri = trinomial();
  finmart::Claim tcall{"call", {rat(1), rat(0), rat(0)}};
  auto qt = finmart::find_emms(tri);
  REQUIRE(qt.representative.has_value());
  CHECK_THROWS_AS(finmart::replicate(tcall, tri, *qt.representative),
                  finmart::NotReplicable);
}

TEST_CASE("martingale hypothesis holds for prices, fails for the insider") {
  Market bi = binomial();
  auto ok = finmart::martingale_hypothesis_check(bi, bi.ambient);
  CHECK(ok.consistent);
  CHECK(ok.lambda_checked);
  CHECK(ok.lambda_is_inverse_wealth);
  CHECK(ok.nominal_route_agrees);
  for (auto cls : ok.asset_class) CHECK(cls == ProcessClass::Martingale);

  Market in = insider();
  auto bad = finmart::martingale_hypothesis_check(in, in.ambient);
  CHECK_FALSE(bad.consistent);
  REQUIRE(bad.witness.has_value());
  CHECK(bad.witness->asset == 0);
  CHECK(bad.witness->t == 0);
  CHECK(bad.witness->block == 1);
  CHECK(bad.witness->conditional_mean == rat(6, 5));
  CHECK(bad.witness->current == rat(1));
  CHECK(bad.lambda_checked);
  CHECK(bad.lambda_is_inverse_wealth);
  CHECK(bad.nominal_route_agrees);
  // Judged against prices alone the same market is consistent.
  auto fine = finmart::martingale_hypothesis_check(in, in.evolution);
  CHECK(fine.consistent);
}

TEST_CASE("multi-period growth portfolio stays exact on random complete trees") {
  testgen::Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    testgen::TreeParams params;
    params.max_periods = 3;
    params.n_assets = 2;
    params.max_children = 2;
    params.leaf_budget = 8;
    params.style = testgen::TreeStyle::Martingale;
    Market m = testgen::random_tree_market(rng, params);
    auto gop = finmart::compute_gop(m);
    CHECK(gop.exact);
    for (const auto& node : gop.nodes)
      for (const Rat& d : node.asset_defect) CHECK(d == rat(0));
    // Wealth starts at one and stays strictly positive.
    for (const auto& row : gop.wealth.values)
      for (const Rat& v : row) CHECK(sgn(v) > 0);
    for (const Rat& v : gop.wealth.values[0]) CHECK(v == rat(1));
  }
}
