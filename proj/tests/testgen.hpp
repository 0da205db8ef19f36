#pragma once

// Deterministic random-market generators shared by the unit and acceptance
// suites. All randomness flows through one splitmix64 stream, so any failing
// instance is reproducible from its seed.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "finmart/market.hpp"
#include "finmart/noarb.hpp"
#include "finmart/prob.hpp"
#include "finmart/rational.hpp"
#include "finmart/sensitivity.hpp"

namespace testgen {

using finmart::Claim;
using finmart::Filtration;
using finmart::Market;
using finmart::Partition;
using finmart::PriceCube;
using finmart::Rat;
using finmart::Signal;

struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  bool coin() { return (next() & 1) != 0; }

  const Rat& pick(const std::vector<Rat>& from) {
    return from[static_cast<std::size_t>(below(static_cast<int>(from.size())))];
  }

  // Strictly positive fractions summing to one, one per slot.
  std::vector<Rat> simplex(int n) {
    std::vector<Rat> w(static_cast<std::size_t>(n));
    Rat total(0);
    for (auto& x : w) {
      x = Rat(1 + below(6));
      total += x;
    }
    for (auto& x : w) x /= total;
    return w;
  }

  // A probability strictly inside (0, 1).
  Rat open_unit() {
    int den = 3 + below(9);
    int num = 1 + below(den - 1);
    return finmart::rat(num, den);
  }
};

// How the one-step multipliers of the risky assets are drawn.
enum class TreeStyle {
  Martingale,  // child weights exist by construction: no arbitrage
  Free,        // unconstrained multipliers: anything can happen
  Dominated,   // last asset only gains: dominated numeraire, arbitrage
  Boundary,    // nonnegative weights exist but strict positivity fails
};

struct TreeParams {
  int max_periods = 3;
  int n_assets = 2;       // asset 0 is the numeraire
  int max_children = 2;
  int leaf_budget = 16;
  TreeStyle style = TreeStyle::Martingale;
};

namespace detail {

struct ShapeNode {
  std::vector<int> kids;  // indices into the next level
  int leaves = 0;         // leaf count of the subtree
  int begin = 0;          // leaf range [begin, end)
  int end = 0;
};

using Shape = std::vector<std::vector<ShapeNode>>;  // [t][node]

inline Shape make_shape(Rng& rng, int periods, int max_children, int leaf_budget) {
  Shape shape(static_cast<std::size_t>(periods) + 1);
  shape[0].resize(1);
  for (int t = 0; t < periods; ++t) {
    auto& level = shape[static_cast<std::size_t>(t)];
    auto& next = shape[static_cast<std::size_t>(t) + 1];
    int width = static_cast<int>(level.size());
    int made = 0;
    for (int k = 0; k < width; ++k) {
      int still_unprocessed = width - k - 1;
      int c = max_children >= 2 ? 2 + rng.below(max_children - 1) : 1;
      int room = leaf_budget - made - still_unprocessed;
      c = std::max(1, std::min(c, room));
      for (int j = 0; j < c; ++j) {
        level[static_cast<std::size_t>(k)].kids.push_back(static_cast<int>(next.size()));
        next.emplace_back();
      }
      made += c;
    }
  }
  for (auto& leaf : shape.back()) leaf.leaves = 1;
  for (int t = periods - 1; t >= 0; --t)
    for (auto& node : shape[static_cast<std::size_t>(t)]) {
      node.leaves = 0;
      for (int kid : node.kids)
        node.leaves += shape[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(kid)].leaves;
    }
  shape[0][0].begin = 0;
  shape[0][0].end = shape[0][0].leaves;
  for (int t = 0; t < periods; ++t)
    for (auto& node : shape[static_cast<std::size_t>(t)]) {
      int at = node.begin;
      for (int kid : node.kids) {
        auto& child = shape[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(kid)];
        child.begin = at;
        child.end = at + child.leaves;
        at = child.end;
      }
    }
  return shape;
}

// Multipliers for one risky asset over the children of one node. For the
// martingale style, `martingale_q` is the node's common repricing weights:
// every asset is rescaled against the same weights so one equivalent measure
// prices the whole node.
inline std::vector<Rat> child_multipliers(Rng& rng, int n_children, TreeStyle style,
                                          bool dominated_asset,
                                          const std::vector<Rat>* martingale_q) {
  using finmart::rat;
  static const std::vector<Rat> raw = {rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3),
                                       rat(3, 4), rat(1),    rat(4, 3), rat(3, 2),
                                       rat(2),    rat(5, 2), rat(3),    rat(4)};
  static const std::vector<Rat> gaining = {rat(1), rat(9, 8), rat(5, 4), rat(3, 2), rat(2)};
  std::vector<Rat> m(static_cast<std::size_t>(n_children));
  if (n_children == 1) {
    // A deterministic step: a martingale cannot move, a free draw may.
    m[0] = (style == TreeStyle::Free && rng.coin()) ? rng.pick(raw) : Rat(1);
    return m;
  }
  const std::vector<Rat>& source =
      (dominated_asset || style == TreeStyle::Boundary) ? gaining : raw;
  // Pairwise distinct so sibling states differ in price and the price
  // filtration reproduces the intended tree.
  for (int tries = 0;; ++tries) {
    for (auto& x : m) x = rng.pick(source);
    if (style == TreeStyle::Boundary || dominated_asset)
      m[static_cast<std::size_t>(rng.below(n_children))] = Rat(1);
    std::vector<Rat> sorted = m;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) break;
    if (tries > 200) {  // can only stall when the set is too small for the node
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = Rat(1) + finmart::rat(static_cast<long>(i), 8);
      break;
    }
  }
  if (style == TreeStyle::Martingale && !dominated_asset) {
    // Rescale so the node's common strictly positive weights reprice the asset.
    Rat mean(0);
    for (int c = 0; c < n_children; ++c)
      mean += (*martingale_q)[static_cast<std::size_t>(c)] * m[static_cast<std::size_t>(c)];
    for (auto& x : m) x /= mean;
  }
  return m;
}

}  // namespace detail

// A random finite-horizon market on an information tree. The discounted
// price of asset 0 is identically one; risky assets move by per-node child
// multipliers drawn according to the style. Nominal prices compound a
// deterministic rate so rescaling and discounting are exercised.
inline Market random_tree_market(Rng& rng, const TreeParams& params) {
  using finmart::rat;
  int periods = 1 + rng.below(params.max_periods);
  detail::Shape shape = detail::make_shape(rng, periods, params.max_children, params.leaf_budget);
  int n_states = shape[0][0].leaves;
  int n_assets = params.n_assets;

  // Discounted prices per node, asset 0 constant one.
  PriceCube cube(static_cast<std::size_t>(periods) + 1,
                 std::vector<std::vector<Rat>>(
                     static_cast<std::size_t>(n_assets),
                     std::vector<Rat>(static_cast<std::size_t>(n_states), Rat(0))));
  static const std::vector<Rat> starts = {rat(1), rat(2), rat(1, 2), rat(5), rat(3, 2)};
  std::vector<Rat> start(static_cast<std::size_t>(n_assets));
  start[0] = rng.pick(starts);
  for (int i = 1; i < n_assets; ++i) start[static_cast<std::size_t>(i)] = rng.pick(starts);
  for (int i = 0; i < n_assets; ++i)
    for (int s = 0; s < n_states; ++s) cube[0][static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = Rat(1);

  std::vector<Rat> mass(static_cast<std::size_t>(n_states), Rat(0));
  std::vector<Rat> node_mass_level = {Rat(1)};  // per node of the current level
  for (int t = 0; t < periods; ++t) {
    const auto& level = shape[static_cast<std::size_t>(t)];
    std::vector<Rat> next_mass;
    for (std::size_t k = 0; k < level.size(); ++k) {
      const auto& node = level[k];
      int c = static_cast<int>(node.kids.size());
      std::vector<Rat> branch = rng.simplex(c);
      for (int j = 0; j < c; ++j) next_mass.push_back(node_mass_level[k] * branch[static_cast<std::size_t>(j)]);
      std::vector<Rat> martingale_q =
          params.style == TreeStyle::Martingale ? rng.simplex(c) : std::vector<Rat>{};
      for (int i = 0; i < n_assets; ++i) {
        bool dominated_asset = params.style == TreeStyle::Dominated && i == n_assets - 1;
        std::vector<Rat> m =
            i == 0 ? std::vector<Rat>(static_cast<std::size_t>(c), Rat(1))
                   : detail::child_multipliers(rng, c, params.style, dominated_asset,
                                               &martingale_q);
        for (int j = 0; j < c; ++j) {
          const auto& child = shape[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(node.kids[static_cast<std::size_t>(j)])];
          Rat parent = cube[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)][static_cast<std::size_t>(node.begin)];
          Rat value = parent * m[static_cast<std::size_t>(j)];
          for (int s = child.begin; s < child.end; ++s)
            cube[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = value;
        }
      }
    }
    node_mass_level = next_mass;
  }
  for (std::size_t k = 0; k < shape.back().size(); ++k)
    mass[static_cast<std::size_t>(shape.back()[k].begin)] = node_mass_level[k];

  // Nominal prices: scale by the starting price and a compounding factor.
  static const std::vector<Rat> rates = {rat(0), rat(1, 20), rat(1, 10)};
  Rat rate = rng.pick(rates);
  Rat compound(1);
  for (int t = 0; t <= periods; ++t) {
    for (int i = 0; i < n_assets; ++i)
      for (int s = 0; s < n_states; ++s)
        cube[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] *=
            compound * start[static_cast<std::size_t>(i)];
    compound *= Rat(1) + rate;
  }

  std::vector<std::string> atoms;
  std::vector<std::string> names;
  for (int s = 0; s < n_states; ++s) atoms.push_back("s" + std::to_string(s));
  for (int i = 0; i < n_assets; ++i) names.push_back(i == 0 ? "cash" : "asset" + std::to_string(i));
  finmart::FiniteProbSpace space = finmart::make_space(atoms, mass);
  return finmart::make_market(names, cube, 0, space);
}

// Reveals at time 0 which price-evolution block the market enters at time 1:
// a perfect tip about the first move.
inline Market with_perfect_tip(const Market& m) {
  int n = m.n_states();
  std::vector<std::vector<Rat>> rows(
      static_cast<std::size_t>(m.horizon()) + 1,
      std::vector<Rat>(static_cast<std::size_t>(n), Rat(0)));
  for (int t = 0; t <= m.horizon(); ++t)
    for (int s = 0; s < n; ++s)
      rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = Rat(m.evolution.block_of(1, s));
  Signal tip{"tip", rows, 0};
  return finmart::with_ambient(m, finmart::enlarge(m.evolution, {tip}));
}

// Doubles the state space with a coin that prices never depend on. With
// accuracy 1/2 the coin is independent of everything; otherwise it calls
// whether the first move enters evolution block 0, and the enlargement is
// genuinely informative.
inline Market with_coin_signal(const Market& m, Rng& rng, const Rat& accuracy,
                               int reveal_time) {
  int n = m.n_states();
  int horizon = m.horizon();
  std::vector<std::string> atoms;
  std::vector<Rat> prob;
  for (int s = 0; s < n; ++s) {
    bool up = m.evolution.block_of(1, s) == 0;
    for (int c = 0; c < 2; ++c) {
      atoms.push_back(m.space.atoms[static_cast<std::size_t>(s)] + (c == 0 ? "h" : "t"));
      bool agrees = (c == 0) == up;
      prob.push_back(m.space.prob[static_cast<std::size_t>(s)] *
                     (agrees ? accuracy : Rat(1) - accuracy));
    }
  }
  PriceCube cube(static_cast<std::size_t>(horizon) + 1,
                 std::vector<std::vector<Rat>>(
                     static_cast<std::size_t>(m.n_assets()),
                     std::vector<Rat>(static_cast<std::size_t>(2 * n), Rat(0))));
  for (int t = 0; t <= horizon; ++t)
    for (int i = 0; i < m.n_assets(); ++i)
      for (int s = 0; s < n; ++s)
        for (int c = 0; c < 2; ++c)
          cube[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]
              [static_cast<std::size_t>(2 * s + c)] =
                  m.prices[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(s)];
  std::vector<std::vector<Rat>> rows(
      static_cast<std::size_t>(horizon) + 1,
      std::vector<Rat>(static_cast<std::size_t>(2 * n), Rat(0)));
  for (int t = 0; t <= horizon; ++t)
    for (int s = 0; s < n; ++s) rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(2 * s)] = Rat(1);
  finmart::FiniteProbSpace space = finmart::make_space(atoms, prob);
  Market lifted = finmart::make_market(m.asset_names, cube, m.numeraire, space);
  Signal coin{"coin", rows, reveal_time};
  (void)rng;
  return finmart::with_ambient(lifted, finmart::enlarge(lifted.evolution, {coin}));
}

// Nonnegative claim measurable for the price information at the horizon.
inline Claim random_claim(const Market& m, Rng& rng) {
  using finmart::rat;
  static const std::vector<Rat> values = {rat(0), rat(1, 2), rat(1), rat(3, 2),
                                          rat(2), rat(3),    rat(1, 4)};
  const Partition& terminal = m.evolution.terminal();
  std::vector<Rat> payoff(static_cast<std::size_t>(m.n_states()), Rat(0));
  for (const auto& block : terminal) {
    Rat v = rng.pick(values);
    for (int s : block) payoff[static_cast<std::size_t>(s)] = v;
  }
  return Claim{"rand", payoff};
}

}  // namespace testgen
