#include "finmart/market.hpp"

#include <algorithm>
#include <set>

#include "finmart/errors.hpp"

namespace finmart {

int Market::asset_index(const std::string& name) const {
  for (std::size_t i = 0; i < asset_names.size(); ++i)
    if (asset_names[i] == name) return static_cast<int>(i);
  return -1;
}

Market make_market(std::vector<std::string> asset_names, PriceCube prices,
                   int numeraire, FiniteProbSpace space,
                   std::optional<Filtration> ambient) {
  if (asset_names.empty()) throw ValidationError("market has no assets");
  if (prices.empty()) throw ValidationError("market has no time rows");
  std::set<std::string> seen;
  for (const auto& n : asset_names)
    if (!seen.insert(n).second) throw ValidationError("duplicate asset name: " + n);
  int n_assets = static_cast<int>(asset_names.size());
  int n_states = space.size();
  for (std::size_t t = 0; t < prices.size(); ++t) {
    if (static_cast<int>(prices[t].size()) != n_assets)
      throw ValidationError("price row " + std::to_string(t) + " has wrong asset count");
    for (int i = 0; i < n_assets; ++i) {
      if (static_cast<int>(prices[t][static_cast<std::size_t>(i)].size()) != n_states)
        throw ValidationError("price row " + std::to_string(t) + ", asset " +
                              asset_names[static_cast<std::size_t>(i)] +
                              " has wrong state count");
      for (const Rat& v : prices[t][static_cast<std::size_t>(i)])
        if (sgn(v) <= 0)
          throw ValidationError("asset " + asset_names[static_cast<std::size_t>(i)] +
                                " has a nonpositive price at time " + std::to_string(t));
    }
  }
  if (numeraire < 0 || numeraire >= n_assets)
    throw ValidationError("numeraire index out of range");

  // Rescale every asset to a unit time-0 price; record the original scale.
  std::vector<Rat> scale(static_cast<std::size_t>(n_assets));
  for (int i = 0; i < n_assets; ++i) {
    // Copy: the rescale below overwrites prices[0][i][0] itself.
    const Rat s0 = prices[0][static_cast<std::size_t>(i)][0];
    for (const Rat& v : prices[0][static_cast<std::size_t>(i)])
      if (v != s0)
        throw NonTrivialStart("asset " + asset_names[static_cast<std::size_t>(i)] +
                              " has state-dependent time-0 prices");
    scale[static_cast<std::size_t>(i)] = s0;
    if (s0 != 1)
      for (auto& row : prices)
        for (Rat& v : row[static_cast<std::size_t>(i)]) v /= s0;
  }

  Market m;
  m.asset_names = std::move(asset_names);
  m.prices = std::move(prices);
  m.numeraire = numeraire;
  m.space = std::move(space);
  m.initial_scale = std::move(scale);
  m.evolution = natural_filtration(m.prices);
  if (ambient) {
    require_subfiltration(m.evolution, *ambient);
    m.ambient = std::move(*ambient);
  } else {
    m.ambient = m.evolution;
  }
  return m;
}

Market with_numeraire(const Market& m, int new_numeraire) {
  if (new_numeraire < 0 || new_numeraire >= m.n_assets())
    throw ValidationError("numeraire index out of range");
  Market out = m;
  out.numeraire = new_numeraire;
  return out;
}

Market with_ambient(const Market& m, Filtration ambient) {
  require_subfiltration(m.evolution, ambient);
  Market out = m;
  out.ambient = std::move(ambient);
  return out;
}

PriceCube discount(const Market& m) {
  PriceCube p = m.prices;
  for (std::size_t t = 0; t < p.size(); ++t) {
    const auto& num_row = m.prices[t][static_cast<std::size_t>(m.numeraire)];
    for (auto& asset_row : p[t])
      for (std::size_t s = 0; s < asset_row.size(); ++s) asset_row[s] /= num_row[s];
  }
  return p;
}

void require_predictable(const Strategy& s, const Market& m) {
  if (static_cast<int>(s.holdings.size()) != m.horizon() + 1)
    throw NotPredictable("strategy has " + std::to_string(s.holdings.size()) +
                         " holding rows, expected " + std::to_string(m.horizon() + 1));
  const Filtration& f = m.ambient;
  for (int t = 0; t <= m.horizon(); ++t) {
    const auto& row = s.holdings[static_cast<std::size_t>(t)];
    if (static_cast<int>(row.size()) != m.n_assets())
      throw NotPredictable("holding row " + std::to_string(t) + " has wrong asset count");
    int measurable_at = t == 0 ? 0 : t - 1;
    for (int i = 0; i < m.n_assets(); ++i) {
      const auto& h = row[static_cast<std::size_t>(i)];
      if (static_cast<int>(h.size()) != m.n_states())
        throw NotPredictable("holding row " + std::to_string(t) + " has wrong state count");
      for (const Block& b : f.at(measurable_at))
        if (!constant_on_block(h, b, Rat(0)))
          throw NotPredictable("holdings of " + m.asset_names[static_cast<std::size_t>(i)] +
                               " entering time " + std::to_string(t) +
                               " are not measurable at time " + std::to_string(measurable_at));
    }
  }
}

namespace {

Rat portfolio_value(const Strategy& s, const PriceCube& p, std::size_t t_holdings,
                    std::size_t t_prices, int state, int n_assets) {
  Rat acc(0);
  for (int i = 0; i < n_assets; ++i)
    acc += s.holdings[t_holdings][static_cast<std::size_t>(i)][static_cast<std::size_t>(state)] *
           p[t_prices][static_cast<std::size_t>(i)][static_cast<std::size_t>(state)];
  return acc;
}

}  // namespace

ValueProcess value_process(const Strategy& s, const Market& m) {
  require_predictable(s, m);
  PriceCube p = discount(m);
  int n = m.n_assets();
  ValueProcess v;
  v.values.assign(static_cast<std::size_t>(m.horizon()) + 1,
                  std::vector<Rat>(static_cast<std::size_t>(m.n_states()), Rat(0)));
  for (int t = 0; t <= m.horizon(); ++t)
    for (int st = 0; st < m.n_states(); ++st)
      v.values[static_cast<std::size_t>(t)][static_cast<std::size_t>(st)] =
          portfolio_value(s, p, static_cast<std::size_t>(t), static_cast<std::size_t>(t), st, n);
  for (int t = 0; t < m.horizon(); ++t)
    for (int st = 0; st < m.n_states(); ++st) {
      Rat before = portfolio_value(s, p, static_cast<std::size_t>(t),
                                   static_cast<std::size_t>(t), st, n);
      Rat after = portfolio_value(s, p, static_cast<std::size_t>(t) + 1,
                                  static_cast<std::size_t>(t), st, n);
      if (before != after)
        throw NotSelfFinancing("rebalance at time " + std::to_string(t) + ", state " +
                               m.space.atoms[static_cast<std::size_t>(st)] +
                               " changes the portfolio value by " + format_rat(after - before));
    }
  return v;
}

Strategy normalize(const Strategy& s, const Market& m) {
  ValueProcess v = value_process(s, m);
  const Filtration& f = m.ambient;

  // Fast path keeps normalized strategies as fixed points.
  bool unit_start = true, positive = true;
  for (const Rat& x : v.values[0]) unit_start = unit_start && x == 1;
  for (const auto& row : v.values)
    for (const Rat& x : row) positive = positive && sgn(x) > 0;
  if (unit_start && positive) return s;

  Strategy out = s;
  for (const Block& root : f.at(0)) {
    Rat v0 = v.values[0][static_cast<std::size_t>(root.front())];
    // Smallest shift that makes V + (a - V_0) strictly positive on the block's
    // subtree: a > V_0 - min V. Pick the least power of two strictly above,
    // with 1 as the floor when any positive value would do.
    Rat min_v = v.values[0][static_cast<std::size_t>(root.front())];
    for (std::size_t t = 0; t < v.values.size(); ++t)
      for (int st : root)
        min_v = std::min(min_v, v.values[t][static_cast<std::size_t>(st)]);
    Rat bound = v0 - min_v;
    Rat a(1);
    if (bound >= 1) {
      while (a <= bound) a *= 2;
    } else if (sgn(bound) > 0) {
      while (a / 2 > bound) a /= 2;
    }
    if (sgn(v0 - min_v + a) <= 0) throw Degenerate("normalize could not reach positivity");
    Rat shift = a - v0;
    for (std::size_t t = 0; t < out.holdings.size(); ++t)
      for (int i = 0; i < m.n_assets(); ++i)
        for (int st : root) {
          Rat& h = out.holdings[t][static_cast<std::size_t>(i)][static_cast<std::size_t>(st)];
          if (i == m.numeraire) h += shift;
          h /= a;
        }
  }
  ValueProcess check = value_process(out, m);
  for (const auto& row : check.values)
    for (const Rat& x : row)
      if (sgn(x) <= 0) throw Degenerate("normalize produced a nonpositive value");
  return out;
}

std::vector<std::vector<Rat>> benchmark(const std::vector<std::vector<Rat>>& v,
                                        const std::vector<std::vector<Rat>>& w) {
  if (v.size() != w.size()) throw BadParams("benchmark: horizon mismatch");
  std::vector<std::vector<Rat>> out = v;
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (v[t].size() != w[t].size()) throw BadParams("benchmark: width mismatch");
    for (std::size_t s = 0; s < v[t].size(); ++s) {
      if (sgn(w[t][s]) <= 0)
        throw BadParams("benchmark: numeraire process not strictly positive");
      out[t][s] = v[t][s] / w[t][s];
    }
  }
  return out;
}

void require_claim(const Claim& c, const Market& m) {
  if (static_cast<int>(c.payoff.size()) != m.n_states())
    throw NotMeasurable("claim " + c.name + " has wrong state count");
  for (std::size_t s = 0; s < c.payoff.size(); ++s)
    if (sgn(c.payoff[s]) < 0)
      throw NotMeasurable("claim " + c.name + " is negative in state " + m.space.atoms[s]);
  for (const Block& b : m.evolution.terminal())
    if (!constant_on_block(c.payoff, b, Rat(0)))
      throw NotMeasurable("claim " + c.name +
                          " is not measurable with respect to terminal price information");
}

}  // namespace finmart
