#include "finmart/gop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "finmart/errors.hpp"
#include "finmart/lp.hpp"

namespace finmart {

namespace {

std::string node_name(int t, int block) {
  return "t=" + std::to_string(t) + ", block " + std::to_string(block);
}

// Child blocks (at t+1) of a block at t, in block-index order.
std::vector<int> children_of(const Filtration& f, int t, int blk) {
  std::vector<int> out;
  for (int state : f.at(t)[blk]) {
    int c = f.block_of(t + 1, state);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Conditional probability of each child given the node.
std::vector<Rat> child_weights(const Filtration& f, int t1, const std::vector<int>& children,
                               const std::vector<Rat>& prob) {
  std::vector<Rat> w;
  Rat total(0);
  for (int c : children) {
    Rat mass(0);
    for (int s : f.at(t1)[c]) mass += prob[s];
    w.push_back(mass);
    total += mass;
  }
  if (sgn(total) <= 0) throw Degenerate("conditioning on a zero-probability node");
  for (Rat& x : w) x /= total;
  return w;
}

struct NodeSolve {
  std::vector<Rat> fractions;
  std::vector<Rat> ratios;  // per child
  std::vector<Rat> defect;  // per asset
  bool exact = true;
  bool complete = true;
  bool redundant = false;
  double growth = 0.0;
};

// One-step pricing weights: max d s.t. sum_c w_c g[c][i] = 1 for every asset i,
// w_c - d - s_c = 0, all variables >= 0. d > 0 iff strictly positive pricing
// weights exist, i.e. the node admits no one-step arbitrage.
LpResult node_pricing_lp(const Mat& g) {
  int m = static_cast<int>(g.size());
  int n = static_cast<int>(g[0].size());
  int cols = 2 * m + 1;  // w_0..w_{m-1}, d, s_0..s_{m-1}
  Mat a;
  Vec b;
  for (int i = 0; i < n; ++i) {
    Vec row(cols, Rat(0));
    for (int c = 0; c < m; ++c) row[c] = g[c][i];
    a.push_back(row);
    b.push_back(Rat(1));
  }
  for (int c = 0; c < m; ++c) {
    Vec row(cols, Rat(0));
    row[c] = Rat(1);
    row[m] = Rat(-1);
    row[m + 1 + c] = Rat(-1);
    a.push_back(row);
    b.push_back(Rat(0));
  }
  Vec obj(cols, Rat(0));
  obj[m] = Rat(1);
  return solve_lp(a, b, obj);
}

// d/dtau of sum_c p_c log(x_c + tau * d_c), an exact rational in tau.
Rat line_slope(const std::vector<Rat>& p, const std::vector<Rat>& x,
               const std::vector<Rat>& d, const Rat& tau) {
  Rat s(0);
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (sgn(d[c]) == 0) continue;
    s += p[c] * d[c] / (x[c] + tau * d[c]);
  }
  return s;
}

struct LineOpt {
  Rat tau;
  bool exact = false;
};

// Maximizes sum_c p_c log(x_c + tau d_c) over the feasible tau interval.
// The slope is strictly decreasing from +inf to -inf, so the root is unique;
// we bisect on its exact sign, then try to recover an exact rational root.
LineOpt maximize_along(const std::vector<Rat>& p, const std::vector<Rat>& x,
                       const std::vector<Rat>& d) {
  int m = static_cast<int>(p.size());
  bool has_lo = false, has_hi = false;
  Rat lo(0), hi(0);
  for (int c = 0; c < m; ++c) {
    if (sgn(d[c]) > 0) {
      Rat cand = -x[c] / d[c];
      if (!has_lo || cand > lo) lo = cand, has_lo = true;
    } else if (sgn(d[c]) < 0) {
      Rat cand = -x[c] / d[c];
      if (!has_hi || cand < hi) hi = cand, has_hi = true;
    }
  }
  if (!has_lo || !has_hi)
    throw ArbitrageUnboundedGrowth("one-sided return direction: log growth is unbounded");

  Rat at_zero = line_slope(p, x, d, Rat(0));
  if (sgn(at_zero) == 0) return {Rat(0), true};

  // Bracket [a, b] with slope(a) > 0 > slope(b); tau = 0 is strictly feasible.
  Rat a(0), b(0);
  if (sgn(at_zero) > 0) {
    a = Rat(0);
    b = (hi + Rat(0)) / 2;
    for (int it = 0; sgn(line_slope(p, x, d, b)) > 0; ++it) {
      if (it > 400) throw Degenerate("line search failed to bracket the optimum");
      b = (b + hi) / 2;
    }
  } else {
    b = Rat(0);
    a = (lo + Rat(0)) / 2;
    for (int it = 0; sgn(line_slope(p, x, d, a)) < 0; ++it) {
      if (it > 400) throw Degenerate("line search failed to bracket the optimum");
      a = (a + lo) / 2;
    }
  }

  Rat eps = Rat(1) / rat_pow(Rat(2), 90);
  for (int it = 0; b - a > eps && it < 500; ++it) {
    Rat mid = (a + b) / 2;
    int s = sgn(line_slope(p, x, d, mid));
    if (s == 0) return {mid, true};
    if (s > 0)
      a = mid;
    else
      b = mid;
  }
  Rat guess = simplest_rational_in(a, b);
  if (sgn(line_slope(p, x, d, guess)) == 0) return {guess, true};
  return {(a + b) / 2, false};
}

// Log-optimal one-step fractions for gross return matrix g[child][asset]
// (asset 0 is the internal accounting numeraire, so column 0 is all ones)
// and child probabilities p. Exact whenever the optimum is rational.
NodeSolve solve_node_gop(const Mat& g, const std::vector<Rat>& p, int t, int blk) {
  int m = static_cast<int>(g.size());
  int n = static_cast<int>(g[0].size());

  LpResult lp = node_pricing_lp(g);
  if (lp.status != LpStatus::Optimal || sgn(lp.objective) <= 0)
    throw ArbitrageUnboundedGrowth("one-step arbitrage at " + node_name(t, blk) +
                                   ": expected log growth is unbounded");

  NodeSolve out;
  out.complete = (rank_of(g) == m);

  // Greedy maximal set of independent return columns; column 0 always enters.
  std::vector<int> basis;
  Mat chosen;  // rows are chosen columns, each of length m
  for (int i = 0; i < n && static_cast<int>(basis.size()) < m; ++i) {
    Vec col(m);
    for (int c = 0; c < m; ++c) col[c] = g[c][i];
    Mat trial = chosen;
    trial.push_back(col);
    if (rank_of(trial) == static_cast<int>(trial.size())) {
      chosen = std::move(trial);
      basis.push_back(i);
    }
  }
  out.redundant = static_cast<int>(basis.size()) < n;

  std::vector<Rat> x(m);  // optimal wealth ratio per child
  if (out.complete) {
    // Unique pricing weights w; the optimum is x_c = p_c / w_c.
    for (int c = 0; c < m; ++c) {
      if (sgn(lp.x[c]) <= 0) throw Degenerate("positive pricing weight expected");
      x[c] = p[c] / lp.x[c];
    }
    out.exact = true;
  } else {
    // Coordinate ascent over fractions on the independent non-numeraire
    // columns. x(z) = 1 + sum_k z_k d_k stays strictly positive throughout.
    int k = static_cast<int>(basis.size()) - 1;
    std::vector<std::vector<Rat>> dir(k, std::vector<Rat>(m));
    for (int j = 0; j < k; ++j)
      for (int c = 0; c < m; ++c) dir[j][c] = g[c][basis[j + 1]] - g[c][0];
    std::vector<Rat> z(k, Rat(0));
    for (int c = 0; c < m; ++c) x[c] = Rat(1);

    Rat eps = Rat(1) / rat_pow(Rat(2), 40);
    bool certified = false;
    for (int pass = 0; pass < 64 && !certified; ++pass) {
      bool moved = false;
      for (int j = 0; j < k; ++j) {
        LineOpt step = maximize_along(p, x, dir[j]);
        if (sgn(step.tau) != 0) {
          z[j] += step.tau;
          for (int c = 0; c < m; ++c) x[c] += step.tau * dir[j][c];
          moved = true;
        }
      }
      // Exact stationarity, either directly or after snapping each coordinate
      // to the simplest rational nearby.
      bool flat = true;
      for (int j = 0; j < k && flat; ++j)
        if (sgn(line_slope(p, x, dir[j], Rat(0))) != 0) flat = false;
      if (flat) {
        certified = true;
        break;
      }
      std::vector<Rat> zs(k);
      for (int j = 0; j < k; ++j) zs[j] = simplest_rational_in(z[j] - eps, z[j] + eps);
      std::vector<Rat> xs(m, Rat(1));
      for (int j = 0; j < k; ++j)
        for (int c = 0; c < m; ++c) xs[c] += zs[j] * dir[j][c];
      bool ok = true;
      for (int c = 0; c < m && ok; ++c)
        if (sgn(xs[c]) <= 0) ok = false;
      for (int j = 0; j < k && ok; ++j)
        if (sgn(line_slope(p, xs, dir[j], Rat(0))) != 0) ok = false;
      if (ok) {
        z = zs;
        x = xs;
        certified = true;
      } else if (!moved) {
        break;  // stalled short of certification
      }
    }
    out.exact = certified;
  }

  // Fractions over all assets: solve g * pi = x with minimum norm. The
  // budget constraint sum(pi) = 1 is implied by the pricing weights.
  auto pi = min_norm_solve(g, x);
  if (!pi) throw Degenerate("wealth ratios left the attainable span");
  out.fractions = *pi;
  out.ratios = x;

  out.defect.assign(n, Rat(0));
  for (int i = 0; i < n; ++i) {
    Rat d(-1);
    for (int c = 0; c < m; ++c) d += p[c] * g[c][i] / x[c];
    out.defect[i] = d;
  }
  out.growth = 0.0;
  for (int c = 0; c < m; ++c) out.growth += to_double(p[c]) * std::log(to_double(x[c]));
  return out;
}

void require_same_shape(const Market& m, const Filtration& info) {
  if (info.n_states() != m.n_states() || info.horizon() != m.horizon())
    throw BadParams("filtration does not match the market's states and horizon");
  require_subfiltration(m.evolution, info);
}

}  // namespace

GopResult compute_gop(const Market& m, const Filtration& info) {
  require_same_shape(m, info);
  int T = m.horizon();
  int ns = m.n_states();
  int na = m.n_assets();
  PriceCube dp = discount(m);

  GopResult out;
  out.filtration = info;
  out.wealth.values.assign(T + 1, std::vector<Rat>(ns, Rat(0)));
  for (int s = 0; s < ns; ++s) out.wealth.values[0][s] = Rat(1);
  out.strategy.holdings.assign(
      T + 1, std::vector<std::vector<Rat>>(na, std::vector<Rat>(ns, Rat(0))));

  // Internal accounting discounts by asset 0 regardless of the market's
  // numeraire, so fractions and ratios do not depend on that choice.
  std::vector<Rat> what(ns, Rat(1));  // asset-0-discounted wealth
  for (int t = 0; t < T; ++t) {
    const Partition& level = info.at(t);
    for (int blk = 0; blk < static_cast<int>(level.size()); ++blk) {
      int s0 = level[blk][0];
      std::vector<int> kids = children_of(info, t, blk);
      int mchild = static_cast<int>(kids.size());
      Mat g(mchild, Vec(na));
      for (int ci = 0; ci < mchild; ++ci) {
        int sc = info.at(t + 1)[kids[ci]][0];
        for (int i = 0; i < na; ++i)
          g[ci][i] = (m.prices[t + 1][i][sc] / m.prices[t + 1][0][sc]) /
                     (m.prices[t][i][s0] / m.prices[t][0][s0]);
      }
      std::vector<Rat> p = child_weights(info, t + 1, kids, m.space.prob);
      NodeSolve sol = solve_node_gop(g, p, t, blk);

      GopNode node;
      node.t = t;
      node.block = blk;
      node.fractions = sol.fractions;
      node.wealth_ratio = sol.ratios;
      node.asset_defect = sol.defect;
      node.exact = sol.exact;
      node.complete_node = sol.complete;
      node.growth = sol.growth;
      out.nodes.push_back(std::move(node));
      out.exact = out.exact && sol.exact;
      out.redundant_assets = out.redundant_assets || sol.redundant;

      Rat block_mass(0);
      for (int s : level[blk]) block_mass += m.space.prob[s];
      out.log_growth += to_double(block_mass) * sol.growth;

      // Holdings for (t, t+1] in units, from fractions of current wealth.
      Rat wh = what[s0];  // read before children overwrite the row
      Rat w_here = wh * dp[t][0][s0];  // market-discounted wealth on the block
      for (int i = 0; i < na; ++i) {
        Rat h = sol.fractions[i] * w_here / dp[t][i][s0];
        for (int s : level[blk]) out.strategy.holdings[t + 1][i][s] = h;
      }
      for (int ci = 0; ci < mchild; ++ci)
        for (int s : info.at(t + 1)[kids[ci]]) what[s] = wh * sol.ratios[ci];
    }
    for (int s = 0; s < ns; ++s) out.wealth.values[t + 1][s] = what[s] * dp[t + 1][0][s];
  }
  if (T > 0) out.strategy.holdings[0] = out.strategy.holdings[1];
  return out;
}

GopResult compute_gop(const Market& m) { return compute_gop(m, m.ambient); }

namespace {

struct SplitMix {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

// Random self-financing strategy value with V_0 = 1, made strictly positive
// by the same shift-and-scale used by normalize(): risky legs are sixteenths
// in [-1, 1], the numeraire leg balances the books.
std::vector<std::vector<Rat>> random_normalized_value(const Market& m, const Filtration& info,
                                                      SplitMix& rng) {
  int T = m.horizon();
  int ns = m.n_states();
  int na = m.n_assets();
  PriceCube dp = discount(m);
  std::vector<std::vector<Rat>> v(T + 1, std::vector<Rat>(ns, Rat(1)));
  for (int t = 0; t < T; ++t) {
    const Partition& level = info.at(t);
    std::vector<std::vector<Rat>> h(na, std::vector<Rat>(ns, Rat(0)));
    for (const Block& blk : level) {
      int s0 = blk[0];
      Rat risky_cost(0);
      for (int i = 0; i < na; ++i) {
        if (i == m.numeraire) continue;
        Rat hi = rat(static_cast<long>(rng.next() % 33) - 16, 16);
        for (int s : blk) h[i][s] = hi;
        risky_cost += hi * dp[t][i][s0];
      }
      Rat hn = v[t][s0] - risky_cost;  // discounted numeraire price is 1
      for (int s : blk) h[m.numeraire][s] = hn;
    }
    for (int s = 0; s < ns; ++s) {
      Rat val(0);
      for (int i = 0; i < na; ++i) val += h[i][s] * dp[t + 1][i][s];
      v[t + 1][s] = val;
    }
  }
  // Shift and scale per time-0 block: a is the smallest power of two strictly
  // above 1 - min V, so V' = (V + a - 1) / a is positive with V'_0 = 1.
  for (const Block& blk0 : info.at(0)) {
    std::vector<int> reach(blk0.begin(), blk0.end());
    Rat vmin = v[0][reach[0]];
    for (int t = 0; t <= T; ++t)
      for (int s : reach)
        if (v[t][s] < vmin) vmin = v[t][s];
    Rat bound = Rat(1) - vmin;
    Rat a(1);
    if (sgn(bound) > 0) {
      if (bound >= 1)
        while (a <= bound) a *= 2;
      else
        while (a / 2 > bound) a /= 2;
    }
    for (int t = 0; t <= T; ++t)
      for (int s : reach) v[t][s] = (v[t][s] + (a - 1)) / a;
  }
  return v;
}

BenchmarkedCheck check_benchmarked(const std::string& label,
                                   const std::vector<std::vector<Rat>>& value,
                                   const ValueProcess& w, const Market& m,
                                   const Filtration& info, const Partition& cond,
                                   int stat_t, int stat_T, const Rat& tol) {
  int T = m.horizon();
  int ns = m.n_states();
  AdaptedProcess q;
  q.values.assign(T + 1, std::vector<Rat>(ns));
  for (int t = 0; t <= T; ++t)
    for (int s = 0; s < ns; ++s) q.values[t][s] = value[t][s] / w.values[t][s];

  BenchmarkedCheck out;
  out.label = label;
  ClassifyResult cls = classify_process(q, info, m.space, tol);
  out.cls = cls.cls;
  out.supermartingale =
      cls.cls == ProcessClass::Martingale || cls.cls == ProcessClass::Supermartingale;
  out.witness = cls.worst_up;

  for (int b = 0; b < static_cast<int>(cond.size()); ++b) {
    const Block& blk = cond[b];
    std::vector<Rat> ratio, weight;
    Rat mass(0), mean(0);
    for (int s : blk) {
      Rat r = q.values[stat_T][s] / q.values[stat_t][s];
      ratio.push_back(r);
      weight.push_back(m.space.prob[s]);
      mass += m.space.prob[s];
      mean += m.space.prob[s] * r;
    }
    if (sgn(mass) <= 0) throw Degenerate("conditioning block has zero probability");
    ConditionalStat st;
    st.block = b;
    st.mean_excess = mean / mass - 1;
    st.log_sign = sign_of_weighted_log_sum(ratio, weight);
    out.stats.push_back(std::move(st));
  }
  return out;
}

}  // namespace

NumeraireReport verify_numeraire_portfolio(const ValueProcess& w, const Market& m,
                                           const Filtration& info,
                                           const Partition* conditioning, int stat_t,
                                           int stat_T, int n_random, std::uint64_t seed,
                                           const Rat& tol) {
  require_same_shape(m, info);
  int T = m.horizon();
  int ns = m.n_states();
  if (static_cast<int>(w.values.size()) != T + 1)
    throw BadParams("candidate wealth has the wrong horizon");
  for (const auto& row : w.values) {
    if (static_cast<int>(row.size()) != ns)
      throw BadParams("candidate wealth has the wrong number of states");
    for (const Rat& x : row)
      if (sgn(x) <= 0) throw BadParams("candidate wealth must be strictly positive");
  }
  if (stat_T < 0) stat_T = T;
  if (stat_t < 0 || stat_t > stat_T || stat_T > T)
    throw BadParams("conditional statistics need 0 <= t <= T <= horizon");
  Partition cond = conditioning ? normalize_partition(*conditioning)
                                : info.at(stat_t);
  require_partition(cond, ns, "conditioning partition");
  if (!refines(info.at(stat_t), cond))
    throw NotMeasurable("conditioning partition is not coarser than the information at t");

  NumeraireReport out;
  out.stat_t = stat_t;
  out.stat_T = stat_T;
  PriceCube dp = discount(m);
  for (int i = 0; i < m.n_assets(); ++i) {
    std::vector<std::vector<Rat>> value(T + 1, std::vector<Rat>(ns));
    for (int t = 0; t <= T; ++t) value[t] = dp[t][i];
    out.assets.push_back(
        check_benchmarked(m.asset_names[i], value, w, m, info, cond, stat_t, stat_T, tol));
  }
  SplitMix rng{seed ^ 0x5bf03635ull};
  for (int k = 0; k < n_random && T > 0; ++k) {
    auto value = random_normalized_value(m, info, rng);
    out.strategies.push_back(check_benchmarked("random-" + std::to_string(k + 1), value, w,
                                               m, info, cond, stat_t, stat_T, tol));
  }
  auto fold = [&](const BenchmarkedCheck& c) {
    out.all_supermartingales = out.all_supermartingales && c.supermartingale;
    for (const ConditionalStat& st : c.stats)
      if (st.mean_excess > tol || st.log_sign > 0) out.stats_consistent = false;
  };
  for (const auto& c : out.assets) fold(c);
  for (const auto& c : out.strategies) fold(c);
  return out;
}

MinimalPriceReport law_of_minimal_price_bound(const Market& m, const GopResult& gop, int t,
                                              int T, const Rat& tol) {
  int horizon = m.horizon();
  if (t < 0 || t > T || T > horizon) throw BadParams("need 0 <= t <= T <= horizon");
  PriceCube dp = discount(m);
  const auto& w = gop.wealth.values;

  MinimalPriceReport out;
  out.t = t;
  out.T = T;
  const Partition& level = m.ambient.at(t);
  for (int i = 0; i < m.n_assets(); ++i) {
    for (int b = 0; b < static_cast<int>(level.size()); ++b) {
      const Block& blk = level[b];
      Rat mass(0), acc(0);
      for (int s : blk) {
        mass += m.space.prob[s];
        acc += m.space.prob[s] * dp[T][i][s] * w[t][s] / w[T][s];
      }
      MinimalPriceCell cell;
      cell.asset = i;
      cell.block = b;
      cell.lhs = dp[t][i][blk[0]];
      cell.rhs = acc / mass;
      cell.holds = cell.rhs - cell.lhs <= tol;
      cell.tight = abs(cell.lhs - cell.rhs) <= tol;
      out.holds = out.holds && cell.holds;
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

std::vector<Rat> real_world_value(const Claim& c, const Market& m, const GopResult& gop,
                                  int t) {
  require_claim(c, m);
  int T = m.horizon();
  int ns = m.n_states();
  if (t < 0 || t > T) throw BadParams("valuation time outside the horizon");
  const auto& w = gop.wealth.values;

  std::vector<Rat> y(ns);
  for (int s = 0; s < ns; ++s)
    y[s] = c.payoff[s] / m.prices[T][m.numeraire][s] / w[T][s];
  std::vector<Rat> cond = conditional_expectation(y, t, gop.filtration, m.space);
  std::vector<Rat> v(ns);
  for (int s = 0; s < ns; ++s) v[s] = w[t][s] * cond[s];

  // When a unique equivalent pricing measure exists, the market is complete
  // and the portfolio was computed on the full ambient information, the
  // risk-neutral route must give the same value; disagreement would mean a
  // broken invariant, not bad input.
  bool same_info = true;
  for (int k = 0; k <= T && same_info; ++k)
    same_info = same_partition(gop.filtration.at(k), m.ambient.at(k));
  if (same_info) {
    EmmSet emms = find_emms(m, m.evolution);
    if (emms.classification == EmmClass::Unique && emms.representative &&
        is_emm(m, *emms.representative, m.ambient)) {
      std::vector<Rat> yq(ns);
      for (int s = 0; s < ns; ++s) yq[s] = c.payoff[s] / m.prices[T][m.numeraire][s];
      std::vector<Rat> rn =
          conditional_expectation_w(yq, t, gop.filtration, emms.representative->weights);
      for (int s = 0; s < ns; ++s)
        if (v[s] != rn[s])
          throw Degenerate("real-world and risk-neutral values disagree on claim " + c.name);
    }
  }
  return v;
}

Replication replicate(const Claim& c, const Market& m, const Measure& q) {
  require_measure(q, m.n_states());
  require_claim(c, m);
  int T = m.horizon();
  int ns = m.n_states();
  int na = m.n_assets();
  PriceCube dp = discount(m);
  const Filtration& e = m.evolution;

  Replication out;
  out.value.values.assign(T + 1, std::vector<Rat>(ns, Rat(0)));
  out.strategy.holdings.assign(
      T + 1, std::vector<std::vector<Rat>>(na, std::vector<Rat>(ns, Rat(0))));
  for (int s = 0; s < ns; ++s)
    out.value.values[T][s] = c.payoff[s] / m.prices[T][m.numeraire][s];

  for (int t = T - 1; t >= 0; --t) {
    const Partition& level = e.at(t);
    for (int blk = 0; blk < static_cast<int>(level.size()); ++blk) {
      std::vector<int> kids = children_of(e, t, blk);
      Mat a;
      Vec b;
      for (int cblk : kids) {
        int sc = e.at(t + 1)[cblk][0];
        Vec row(na);
        for (int i = 0; i < na; ++i) row[i] = dp[t + 1][i][sc];
        a.push_back(row);
        b.push_back(out.value.values[t + 1][sc]);
      }
      auto h = min_norm_solve(a, b);
      if (!h)
        throw NotReplicable("claim " + c.name + " is not attainable at " + node_name(t, blk));
      int s0 = level[blk][0];
      Rat val(0);
      for (int i = 0; i < na; ++i) val += (*h)[i] * dp[t][i][s0];
      for (int s : level[blk]) {
        for (int i = 0; i < na; ++i) out.strategy.holdings[t + 1][i][s] = (*h)[i];
        out.value.values[t][s] = val;
      }
    }
  }
  if (T > 0) out.strategy.holdings[0] = out.strategy.holdings[1];

  // Any martingale measure must reproduce the same value by conditioning.
  if (q.equivalent() && is_emm(m, q, e)) {
    for (int t = 0; t < T; ++t) {
      std::vector<Rat> cond =
          conditional_expectation_w(out.value.values[T], t, e, q.weights);
      for (int s = 0; s < ns; ++s)
        if (cond[s] != out.value.values[t][s])
          throw Degenerate("replication value disagrees with martingale conditioning");
    }
  }
  return out;
}

HypothesisReport martingale_hypothesis_check(const Market& m, const Filtration& info,
                                             const Rat& tol) {
  require_same_shape(m, info);
  GopResult gop = compute_gop(m, m.evolution);
  const auto& w = gop.wealth.values;
  int T = m.horizon();
  int ns = m.n_states();
  PriceCube dp = discount(m);

  HypothesisReport out;
  for (int i = 0; i < m.n_assets(); ++i) {
    AdaptedProcess q;
    q.values.assign(T + 1, std::vector<Rat>(ns));
    for (int t = 0; t <= T; ++t)
      for (int s = 0; s < ns; ++s) q.values[t][s] = dp[t][i][s] / w[t][s];
    ClassifyResult cls = classify_process(q, info, m.space, tol);
    out.asset_class.push_back(cls.cls);
    if (!cls.is_martingale()) {
      out.consistent = false;
      if (!out.witness) {
        const DefectCell* cell =
            cls.worst_up ? &*cls.worst_up : (cls.worst_down ? &*cls.worst_down : nullptr);
        if (cell) {
          HypothesisWitness wit;
          wit.asset = i;
          wit.t = cell->t;
          wit.block = cell->block;
          int rep = info.at(cell->t)[cell->block][0];
          wit.current = q.values[cell->t][rep];
          wit.conditional_mean = wit.current + cell->defect;
          out.witness = wit;
        }
      }
    }
  }

  // With a unique pricing measure, its density process must be 1 / wealth.
  EmmSet emms = find_emms(m, m.evolution);
  if (emms.classification == EmmClass::Unique && emms.representative) {
    out.lambda_checked = true;
    Rnp rnp = rnp_from_measure(*emms.representative, m.evolution, m.space);
    for (int t = 0; t <= T && out.lambda_is_inverse_wealth; ++t)
      for (int s = 0; s < ns; ++s)
        if (rnp.levels.values[t][s] * w[t][s] != Rat(1)) {
          out.lambda_is_inverse_wealth = false;
          break;
        }
  }

  // Same verdict from undiscounted prices: S_t = E(S_T * N_t / N_T | info_t)
  // where N = numeraire price * wealth is the portfolio in nominal units.
  bool nominal_ok = true;
  for (int i = 0; i < m.n_assets() && nominal_ok; ++i) {
    for (int t = 0; t < T && nominal_ok; ++t) {
      const Partition& level = info.at(t);
      for (int b = 0; b < static_cast<int>(level.size()) && nominal_ok; ++b) {
        Rat mass(0), acc(0);
        for (int s : level[b]) {
          Rat nt = m.prices[t][m.numeraire][s] * w[t][s];
          Rat nT = m.prices[T][m.numeraire][s] * w[T][s];
          mass += m.space.prob[s];
          acc += m.space.prob[s] * m.prices[T][i][s] * nt / nT;
        }
        Rat lhs = m.prices[t][i][level[b][0]];
        if (abs(acc / mass - lhs) > tol) nominal_ok = false;
      }
    }
  }
  out.nominal_route_agrees = (nominal_ok == out.consistent);
  return out;
}

}  // namespace finmart
