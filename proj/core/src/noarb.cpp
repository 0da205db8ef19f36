#include "finmart/noarb.hpp"

#include <algorithm>
#include <map>

#include "finmart/errors.hpp"
#include "finmart/lp.hpp"

namespace finmart {

void require_measure(const Measure& q, int n_states) {
  if (static_cast<int>(q.weights.size()) != n_states)
    throw ValidationError("measure has wrong state count");
  Rat total(0);
  for (const Rat& w : q.weights) {
    if (sgn(w) < 0) throw ValidationError("measure has a negative weight");
    total += w;
  }
  if (total != 1)
    throw ValidationError("measure weights sum to " + format_rat(total) + ", expected 1");
}

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Infeasible: return "infeasible";
    case NodeStatus::BoundaryOnly: return "boundary-only";
    case NodeStatus::Unique: return "unique";
    case NodeStatus::Multiple: return "multiple";
  }
  return "?";
}

const char* to_string(EmmClass c) {
  switch (c) {
    case EmmClass::Empty: return "empty";
    case EmmClass::Unique: return "unique";
    case EmmClass::Multiple: return "multiple";
  }
  return "?";
}

namespace {

// Children of block `b` of f.at(t) inside f.at(t+1), as block ids.
std::vector<int> children_of(const Filtration& f, int t, int block) {
  std::vector<int> out;
  const Block& b = f.at(t)[static_cast<std::size_t>(block)];
  for (int s : b) {
    int child = f.block_of(t + 1, s);
    if (std::find(out.begin(), out.end(), child) == out.end()) out.push_back(child);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Rat value_on_block(const std::vector<Rat>& row, const Block& b) {
  return row.at(static_cast<std::size_t>(b.front()));
}

// Asset-pricing equations at a node: rows (one per asset) over child weights.
// Includes the numeraire row, which doubles as the mass constraint.
void node_equations(const PriceCube& p, const Filtration& f, int t, int block,
                    const std::vector<int>& children, Mat& a, Vec& b) {
  std::size_t m = children.size();
  std::size_t n_assets = p[static_cast<std::size_t>(t)].size();
  a.assign(n_assets, Vec(m, Rat(0)));
  b.assign(n_assets, Rat(0));
  const Block& node_block = f.at(t)[static_cast<std::size_t>(block)];
  for (std::size_t i = 0; i < n_assets; ++i) {
    for (std::size_t c = 0; c < m; ++c)
      a[i][c] = value_on_block(p[static_cast<std::size_t>(t) + 1][i],
                               f.at(t + 1)[static_cast<std::size_t>(children[c])]);
    b[i] = value_on_block(p[static_cast<std::size_t>(t)][i], node_block);
  }
}

NodeSystem solve_node(const PriceCube& p, const Filtration& f, int t, int block) {
  NodeSystem node;
  node.t = t;
  node.block = block;
  node.children = children_of(f, t, block);
  std::size_t m = node.children.size();

  Mat a;
  Vec b;
  node_equations(p, f, t, block, node.children, a, b);

  // max delta subject to: pricing rows on q, q_c - delta - s_c = 0, all vars >= 0.
  std::size_t n_vars = m + 1 + m;  // q, delta, slacks
  Mat lp_a;
  Vec lp_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Vec row(n_vars, Rat(0));
    for (std::size_t c = 0; c < m; ++c) row[c] = a[i][c];
    lp_a.push_back(std::move(row));
    lp_b.push_back(b[i]);
  }
  for (std::size_t c = 0; c < m; ++c) {
    Vec row(n_vars, Rat(0));
    row[c] = Rat(1);
    row[m] = Rat(-1);
    row[m + 1 + c] = Rat(-1);
    lp_a.push_back(std::move(row));
    lp_b.push_back(Rat(0));
  }
  Vec cost(n_vars, Rat(0));
  cost[m] = Rat(1);
  LpResult lp = solve_lp(lp_a, lp_b, cost);
  if (lp.status == LpStatus::Infeasible) {
    node.status = NodeStatus::Infeasible;
    return node;
  }
  node.maxmin = lp.objective;
  node.vertices = enumerate_vertices(a, b);

  if (sgn(node.maxmin) == 0) {
    node.status = NodeStatus::BoundaryOnly;
    node.representative.assign(lp.x.begin(), lp.x.begin() + static_cast<long>(m));
    node.dim = static_cast<int>(m) - rank_of(a);
    return node;
  }
  node.dim = static_cast<int>(m) - rank_of(a);
  if (node.dim == 0) {
    node.status = NodeStatus::Unique;
    node.representative.assign(lp.x.begin(), lp.x.begin() + static_cast<long>(m));
  } else {
    node.status = NodeStatus::Multiple;
    // Analytic-center stand-in: average of the vertex set. Strictly positive
    // whenever the polytope has a strictly positive point.
    node.representative.assign(m, Rat(0));
    for (const Vec& v : node.vertices)
      for (std::size_t c = 0; c < m; ++c) node.representative[c] += v[c];
    Rat count(static_cast<long>(node.vertices.size()));
    for (std::size_t c = 0; c < m; ++c) node.representative[c] /= count;
  }
  return node;
}

}  // namespace

EmmSet find_emms(const Market& m, const Filtration& f) {
  require_subfiltration(m.evolution, f);
  PriceCube p = discount(m);
  EmmSet set;
  set.initial_blocks = static_cast<int>(f.at(0).size());
  bool any_infeasible = false, any_boundary = false, any_multiple = false;
  for (int t = 0; t < f.horizon(); ++t) {
    for (std::size_t blk = 0; blk < f.at(t).size(); ++blk) {
      NodeSystem node = solve_node(p, f, t, static_cast<int>(blk));
      if (node.status == NodeStatus::Infeasible && !set.failing_node) {
        any_infeasible = true;
        set.failing_node = {t, static_cast<int>(blk)};
      }
      if (node.status == NodeStatus::BoundaryOnly) {
        any_boundary = true;
        if (!set.failing_node) set.failing_node = {t, static_cast<int>(blk)};
      }
      if (node.status == NodeStatus::Multiple) any_multiple = true;
      set.nodes.push_back(std::move(node));
    }
  }
  if (any_infeasible || any_boundary) {
    set.classification = EmmClass::Empty;
    set.boundary_only = !any_infeasible && any_boundary;
    return set;
  }
  set.classification =
      (any_multiple || set.initial_blocks > 1) ? EmmClass::Multiple : EmmClass::Unique;

  // Assemble one equivalent measure: time-0 blocks keep their P mass, each
  // node contributes its representative transition, and atoms inside a
  // terminal block split in proportion to P.
  std::map<std::pair<int, int>, const NodeSystem*> by_node;
  for (const NodeSystem& n : set.nodes) by_node[{n.t, n.block}] = &n;
  int n_states = m.n_states();
  std::vector<Rat> block_mass(f.at(0).size(), Rat(0));
  for (std::size_t blk = 0; blk < f.at(0).size(); ++blk)
    for (int s : f.at(0)[blk]) block_mass[blk] += m.space.prob[static_cast<std::size_t>(s)];
  Measure q;
  q.weights.assign(static_cast<std::size_t>(n_states), Rat(0));
  for (int s = 0; s < n_states; ++s) {
    Rat w = block_mass[static_cast<std::size_t>(f.block_of(0, s))];
    for (int t = 0; t < f.horizon(); ++t) {
      const NodeSystem* node = by_node.at({t, f.block_of(t, s)});
      int child = f.block_of(t + 1, s);
      std::size_t pos = static_cast<std::size_t>(
          std::find(node->children.begin(), node->children.end(), child) -
          node->children.begin());
      w *= node->representative[pos];
    }
    const Block& terminal_block =
        f.terminal()[static_cast<std::size_t>(f.block_of(f.horizon(), s))];
    Rat tb_mass(0);
    for (int u : terminal_block) tb_mass += m.space.prob[static_cast<std::size_t>(u)];
    w *= m.space.prob[static_cast<std::size_t>(s)] / tb_mass;
    q.weights[static_cast<std::size_t>(s)] = w;
  }
  set.representative = std::move(q);
  return set;
}

EmmSet find_emms(const Market& m) { return find_emms(m, m.ambient); }

namespace {

// Gain-program variable layout: one holding per (time t >= 1, block of
// f.at(t-1), non-numeraire asset), split into positive and negative parts.
struct GainVars {
  struct Entry {
    int t;      // step into time t
    int block;  // block id at t-1
    int asset;
  };
  std::vector<Entry> entries;
  std::size_t count() const { return entries.size(); }
};

GainVars gain_layout(const Market& m, const Filtration& f) {
  GainVars vars;
  for (int t = 1; t <= m.horizon(); ++t)
    for (std::size_t blk = 0; blk < f.at(t - 1).size(); ++blk)
      for (int i = 0; i < m.n_assets(); ++i) {
        if (i == m.numeraire) continue;
        vars.entries.push_back({t, static_cast<int>(blk), i});
      }
  return vars;
}

// Gain coefficient of one holding variable in one state.
Rat gain_coefficient(const PriceCube& p, const Filtration& f, const GainVars::Entry& e,
                     int state) {
  if (f.block_of(e.t - 1, state) != e.block) return Rat(0);
  return p[static_cast<std::size_t>(e.t)][static_cast<std::size_t>(e.asset)]
          [static_cast<std::size_t>(state)] -
         p[static_cast<std::size_t>(e.t) - 1][static_cast<std::size_t>(e.asset)]
          [static_cast<std::size_t>(state)];
}

// Feasibility program: statewise gain - target >= 0 and expected excess >= 1.
// Returns holdings per entry when solvable.
std::optional<Vec> solve_gain_program(const Market& m, const Filtration& f,
                                      const std::vector<Rat>& target) {
  PriceCube p = discount(m);
  GainVars vars = gain_layout(m, f);
  std::size_t nv = vars.count();
  int n_states = m.n_states();
  // Columns: x+ (nv), x- (nv), statewise slacks (n_states), expectation slack.
  std::size_t cols = 2 * nv + static_cast<std::size_t>(n_states) + 1;
  Mat a;
  Vec b;
  for (int s = 0; s < n_states; ++s) {
    Vec row(cols, Rat(0));
    for (std::size_t v = 0; v < nv; ++v) {
      Rat coef = gain_coefficient(p, f, vars.entries[v], s);
      row[v] = coef;
      row[nv + v] = -coef;
    }
    row[2 * nv + static_cast<std::size_t>(s)] = Rat(-1);
    a.push_back(std::move(row));
    b.push_back(target[static_cast<std::size_t>(s)]);
  }
  Vec erow(cols, Rat(0));
  for (int s = 0; s < n_states; ++s) {
    const Rat& ps = m.space.prob[static_cast<std::size_t>(s)];
    for (std::size_t v = 0; v < nv; ++v) {
      Rat coef = gain_coefficient(p, f, vars.entries[v], s);
      erow[v] += ps * coef;
      erow[nv + v] -= ps * coef;
    }
  }
  erow[cols - 1] = Rat(-1);
  Rat expected_target(0);
  for (int s = 0; s < n_states; ++s)
    expected_target += m.space.prob[static_cast<std::size_t>(s)] * target[static_cast<std::size_t>(s)];
  a.push_back(std::move(erow));
  b.push_back(expected_target + 1);

  LpResult lp = solve_lp(a, b, Vec(cols, Rat(0)));
  if (lp.status != LpStatus::Optimal) return std::nullopt;
  Vec holdings(nv, Rat(0));
  for (std::size_t v = 0; v < nv; ++v) holdings[v] = lp.x[v] - lp.x[nv + v];
  return holdings;
}

// Completes risky holdings into a self-financing predictable strategy with
// the given initial value, using the numeraire as the balancing leg.
Strategy assemble_strategy(const Market& m, const Filtration& f, const GainVars& vars,
                           const Vec& risky, const Rat& initial_value) {
  PriceCube p = discount(m);
  int n_states = m.n_states();
  int n_assets = m.n_assets();
  Strategy s;
  s.holdings.assign(static_cast<std::size_t>(m.horizon()) + 1,
                    std::vector<std::vector<Rat>>(
                        static_cast<std::size_t>(n_assets),
                        std::vector<Rat>(static_cast<std::size_t>(n_states), Rat(0))));
  for (std::size_t v = 0; v < vars.entries.size(); ++v) {
    const auto& e = vars.entries[v];
    for (int st : f.at(e.t - 1)[static_cast<std::size_t>(e.block)])
      s.holdings[static_cast<std::size_t>(e.t)][static_cast<std::size_t>(e.asset)]
          [static_cast<std::size_t>(st)] = risky[v];
  }
  // Balance each step so the rebalance identity holds; V_0 = initial_value.
  std::vector<Rat> value(static_cast<std::size_t>(n_states), initial_value);
  for (int t = 1; t <= m.horizon(); ++t) {
    for (int st = 0; st < n_states; ++st) {
      Rat risky_cost(0);
      for (int i = 0; i < n_assets; ++i) {
        if (i == m.numeraire) continue;
        risky_cost += s.holdings[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(st)] *
                      p[static_cast<std::size_t>(t) - 1][static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(st)];
      }
      s.holdings[static_cast<std::size_t>(t)][static_cast<std::size_t>(m.numeraire)]
          [static_cast<std::size_t>(st)] = value[static_cast<std::size_t>(st)] - risky_cost;
    }
    for (int st = 0; st < n_states; ++st) {
      Rat v(0);
      for (int i = 0; i < n_assets; ++i)
        v += s.holdings[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]
                 [static_cast<std::size_t>(st)] *
             p[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]
                 [static_cast<std::size_t>(st)];
      value[static_cast<std::size_t>(st)] = v;
    }
  }
  s.holdings[0] = s.holdings[1];
  return s;
}

}  // namespace

std::optional<Strategy> find_arbitrage(const Market& m, const Filtration& f) {
  require_subfiltration(m.evolution, f);
  if (m.horizon() == 0) return std::nullopt;
  std::vector<Rat> zero(static_cast<std::size_t>(m.n_states()), Rat(0));
  auto risky = solve_gain_program(m, f, zero);
  if (!risky) return std::nullopt;
  GainVars vars = gain_layout(m, f);
  return assemble_strategy(m, f, vars, *risky, Rat(0));
}

std::optional<Strategy> find_arbitrage(const Market& m) {
  return find_arbitrage(m, m.ambient);
}

std::optional<Strategy> find_dominating(const Market& m, int asset, const Filtration& f) {
  require_subfiltration(m.evolution, f);
  if (asset < 0 || asset >= m.n_assets()) throw BadParams("asset index out of range");
  if (m.horizon() == 0) return std::nullopt;
  PriceCube p = discount(m);
  // Buy-and-hold gains of the asset: P_T - P_0 per state.
  std::vector<Rat> target(static_cast<std::size_t>(m.n_states()), Rat(0));
  for (int s = 0; s < m.n_states(); ++s)
    target[static_cast<std::size_t>(s)] =
        p[static_cast<std::size_t>(m.horizon())][static_cast<std::size_t>(asset)]
            [static_cast<std::size_t>(s)] -
        p[0][static_cast<std::size_t>(asset)][static_cast<std::size_t>(s)];
  auto risky = solve_gain_program(m, f, target);
  if (!risky) return std::nullopt;
  GainVars vars = gain_layout(m, f);
  // Same initial outlay as holding one unit of the asset (time-0 prices are 1).
  return assemble_strategy(m, f, vars, *risky, Rat(1));
}

std::optional<Strategy> find_dominating(const Market& m, int asset) {
  return find_dominating(m, asset, m.ambient);
}

Rnp rnp_from_measure(const Measure& q, const Filtration& f, const FiniteProbSpace& space) {
  require_measure(q, space.size());
  if (!q.equivalent())
    throw NotEquivalent("measure vanishes on some state, no equivalent density exists");
  int n = space.size();
  std::vector<Rat> terminal(static_cast<std::size_t>(n), Rat(0));
  for (int s = 0; s < n; ++s)
    terminal[static_cast<std::size_t>(s)] =
        q.weights[static_cast<std::size_t>(s)] / space.prob[static_cast<std::size_t>(s)];

  Rnp rnp;
  rnp.levels.values.assign(static_cast<std::size_t>(f.horizon()) + 1, {});
  for (int t = 0; t <= f.horizon(); ++t)
    rnp.levels.values[static_cast<std::size_t>(t)] =
        conditional_expectation(terminal, t, f, space);

  // Normalize to 1 per time-0 block; the ratio densities used downstream are
  // unchanged by this.
  rnp.block_scale.assign(f.at(0).size(), Rat(1));
  for (std::size_t blk = 0; blk < f.at(0).size(); ++blk) {
    Rat scale = rnp.levels.values[0][static_cast<std::size_t>(f.at(0)[blk].front())];
    rnp.block_scale[blk] = scale;
    if (scale == 1) continue;
    for (auto& row : rnp.levels.values)
      for (int s : f.at(0)[blk]) row[static_cast<std::size_t>(s)] /= scale;
  }
  rnp.terminal = rnp.levels.values.back();
  return rnp;
}

Measure measure_from_rnp(const Rnp& rnp, const FiniteProbSpace& space) {
  if (rnp.terminal.size() != static_cast<std::size_t>(space.size()))
    throw ValidationError("density has wrong state count");
  Measure q;
  q.weights.assign(rnp.terminal.size(), Rat(0));
  Rat total(0);
  for (std::size_t s = 0; s < rnp.terminal.size(); ++s) {
    if (sgn(rnp.terminal[s]) <= 0)
      throw NotEquivalent("density not strictly positive");
    q.weights[s] = rnp.terminal[s] * space.prob[s];
    total += q.weights[s];
  }
  if (total != 1)
    throw ValidationError("density does not integrate to 1 (got " + format_rat(total) + ")");
  return q;
}

std::vector<Rat> bayes_conditional(const std::vector<Rat>& x, const Measure& q, int t,
                                   const Filtration& f, const FiniteProbSpace& space) {
  std::vector<Rat> direct = conditional_expectation_w(x, t, f, q.weights);
  Rnp rnp = rnp_from_measure(q, f, space);
  std::vector<Rat> weighted(x.size(), Rat(0));
  for (std::size_t s = 0; s < x.size(); ++s)
    weighted[s] = rnp.terminal[s] * x[s];
  std::vector<Rat> numer = conditional_expectation(weighted, t, f, space);
  std::vector<Rat> via_density(x.size(), Rat(0));
  for (std::size_t s = 0; s < x.size(); ++s)
    via_density[s] = numer[s] / rnp.levels.values[static_cast<std::size_t>(t)][s];
  if (direct != via_density)
    throw Degenerate("conditional expectation routes disagree");
  return direct;
}

DeflatorReport verify_deflator(const Rnp& rnp, const Market& m) {
  PriceCube p = discount(m);
  Measure q = measure_from_rnp(rnp, m.space);
  DeflatorReport report;
  report.is_density_deflator = true;
  for (int i = 0; i < m.n_assets(); ++i) {
    AdaptedProcess deflated, plain;
    deflated.values.assign(static_cast<std::size_t>(m.horizon()) + 1, {});
    plain.values.assign(static_cast<std::size_t>(m.horizon()) + 1, {});
    for (int t = 0; t <= m.horizon(); ++t) {
      const auto& row = p[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      plain.values[static_cast<std::size_t>(t)] = row;
      std::vector<Rat> d(row.size(), Rat(0));
      for (std::size_t s = 0; s < row.size(); ++s)
        d[s] = rnp.levels.values[static_cast<std::size_t>(t)][s] * row[s];
      deflated.values[static_cast<std::size_t>(t)] = std::move(d);
    }
    DeflatorAssetCheck check;
    check.asset = i;
    check.deflated_price_martingale_under_p =
        classify_process(deflated, m.ambient, m.space).is_martingale();
    check.price_martingale_under_q =
        classify_process_w(plain, m.ambient, q.weights).is_martingale();
    if (check.deflated_price_martingale_under_p != check.price_martingale_under_q)
      throw Degenerate("deflator check routes disagree for asset " +
                       m.asset_names[static_cast<std::size_t>(i)]);
    report.is_density_deflator =
        report.is_density_deflator && check.deflated_price_martingale_under_p;
    report.assets.push_back(check);
  }
  return report;
}

bool is_emm(const Market& m, const Measure& q, const Filtration& f) {
  require_measure(q, m.n_states());
  PriceCube p = discount(m);
  for (int i = 0; i < m.n_assets(); ++i) {
    AdaptedProcess x;
    x.values.assign(static_cast<std::size_t>(m.horizon()) + 1, {});
    for (int t = 0; t <= m.horizon(); ++t)
      x.values[static_cast<std::size_t>(t)] =
          p[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    if (!classify_process_w(x, f, q.weights).is_martingale()) return false;
  }
  return true;
}

Measure change_numeraire_measure(const Measure& q, const Market& m, int new_numeraire) {
  require_measure(q, m.n_states());
  if (new_numeraire < 0 || new_numeraire >= m.n_assets())
    throw BadParams("numeraire index out of range");
  if (!is_emm(m, q, m.ambient))
    throw NotEmm("measure does not price the assets under the current numeraire");
  // Terminal ratio of the new numeraire to the old one; both start at 1, so
  // the reweighted masses sum to 1 automatically.
  PriceCube p = discount(m);
  Measure out;
  out.weights.assign(q.weights.size(), Rat(0));
  for (int s = 0; s < m.n_states(); ++s)
    out.weights[static_cast<std::size_t>(s)] =
        q.weights[static_cast<std::size_t>(s)] *
        p[static_cast<std::size_t>(m.horizon())][static_cast<std::size_t>(new_numeraire)]
            [static_cast<std::size_t>(s)];
  Market switched = with_numeraire(m, new_numeraire);
  if (!is_emm(switched, out, m.ambient))
    throw Degenerate("numeraire change did not preserve the pricing property");
  return out;
}

CompletenessReport is_complete(const Market& m, const Measure& q) {
  require_measure(q, m.n_states());
  PriceCube p = discount(m);
  const Filtration& e = m.evolution;
  CompletenessReport report;
  report.replication_rank_ok = true;
  for (int t = 0; t < e.horizon() && report.replication_rank_ok; ++t) {
    for (std::size_t blk = 0; blk < e.at(t).size(); ++blk) {
      std::vector<int> children;
      const Block& b = e.at(t)[blk];
      for (int s : b) {
        int child = e.block_of(t + 1, s);
        if (std::find(children.begin(), children.end(), child) == children.end())
          children.push_back(child);
      }
      // Child price vectors must span the full child space.
      Mat a(children.size(), Vec(static_cast<std::size_t>(m.n_assets()), Rat(0)));
      for (std::size_t c = 0; c < children.size(); ++c)
        for (int i = 0; i < m.n_assets(); ++i)
          a[c][static_cast<std::size_t>(i)] =
              p[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(i)]
                  [static_cast<std::size_t>(
                      e.at(t + 1)[static_cast<std::size_t>(children[c])].front())];
      if (rank_of(a) != static_cast<int>(children.size())) {
        report.replication_rank_ok = false;
        report.failing_node = {t, static_cast<int>(blk)};
        break;
      }
    }
  }
  report.q_immersion = is_immersed_w(m.evolution, m.ambient, q.weights);
  report.complete = report.replication_rank_ok && report.q_immersion.immersed;
  return report;
}

}  // namespace finmart
