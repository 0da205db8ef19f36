#include "finmart/commands.hpp"

#include <json.hpp>
#include <sstream>

#include "finmart/errors.hpp"
#include "finmart/gop.hpp"
#include "finmart/market.hpp"
#include "finmart/noarb.hpp"
#include "finmart/prob.hpp"
#include "finmart/sensitivity.hpp"

namespace finmart {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kSchema = "finmart-report/1";
constexpr const char* kCollapseNote =
    "finite horizon: NWA = ND and NFLVR collapses to NA, and NA holds iff the set U of "
    "equivalent martingale measures is nonempty; M extends U by boundary (absolutely "
    "continuous) measures and L is their density processes";

Rat effective_tol(const Scenario& s, const RunOptions& o) {
  if (o.tol_set) return o.tol;
  return s.rational_mode ? Rat(0) : s.tol;
}

Market market_from(const Scenario& s, const RunOptions& o) {
  Market m = build_market(s);
  if (!o.numeraire.empty() && o.numeraire != m.asset_names[m.numeraire])
    m = with_numeraire(m, m.asset_index(o.numeraire));
  return m;
}

std::string rats(const std::vector<Rat>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_rat(v[i]);
  }
  return out;
}

json rats_json(const std::vector<Rat>& v) {
  json out = json::array();
  for (const Rat& x : v) out.push_back(format_rat(x));
  return out;
}

json market_json(const Market& m, const Scenario& s) {
  json out;
  out["states"] = m.n_states();
  out["horizon"] = m.horizon();
  out["assets"] = m.asset_names;
  out["numeraire"] = m.asset_names[m.numeraire];
  json scale;
  for (int i = 0; i < m.n_assets(); ++i)
    scale[m.asset_names[i]] = format_rat(m.initial_scale[i]);
  out["initial_scale"] = scale;
  out["mode"] = s.rational_mode ? "rational" : "float";
  return out;
}

json head_json(const std::string& command, const Scenario& s, const RunOptions& o,
               const Market& m) {
  json out;
  out["schema"] = kSchema;
  out["command"] = command;
  out["seed"] = o.seed;
  out["tol"] = format_rat(effective_tol(s, o));
  out["market"] = market_json(m, s);
  return out;
}

const char* emm_class_text(const EmmSet& set) {
  switch (set.classification) {
    case EmmClass::Empty:
      return set.boundary_only ? "empty (boundary only: M nonempty, U empty)" : "empty";
    case EmmClass::Unique:
      return "unique";
    default:
      return "multiple";
  }
}

json emm_set_json(const EmmSet& set) {
  json out;
  out["class"] = to_string(set.classification);
  out["boundary_only"] = set.boundary_only;
  if (set.failing_node)
    out["failing_node"] = {{"t", set.failing_node->first}, {"block", set.failing_node->second}};
  out["initial_blocks"] = set.initial_blocks;
  return out;
}

std::string node_label(int t, int block) {
  return "t=" + std::to_string(t) + " block=" + std::to_string(block);
}

struct Report {
  std::ostringstream text;
  json body;
  bool verdict = true;
};

RunResult finish(Report& r, const RunOptions& o) {
  RunResult out;
  out.verdict = r.verdict;
  r.body["verdict"] = r.verdict ? "pass" : "negative";
  r.text << "verdict: " << (r.verdict ? "pass" : "negative") << '\n';
  out.text = r.text.str();
  out.json = r.body.dump(2) + "\n";
  out.exit_code = (!r.verdict && o.strict) ? 2 : 0;
  return out;
}

// ---------------------------------------------------------------------------

RunResult cmd_check(const Scenario& s, const RunOptions& o) {
  Market m = market_from(s, o);
  Rat tol = effective_tol(s, o);
  Report r;
  r.body = head_json("check", s, o, m);
  r.text << "market: " << m.n_assets() << " assets, " << m.n_states() << " states, horizon "
         << m.horizon() << ", numeraire " << m.asset_names[m.numeraire] << '\n';

  auto arb = find_arbitrage(m);
  r.text << "arbitrage (NA): " << (arb ? "witness found" : "none") << '\n';
  json arb_json;
  arb_json["found"] = arb.has_value();
  if (arb) {
    std::vector<Rat> final_value = value_process(*arb, m).values.back();
    r.text << "  witness final value: " << rats(final_value) << '\n';
    arb_json["witness_final_value"] = rats_json(final_value);
  }
  r.body["arbitrage"] = arb_json;

  bool any_dom = false;
  json dom_json = json::array();
  for (int i = 0; i < m.n_assets(); ++i) {
    auto dom = find_dominating(m, i);
    any_dom = any_dom || dom.has_value();
    dom_json.push_back({{"asset", m.asset_names[i]}, {"found", dom.has_value()}});
    if (dom) r.text << "dominance (ND): asset " << m.asset_names[i] << " is dominated\n";
  }
  if (!any_dom) r.text << "dominance (ND): none\n";
  r.body["dominance"] = dom_json;
  r.text << "weak arbitrage (NWA): " << ((arb || any_dom) ? "violated" : "none") << '\n';
  r.text << "note: " << kCollapseNote << '\n';
  r.body["collapse_note"] = kCollapseNote;

  EmmSet evo = find_emms(m, m.evolution);
  EmmSet amb = find_emms(m, m.ambient);
  r.text << "U (price information): " << emm_class_text(evo) << '\n';
  r.text << "U (ambient information): " << emm_class_text(amb) << '\n';
  r.body["emm"] = {{"evolution", emm_set_json(evo)}, {"ambient", emm_set_json(amb)}};

  json comp_json;
  bool complete = false;
  if (evo.representative) {
    CompletenessReport comp = is_complete(m, *evo.representative);
    complete = comp.complete;
    comp_json["checked"] = true;
    comp_json["complete"] = comp.complete;
    comp_json["replication_rank_ok"] = comp.replication_rank_ok;
    comp_json["q_immersion_ok"] = comp.q_immersion.immersed;
    if (comp.failing_node)
      comp_json["failing_node"] = {{"t", comp.failing_node->first},
                                   {"block", comp.failing_node->second}};
    r.text << "completeness: " << (comp.complete ? "complete" : "incomplete");
    if (comp.failing_node)
      r.text << " (fails at " << node_label(comp.failing_node->first, comp.failing_node->second)
             << ")";
    r.text << '\n';
  } else {
    comp_json["checked"] = false;
    comp_json["complete"] = false;
    r.text << "completeness: not applicable (no martingale measure)\n";
  }
  r.body["completeness"] = comp_json;

  SensitivityReport sens = sensitivity_report(m, tol);
  r.text << "sensitivity: " << (sens.sensitive ? "sensitive" : "not sensitive") << '\n';
  json sens_json;
  sens_json["sensitive"] = sens.sensitive;
  if (sens.conditional_route.witness) {
    const ImmersionWitness& w = *sens.conditional_route.witness;
    r.text << "  witness: terminal price block " << w.terminal_block << " at t=" << w.t
           << ": P=" << format_rat(w.p_given_fine) << " given ambient block " << w.fine_block
           << " vs P=" << format_rat(w.p_given_coarse) << " given prices alone\n";
    sens_json["witness"] = {{"t", w.t},
                            {"terminal_block", w.terminal_block},
                            {"ambient_block", w.fine_block},
                            {"p_given_ambient", format_rat(w.p_given_fine)},
                            {"p_given_prices", format_rat(w.p_given_coarse)}};
  }
  r.body["sensitivity"] = sens_json;

  bool efficient = sens.sensitive && amb.classification != EmmClass::Empty;
  r.text << "efficiency (U(ambient) nonempty and sensitive): "
         << (efficient ? "efficient" : "not efficient") << '\n';
  r.body["efficiency"] = {{"efficient", efficient}};

  (void)complete;  // reported above; incompleteness is not a defect
  r.verdict = !arb && !any_dom && efficient;
  return finish(r, o);
}

RunResult cmd_emm(const Scenario& s, const RunOptions& o) {
  Market m = market_from(s, o);
  Report r;
  r.body = head_json("emm", s, o, m);

  EmmSet evo = find_emms(m, m.evolution);
  EmmSet amb = find_emms(m, m.ambient);
  r.text << "U (price information): " << emm_class_text(evo) << '\n';
  r.text << "U (ambient information): " << emm_class_text(amb) << '\n';
  r.body["evolution"] = emm_set_json(evo);
  r.body["ambient"] = emm_set_json(amb);
  r.text << "note: " << kCollapseNote << '\n';
  r.body["collapse_note"] = kCollapseNote;

  json nodes = json::array();
  for (const NodeSystem& n : evo.nodes) {
    json nj;
    nj["t"] = n.t;
    nj["block"] = n.block;
    nj["status"] = to_string(n.status);
    nj["dim"] = n.dim;
    nj["maxmin"] = format_rat(n.maxmin);
    nj["weights"] = rats_json(n.representative);
    nodes.push_back(nj);
    r.text << "node " << node_label(n.t, n.block) << ": " << to_string(n.status)
           << ", dim " << n.dim << ", weights " << rats(n.representative) << '\n';
  }
  r.body["nodes"] = nodes;

  if (evo.representative) {
    r.text << "representative measure:\n";
    json meas;
    for (int st = 0; st < m.n_states(); ++st) {
      r.text << "  " << m.space.atoms[st] << " "
             << format_rat(evo.representative->weights[st]) << '\n';
      meas[m.space.atoms[st]] = format_rat(evo.representative->weights[st]);
    }
    r.body["representative"] = meas;

    Rnp rnp = rnp_from_measure(*evo.representative, m.evolution, m.space);
    json lam = json::array();
    for (const auto& row : rnp.levels.values) lam.push_back(rats_json(row));
    r.body["density_process"] = lam;
    r.text << "density process (per time, per state): ";
    for (std::size_t t = 0; t < rnp.levels.values.size(); ++t)
      r.text << (t ? " | " : "") << rats(rnp.levels.values[t]);
    r.text << '\n';

    DeflatorReport def = verify_deflator(rnp, m);
    r.body["deflator_ok"] = def.is_density_deflator;
    r.text << "deflator check (L membership, both routes): "
           << (def.is_density_deflator ? "pass" : "fail") << '\n';
  }

  r.verdict = evo.classification != EmmClass::Empty;
  return finish(r, o);
}

RunResult cmd_gop(const Scenario& s, const RunOptions& o) {
  Market m = market_from(s, o);
  Rat tol = effective_tol(s, o);
  Report r;
  r.body = head_json("gop", s, o, m);

  GopResult g = compute_gop(m);
  r.text << "growth-optimal portfolio (ambient information)\n";
  json nodes = json::array();
  for (const GopNode& n : g.nodes) {
    json nj;
    nj["t"] = n.t;
    nj["block"] = n.block;
    json fr;
    for (int i = 0; i < m.n_assets(); ++i) fr[m.asset_names[i]] = format_rat(n.fractions[i]);
    nj["fractions"] = fr;
    nj["wealth_ratios"] = rats_json(n.wealth_ratio);
    nj["asset_defects"] = rats_json(n.asset_defect);
    nj["exact"] = n.exact;
    nj["complete_node"] = n.complete_node;
    nodes.push_back(nj);
    r.text << "node " << node_label(n.t, n.block) << ": fractions";
    for (int i = 0; i < m.n_assets(); ++i)
      r.text << ' ' << m.asset_names[i] << '=' << format_rat(n.fractions[i]);
    r.text << (n.exact ? " (exact)" : " (approximate)") << '\n';
  }
  r.body["nodes"] = nodes;
  json wealth = json::array();
  for (const auto& row : g.wealth.values) wealth.push_back(rats_json(row));
  r.body["wealth"] = wealth;
  r.body["exact"] = g.exact;
  r.body["redundant_assets"] = g.redundant_assets;
  r.body["log_growth"] = g.log_growth;
  r.text << "terminal wealth: " << rats(g.wealth.values.back()) << '\n';
  r.text << "expected log growth: " << g.log_growth << '\n';

  NumeraireReport np = verify_numeraire_portfolio(g.wealth, m, m.ambient, nullptr, 0, -1, 8,
                                                  o.seed, tol);
  r.text << "benchmarked assets are supermartingales: "
         << (np.all_supermartingales ? "yes" : "NO") << '\n';
  r.text << "conditional statistics nonpositive: " << (np.stats_consistent ? "yes" : "NO")
         << '\n';
  json npj;
  npj["all_supermartingales"] = np.all_supermartingales;
  npj["stats_consistent"] = np.stats_consistent;
  npj["random_strategies"] = static_cast<int>(np.strategies.size());
  r.body["numeraire_checks"] = npj;

  r.verdict = np.all_supermartingales && np.stats_consistent;
  return finish(r, o);
}

RunResult cmd_price(const Scenario& s, const RunOptions& o) {
  if (o.claim.empty()) throw BadParams("price needs --claim <name>");
  Market m = market_from(s, o);
  Rat tol = effective_tol(s, o);
  const ScenarioClaim& sc = find_claim(s, o.claim);
  Claim claim = claim_payoff(s, sc);
  int t = o.t;
  if (t < 0 || t > m.horizon()) throw BadParams("--t outside the horizon");

  Report r;
  r.body = head_json("price", s, o, m);
  r.body["claim"] = sc.name;
  r.body["expr"] = format_claim_expr(sc.expr);
  r.body["t"] = t;

  EmmSet evo = find_emms(m, m.evolution);
  if (!evo.representative)
    throw BadParams("no martingale measure: the market admits arbitrage, nothing to price");

  // Risk-neutral route: conditional expectation of the discounted payoff
  // under a martingale measure for the price information.
  std::vector<Rat> y(m.n_states());
  for (int st = 0; st < m.n_states(); ++st)
    y[st] = claim.payoff[st] / m.prices[m.horizon()][m.numeraire][st];
  std::vector<Rat> rn =
      conditional_expectation_w(y, t, m.evolution, evo.representative->weights);

  // Real-world route: benchmark by the growth-optimal wealth under P.
  GopResult g = compute_gop(m);
  std::vector<Rat> rw = real_world_value(claim, m, g, t);

  bool equal = true;
  for (int st = 0; st < m.n_states(); ++st)
    if (abs(rn[st] - rw[st]) > tol) equal = false;

  json per_state = json::array();
  r.text << "claim " << sc.name << " = " << format_claim_expr(sc.expr) << " at t=" << t
         << '\n';
  for (int st = 0; st < m.n_states(); ++st) {
    Rat cur_rn = rn[st] * m.prices[t][m.numeraire][st];
    Rat cur_rw = rw[st] * m.prices[t][m.numeraire][st];
    per_state.push_back({{"state", m.space.atoms[st]},
                         {"risk_neutral", format_rat(cur_rn)},
                         {"real_world", format_rat(cur_rw)},
                         {"risk_neutral_discounted", format_rat(rn[st])},
                         {"real_world_discounted", format_rat(rw[st])}});
    r.text << "  " << m.space.atoms[st] << ": risk-neutral " << format_rat(cur_rn)
           << ", real-world " << format_rat(cur_rw) << '\n';
  }
  r.body["values"] = per_state;
  r.body["risk_neutral_unique"] = (evo.classification == EmmClass::Unique);
  r.body["routes_equal"] = equal;
  r.text << "risk-neutral measure unique: "
         << (evo.classification == EmmClass::Unique ? "yes" : "no") << '\n';
  r.text << "routes equal: " << (equal ? "yes" : "NO") << '\n';

  r.verdict = true;  // pricing reports values; equality is informational
  return finish(r, o);
}

RunResult cmd_sensitivity(const Scenario& s, const RunOptions& o) {
  Market m = market_from(s, o);
  Rat tol = effective_tol(s, o);
  Report r;
  r.body = head_json("sensitivity", s, o, m);

  SensitivityReport rep = sensitivity_report(m, tol);
  r.text << "conditional-probability route: " << (rep.conditional_route.immersed ? "pass" : "fail")
         << '\n';
  r.text << "projection-measurability route: " << (rep.projection_route ? "pass" : "fail")
         << '\n';
  r.text << "level identity (prices at t = ambient at t meet terminal price events): "
         << (rep.level_identity ? "holds" : "fails") << '\n';
  json sj;
  sj["sensitive"] = rep.sensitive;
  sj["conditional_route"] = rep.conditional_route.immersed;
  sj["projection_route"] = rep.projection_route;
  sj["level_identity"] = rep.level_identity;
  if (rep.conditional_route.witness) {
    const ImmersionWitness& w = *rep.conditional_route.witness;
    sj["witness"] = {{"t", w.t},
                     {"terminal_block", w.terminal_block},
                     {"ambient_block", w.fine_block},
                     {"p_given_ambient", format_rat(w.p_given_fine)},
                     {"p_given_prices", format_rat(w.p_given_coarse)}};
    r.text << "witness: terminal block " << w.terminal_block << " at t=" << w.t << ": "
           << format_rat(w.p_given_fine) << " (ambient) vs " << format_rat(w.p_given_coarse)
           << " (prices)\n";
  }
  r.body["sensitivity"] = sj;

  SdfReport sdf = sdf_compatibility(m, tol);
  json dj;
  dj["downward_checked"] = sdf.downward_checked;
  dj["downward_ok"] = sdf.downward_ok;
  dj["upward_checked"] = sdf.upward_checked;
  dj["upward_ok"] = sdf.upward_ok;
  if (sdf.upward_witness) {
    const SdfCell& c = *sdf.upward_witness;
    dj["upward_witness"] = {{"asset", m.asset_names[c.asset]}, {"t", c.t},
                            {"block", c.block},   {"price", format_rat(c.lhs)},
                            {"deflated_expectation", format_rat(c.rhs)}};
    r.text << "pricing-density transport up fails: asset " << m.asset_names[c.asset]
           << " at t=" << c.t << " block " << c.block << ": price " << format_rat(c.lhs)
           << " vs deflated expectation " << format_rat(c.rhs) << '\n';
  } else if (sdf.upward_checked) {
    r.text << "pricing-density transport up: pass\n";
  }
  if (sdf.downward_checked)
    r.text << "pricing-density transport down: " << (sdf.downward_ok ? "pass" : "fail") << '\n';
  r.body["sdf"] = dj;

  EfficiencyReport eff = efficiency_check(m, tol);
  r.text << "efficiency: " << (eff.efficient ? "efficient" : "not efficient") << '\n';
  r.body["efficient"] = eff.efficient;

  r.verdict = rep.sensitive;
  return finish(r, o);
}

RunResult cmd_hypothesis(const Scenario& s, const RunOptions& o) {
  Market m = market_from(s, o);
  Rat tol = effective_tol(s, o);
  Report r;
  r.body = head_json("hypothesis", s, o, m);
  int T = m.horizon();

  // Candidate numeraire wealth from --strategy.
  ValueProcess wealth;
  if (o.strategy == "gop") {
    wealth = compute_gop(m).wealth;
  } else if (o.strategy.rfind("hold:", 0) == 0) {
    int asset = m.asset_index(o.strategy.substr(5));
    if (asset < 0) throw BadParams("no asset named '" + o.strategy.substr(5) + "'");
    PriceCube dp = discount(m);
    wealth.values.assign(T + 1, std::vector<Rat>(m.n_states()));
    for (int k = 0; k <= T; ++k) wealth.values[k] = dp[k][asset];
  } else {
    throw BadParams("--strategy must be 'gop' or 'hold:<asset>'");
  }
  r.body["strategy"] = o.strategy;

  Partition cond;
  const Partition* cond_ptr = nullptr;
  if (o.partition == "trivial") {
    Block all;
    for (int st = 0; st < m.n_states(); ++st) all.push_back(st);
    cond = {all};
    cond_ptr = &cond;
  } else if (o.partition == "evolution") {
    cond = m.evolution.at(o.t);
    cond_ptr = &cond;
  } else if (o.partition != "info") {
    throw BadParams("--partition must be 'info', 'trivial', or 'evolution'");
  }
  r.body["partition"] = o.partition;
  r.body["stat_t"] = o.t;

  NumeraireReport np = verify_numeraire_portfolio(wealth, m, m.ambient, cond_ptr, o.t, -1, 8,
                                                  o.seed, tol);
  json checks = json::array();
  auto add_check = [&](const BenchmarkedCheck& c) {
    json cj;
    cj["label"] = c.label;
    cj["class"] = to_string(c.cls);
    json stats = json::array();
    for (const ConditionalStat& st : c.stats)
      stats.push_back({{"block", st.block},
                       {"mean_excess", format_rat(st.mean_excess)},
                       {"log_sign", st.log_sign}});
    cj["stats"] = stats;
    checks.push_back(cj);
    r.text << "  " << c.label << ": " << to_string(c.cls);
    for (const ConditionalStat& st : c.stats)
      r.text << "  [block " << st.block << ": mean excess " << format_rat(st.mean_excess)
             << ", log sign " << st.log_sign << "]";
    r.text << '\n';
  };
  r.text << "benchmarked assets (numeraire candidate: " << o.strategy << "):\n";
  for (const auto& c : np.assets) add_check(c);
  if (!np.strategies.empty()) {
    r.text << "random normalized strategies (seed " << o.seed << "):\n";
    for (const auto& c : np.strategies) add_check(c);
  }
  r.body["checks"] = checks;
  r.body["all_supermartingales"] = np.all_supermartingales;
  r.body["stats_consistent"] = np.stats_consistent;
  r.text << "all benchmarked processes supermartingales: "
         << (np.all_supermartingales ? "yes" : "NO") << '\n';
  r.text << "conditional statistics nonpositive: " << (np.stats_consistent ? "yes" : "NO")
         << '\n';

  bool verdict = np.all_supermartingales && np.stats_consistent;
  if (o.strategy == "gop") {
    HypothesisReport hyp = martingale_hypothesis_check(m, m.ambient, tol);
    json hj;
    hj["consistent"] = hyp.consistent;
    json classes;
    for (int i = 0; i < m.n_assets(); ++i)
      classes[m.asset_names[i]] = to_string(hyp.asset_class[i]);
    hj["asset_class"] = classes;
    if (hyp.witness) {
      hj["witness"] = {{"asset", m.asset_names[hyp.witness->asset]},
                       {"t", hyp.witness->t},
                       {"block", hyp.witness->block},
                       {"conditional_mean", format_rat(hyp.witness->conditional_mean)},
                       {"current", format_rat(hyp.witness->current)}};
      r.text << "martingale hypothesis witness: asset " << m.asset_names[hyp.witness->asset]
             << " at t=" << hyp.witness->t << " block " << hyp.witness->block
             << ": conditional mean " << format_rat(hyp.witness->conditional_mean)
             << " vs current " << format_rat(hyp.witness->current) << '\n';
    }
    hj["lambda_checked"] = hyp.lambda_checked;
    hj["lambda_is_inverse_wealth"] = hyp.lambda_is_inverse_wealth;
    hj["nominal_route_agrees"] = hyp.nominal_route_agrees;
    r.body["hypothesis"] = hj;
    r.text << "benchmarked assets are exact martingales (prices reflect the ambient "
              "information): "
           << (hyp.consistent ? "yes" : "NO") << '\n';
    if (hyp.lambda_checked)
      r.text << "density process equals inverse wealth: "
             << (hyp.lambda_is_inverse_wealth ? "yes" : "NO") << '\n';
    verdict = verdict && hyp.consistent;
  }

  r.verdict = verdict;
  return finish(r, o);
}

}  // namespace

RunResult run(const std::string& command, const Scenario& scenario, const RunOptions& opts) {
  if (opts.format != "text" && opts.format != "json")
    throw BadParams("--format must be 'text' or 'json'");
  if (command == "check") return cmd_check(scenario, opts);
  if (command == "emm") return cmd_emm(scenario, opts);
  if (command == "gop") return cmd_gop(scenario, opts);
  if (command == "price") return cmd_price(scenario, opts);
  if (command == "sensitivity") return cmd_sensitivity(scenario, opts);
  if (command == "hypothesis") return cmd_hypothesis(scenario, opts);
  throw BadParams("unknown command '" + command + "'");
}

}  // namespace finmart
