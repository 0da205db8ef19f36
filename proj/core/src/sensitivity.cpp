#include "finmart/sensitivity.hpp"

#include <algorithm>
#include <map>

#include "finmart/errors.hpp"

namespace finmart {

Filtration enlarge(const Filtration& base, const std::vector<Signal>& signals) {
  int ns = base.n_states();
  int T = base.horizon();
  for (const Signal& sig : signals) {
    if (sig.reveal_time < 0 || sig.reveal_time > T)
      throw BadParams("signal " + sig.name + ": reveal time outside the horizon");
    if (static_cast<int>(sig.values.size()) != T + 1)
      throw BadParams("signal " + sig.name + ": needs one row per time");
    for (const auto& row : sig.values)
      if (static_cast<int>(row.size()) != ns)
        throw BadParams("signal " + sig.name + ": needs one value per state");
  }

  std::vector<Partition> levels;
  for (int t = 0; t <= T; ++t) {
    // Group states by (base block, every revealed signal row up to t).
    std::map<std::vector<Rat>, Block> groups;
    for (int s = 0; s < ns; ++s) {
      std::vector<Rat> key;
      key.push_back(Rat(base.block_of(t, s)));
      for (const Signal& sig : signals)
        for (int r = sig.reveal_time; r <= t; ++r) key.push_back(sig.values[r][s]);
      groups[key].push_back(s);
    }
    Partition level;
    for (auto& [key, blk] : groups) level.push_back(std::move(blk));
    levels.push_back(normalize_partition(std::move(level)));
  }
  return make_filtration(std::move(levels), ns);
}

SensitivityReport sensitivity_report(const Market& m, const Rat& tol) {
  SensitivityReport out;
  out.conditional_route = is_immersed(m.evolution, m.ambient, m.space, tol);
  out.sensitive = out.conditional_route.immersed;
  out.level_identity = out.conditional_route.level_identity;
  out.level_identity_failure_t = out.conditional_route.level_identity_failure_t;

  // Independent arithmetic route: project each terminal price indicator onto
  // the ambient information and test measurability for the evolution.
  out.projection_route = true;
  int ns = m.n_states();
  const Partition& terminal = m.evolution.terminal();
  for (int a = 0; a < static_cast<int>(terminal.size()) && out.projection_route; ++a) {
    std::vector<Rat> ind(ns, Rat(0));
    for (int s : terminal[a]) ind[s] = Rat(1);
    for (int t = 0; t <= m.horizon() && out.projection_route; ++t) {
      std::vector<Rat> proj = conditional_expectation(ind, t, m.ambient, m.space);
      const Partition& level = m.evolution.at(t);
      for (int b = 0; b < static_cast<int>(level.size()); ++b) {
        if (!constant_on_block(proj, level[b], tol)) {
          out.projection_route = false;
          out.projection_witness = ProjectionWitness{t, a, b};
          break;
        }
      }
    }
  }
  if (sgn(tol) == 0 && out.projection_route != out.sensitive)
    throw Degenerate("sensitivity routes disagree");
  return out;
}

EfficiencyReport efficiency_check(const Market& m, const Rat& tol) {
  EfficiencyReport out;
  out.sensitivity = sensitivity_report(m, tol);
  out.sensitive = out.sensitivity.sensitive;
  EmmSet ambient = find_emms(m, m.ambient);
  out.ambient_class = ambient.classification;
  out.ambient_boundary_only = ambient.boundary_only;
  out.ambient_emm_exists = ambient.classification != EmmClass::Empty;
  out.evolution_class = find_emms(m, m.evolution).classification;
  out.efficient = out.sensitive && out.ambient_emm_exists;
  return out;
}

namespace {

// Per (asset, t < T, block of `cond` at t): compare the current price with
// E_P(lambda_T / lambda_t * price_T | block).
std::optional<SdfCell> deflate_and_compare(const Market& m, const Rnp& rnp,
                                           const Filtration& cond, const Rat& tol) {
  PriceCube dp = discount(m);
  int T = m.horizon();
  for (int i = 0; i < m.n_assets(); ++i) {
    for (int t = 0; t < T; ++t) {
      const Partition& level = cond.at(t);
      for (int b = 0; b < static_cast<int>(level.size()); ++b) {
        Rat mass(0), acc(0);
        for (int s : level[b]) {
          mass += m.space.prob[s];
          acc += m.space.prob[s] * rnp.terminal[s] / rnp.levels.values[t][s] * dp[T][i][s];
        }
        Rat lhs = dp[t][i][level[b][0]];
        Rat rhs = acc / mass;
        if (abs(lhs - rhs) > tol) {
          SdfCell cell;
          cell.asset = i;
          cell.t = t;
          cell.T = T;
          cell.block = b;
          cell.lhs = lhs;
          cell.rhs = rhs;
          return cell;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

SdfReport sdf_compatibility(const Market& m, const Rat& tol) {
  SdfReport out;
  out.sensitive = is_immersed(m.evolution, m.ambient, m.space, tol).immersed;

  EmmSet ambient = find_emms(m, m.ambient);
  if (ambient.representative) {
    out.downward_checked = true;
    Rnp lam = rnp_from_measure(*ambient.representative, m.ambient, m.space);
    out.downward_ok = !deflate_and_compare(m, lam, m.evolution, tol).has_value();
  }

  EmmSet evo = find_emms(m, m.evolution);
  if (evo.representative) {
    out.upward_checked = true;
    Rnp lam = rnp_from_measure(*evo.representative, m.evolution, m.space);
    out.upward_witness = deflate_and_compare(m, lam, m.ambient, tol);
    out.upward_ok = !out.upward_witness.has_value();
    out.upward_matches_sensitivity = (out.upward_ok == out.sensitive);
  }
  return out;
}

}  // namespace finmart
