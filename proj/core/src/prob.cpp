#include "finmart/prob.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "finmart/errors.hpp"

namespace finmart {

int FiniteProbSpace::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (atoms[i] == id) return static_cast<int>(i);
  return -1;
}

FiniteProbSpace make_space(std::vector<std::string> atoms, std::vector<Rat> prob) {
  if (atoms.empty()) throw ValidationError("state space is empty");
  if (atoms.size() != prob.size())
    throw ValidationError("state ids and probabilities have different counts");
  std::set<std::string> seen;
  Rat total(0);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!seen.insert(atoms[i]).second)
      throw ValidationError("duplicate state id: " + atoms[i]);
    if (sgn(prob[i]) <= 0)
      throw ValidationError("state " + atoms[i] + " has nonpositive probability");
    total += prob[i];
  }
  if (total != 1)
    throw ValidationError("probabilities sum to " + format_rat(total) + ", expected 1");
  return FiniteProbSpace{std::move(atoms), std::move(prob)};
}

Partition normalize_partition(Partition p) {
  for (Block& b : p) std::sort(b.begin(), b.end());
  std::sort(p.begin(), p.end(),
            [](const Block& a, const Block& b) { return a.front() < b.front(); });
  return p;
}

bool same_partition(const Partition& a, const Partition& b) {
  return normalize_partition(a) == normalize_partition(b);
}

void require_partition(const Partition& p, int n_states, const std::string& what) {
  std::vector<int> seen(static_cast<std::size_t>(n_states), 0);
  for (const Block& b : p) {
    if (b.empty()) throw ValidationError(what + ": empty block");
    for (int s : b) {
      if (s < 0 || s >= n_states)
        throw ValidationError(what + ": state index out of range");
      if (seen[static_cast<std::size_t>(s)]++)
        throw ValidationError(what + ": state appears in two blocks");
    }
  }
  for (int s = 0; s < n_states; ++s)
    if (!seen[static_cast<std::size_t>(s)])
      throw ValidationError(what + ": state missing from partition");
}

namespace {

std::vector<int> index_partition(const Partition& p, int n_states) {
  std::vector<int> idx(static_cast<std::size_t>(n_states), -1);
  for (std::size_t b = 0; b < p.size(); ++b)
    for (int s : p[b]) idx[static_cast<std::size_t>(s)] = static_cast<int>(b);
  return idx;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

bool refines(const Partition& fine, const Partition& coarse) {
  int n = 0;
  for (const Block& b : coarse) n += static_cast<int>(b.size());
  std::vector<int> coarse_idx = index_partition(coarse, n);
  for (const Block& b : fine) {
    if (b.empty()) return false;
    int target = coarse_idx[static_cast<std::size_t>(b.front())];
    for (int s : b)
      if (coarse_idx[static_cast<std::size_t>(s)] != target) return false;
  }
  return true;
}

Partition sigma_meet(const Partition& a, const Partition& b, int n_states) {
  UnionFind uf(n_states);
  for (const Block& blk : a)
    for (std::size_t i = 1; i < blk.size(); ++i) uf.unite(blk[0], blk[i]);
  for (const Block& blk : b)
    for (std::size_t i = 1; i < blk.size(); ++i) uf.unite(blk[0], blk[i]);
  std::map<int, Block> groups;
  for (int s = 0; s < n_states; ++s) groups[uf.find(s)].push_back(s);
  Partition out;
  out.reserve(groups.size());
  for (auto& [root, blk] : groups) out.push_back(std::move(blk));
  return normalize_partition(std::move(out));
}

Filtration make_filtration(std::vector<Partition> levels, int n_states) {
  if (levels.empty()) throw ValidationError("filtration has no levels");
  Filtration f;
  f.levels.reserve(levels.size());
  for (Partition& p : levels) {
    require_partition(p, n_states, "filtration level");
    f.levels.push_back(normalize_partition(std::move(p)));
  }
  for (std::size_t t = 1; t < f.levels.size(); ++t)
    if (!refines(f.levels[t], f.levels[t - 1]))
      throw ValidationError("filtration level " + std::to_string(t) +
                            " does not refine level " + std::to_string(t - 1));
  f.block_index.reserve(f.levels.size());
  for (const Partition& p : f.levels) f.block_index.push_back(index_partition(p, n_states));
  return f;
}

void require_subfiltration(const Filtration& coarse, const Filtration& fine) {
  if (coarse.horizon() != fine.horizon())
    throw NotSubfiltration("filtrations have different horizons");
  if (coarse.n_states() != fine.n_states())
    throw NotSubfiltration("filtrations live on different state counts");
  for (int t = 0; t <= coarse.horizon(); ++t)
    if (!refines(fine.at(t), coarse.at(t)))
      throw NotSubfiltration("level " + std::to_string(t) +
                             " of the fine filtration does not refine the coarse one");
}

bool constant_on_block(const std::vector<Rat>& row, const Block& block, const Rat& tol) {
  const Rat& head = row.at(static_cast<std::size_t>(block.front()));
  for (int s : block) {
    Rat d = row.at(static_cast<std::size_t>(s)) - head;
    if (abs(d) > tol) return false;
  }
  return true;
}

void require_adapted(const AdaptedProcess& x, const Filtration& f, const Rat& tol,
                     const std::string& what) {
  if (static_cast<int>(x.values.size()) != f.horizon() + 1)
    throw NotAdapted(what + ": grid has " + std::to_string(x.values.size()) +
                     " rows, filtration horizon is " + std::to_string(f.horizon()));
  for (int t = 0; t <= f.horizon(); ++t) {
    const auto& row = x.values[static_cast<std::size_t>(t)];
    if (static_cast<int>(row.size()) != f.n_states())
      throw NotAdapted(what + ": row " + std::to_string(t) + " has wrong width");
    for (std::size_t b = 0; b < f.at(t).size(); ++b)
      if (!constant_on_block(row, f.at(t)[b], tol))
        throw NotAdapted(what + ": not constant on block " + std::to_string(b) +
                         " at time " + std::to_string(t));
  }
}

std::vector<Rat> conditional_expectation_w(const std::vector<Rat>& x, int t,
                                           const Filtration& f,
                                           const std::vector<Rat>& weights) {
  if (x.size() != weights.size() || static_cast<int>(x.size()) != f.n_states())
    throw ValidationError("conditional expectation: size mismatch");
  std::vector<Rat> out(x.size(), Rat(0));
  for (const Block& b : f.at(t)) {
    Rat mass(0), acc(0);
    for (int s : b) {
      mass += weights[static_cast<std::size_t>(s)];
      acc += weights[static_cast<std::size_t>(s)] * x[static_cast<std::size_t>(s)];
    }
    if (sgn(mass) == 0)
      throw Degenerate("conditional expectation on a zero-mass block");
    Rat v = acc / mass;
    for (int s : b) out[static_cast<std::size_t>(s)] = v;
  }
  return out;
}

std::vector<Rat> conditional_expectation(const std::vector<Rat>& x, int t,
                                         const Filtration& f,
                                         const FiniteProbSpace& space) {
  return conditional_expectation_w(x, t, f, space.prob);
}

const char* to_string(ProcessClass c) {
  switch (c) {
    case ProcessClass::Martingale: return "martingale";
    case ProcessClass::Supermartingale: return "supermartingale";
    case ProcessClass::Submartingale: return "submartingale";
    case ProcessClass::Neither: return "neither";
  }
  return "?";
}

ClassifyResult classify_process_w(const AdaptedProcess& x, const Filtration& f,
                                  const std::vector<Rat>& weights, const Rat& tol) {
  require_adapted(x, f, tol, "classify_process input");
  ClassifyResult r;
  bool has_up = false, has_down = false;
  for (int t = 0; t < f.horizon(); ++t) {
    std::vector<Rat> next =
        conditional_expectation_w(x.values[static_cast<std::size_t>(t) + 1], t, f, weights);
    const Partition& part = f.at(t);
    for (std::size_t b = 0; b < part.size(); ++b) {
      int s0 = part[b].front();
      DefectCell cell{t, static_cast<int>(b),
                      next[static_cast<std::size_t>(s0)] -
                          x.values[static_cast<std::size_t>(t)][static_cast<std::size_t>(s0)]};
      if (cell.defect > tol) {
        has_up = true;
        if (!r.worst_up || cell.defect > r.worst_up->defect) r.worst_up = cell;
      }
      if (cell.defect < -tol) {
        has_down = true;
        if (!r.worst_down || cell.defect < r.worst_down->defect) r.worst_down = cell;
      }
      r.defects.push_back(std::move(cell));
    }
  }
  if (!has_up && !has_down) r.cls = ProcessClass::Martingale;
  else if (!has_up) r.cls = ProcessClass::Supermartingale;
  else if (!has_down) r.cls = ProcessClass::Submartingale;
  else r.cls = ProcessClass::Neither;
  return r;
}

ClassifyResult classify_process(const AdaptedProcess& x, const Filtration& f,
                                const FiniteProbSpace& space, const Rat& tol) {
  return classify_process_w(x, f, space.prob, tol);
}

Filtration natural_filtration(const std::vector<std::vector<std::vector<Rat>>>& prices) {
  if (prices.empty()) throw ValidationError("price grid has no time rows");
  int n_states = static_cast<int>(prices[0].empty() ? 0 : prices[0][0].size());
  if (n_states == 0) throw ValidationError("price grid has no states");

  // Refine incrementally: states stay together at t iff they agree on every
  // asset price at all times up to t.
  std::vector<Partition> levels;
  Partition current{Block{}};
  for (int s = 0; s < n_states; ++s) current[0].push_back(s);
  for (std::size_t t = 0; t < prices.size(); ++t) {
    Partition next;
    for (const Block& b : current) {
      std::map<std::vector<Rat>, Block> split;
      for (int s : b) {
        std::vector<Rat> key;
        key.reserve(prices[t].size());
        for (const auto& asset_row : prices[t])
          key.push_back(asset_row.at(static_cast<std::size_t>(s)));
        split[key].push_back(s);
      }
      for (auto& [key, blk] : split) next.push_back(std::move(blk));
    }
    next = normalize_partition(std::move(next));
    if (t == 0 && next.size() > 1)
      throw NonTrivialStart("time-0 prices distinguish states");
    levels.push_back(next);
    current = std::move(next);
  }
  return make_filtration(std::move(levels), n_states);
}

ImmersionReport is_immersed_w(const Filtration& sub, const Filtration& full,
                              const std::vector<Rat>& weights, const Rat& tol) {
  require_subfiltration(sub, full);
  ImmersionReport report;
  report.immersed = true;
  const Partition& terminal = sub.terminal();
  for (int t = 0; t <= sub.horizon() && report.immersed; ++t) {
    const Partition& fine = full.at(t);
    for (std::size_t fb = 0; fb < fine.size() && report.immersed; ++fb) {
      const Block& b = fine[fb];
      int coarse_block = sub.block_of(t, b.front());
      const Block& d = sub.at(t)[static_cast<std::size_t>(coarse_block)];
      Rat mass_b(0), mass_d(0);
      for (int s : b) mass_b += weights[static_cast<std::size_t>(s)];
      for (int s : d) mass_d += weights[static_cast<std::size_t>(s)];
      if (sgn(mass_b) == 0 || sgn(mass_d) == 0)
        throw Degenerate("immersion check conditioning on a zero-mass block");
      for (std::size_t a = 0; a < terminal.size(); ++a) {
        Rat in_b(0), in_d(0);
        for (int s : terminal[a]) {
          if (full.block_of(t, s) == static_cast<int>(fb))
            in_b += weights[static_cast<std::size_t>(s)];
          if (sub.block_of(t, s) == coarse_block)
            in_d += weights[static_cast<std::size_t>(s)];
        }
        Rat p_b = in_b / mass_b;
        Rat p_d = in_d / mass_d;
        if (abs(p_b - p_d) > tol) {
          report.immersed = false;
          report.witness = ImmersionWitness{t, static_cast<int>(a), static_cast<int>(fb),
                                            p_b, p_d};
          break;
        }
      }
    }
  }
  report.level_identity = true;
  for (int t = 0; t <= sub.horizon(); ++t) {
    Partition meet = sigma_meet(full.at(t), terminal, sub.n_states());
    if (!same_partition(meet, sub.at(t))) {
      report.level_identity = false;
      report.level_identity_failure_t = t;
      break;
    }
  }
  return report;
}

ImmersionReport is_immersed(const Filtration& sub, const Filtration& full,
                            const FiniteProbSpace& space, const Rat& tol) {
  return is_immersed_w(sub, full, space.prob, tol);
}

}  // namespace finmart
