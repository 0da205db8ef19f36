#pragma once

#include <optional>
#include <string>
#include <vector>

#include "finmart/rational.hpp"

namespace finmart {

// Finite probability space: named atoms with strictly positive rational
// weights summing to one.
struct FiniteProbSpace {
  std::vector<std::string> atoms;
  std::vector<Rat> prob;

  int size() const { return static_cast<int>(atoms.size()); }
  int index_of(const std::string& id) const;
};

FiniteProbSpace make_space(std::vector<std::string> atoms, std::vector<Rat> prob);

using Block = std::vector<int>;        // sorted state indices
using Partition = std::vector<Block>;  // disjoint cover of all states

// Sorts members and orders blocks by first member: one canonical form per
// partition so equality is plain vector comparison.
Partition normalize_partition(Partition p);
bool same_partition(const Partition& a, const Partition& b);
bool refines(const Partition& fine, const Partition& coarse);
// Atoms of the largest sigma-algebra contained in both sigma(a) and sigma(b):
// connected components when overlapping blocks from either side are merged.
Partition sigma_meet(const Partition& a, const Partition& b, int n_states);
void require_partition(const Partition& p, int n_states, const std::string& what);

// Time-indexed refining partitions. levels[t] is the information available at
// time t; levels[0] may be nontrivial.
struct Filtration {
  std::vector<Partition> levels;
  std::vector<std::vector<int>> block_index;  // [t][state] -> block position

  int horizon() const { return static_cast<int>(levels.size()) - 1; }
  int n_states() const {
    return block_index.empty() ? 0 : static_cast<int>(block_index[0].size());
  }
  const Partition& at(int t) const { return levels.at(static_cast<std::size_t>(t)); }
  const Partition& terminal() const { return levels.back(); }
  int block_of(int t, int state) const {
    return block_index.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(state));
  }
};

Filtration make_filtration(std::vector<Partition> levels, int n_states);

// Pointwise refinement at every time. Throws NotSubfiltration when violated.
void require_subfiltration(const Filtration& coarse, const Filtration& fine);

// Grid of values indexed [time][state]; adaptedness is validated by the
// operations that need it, not by construction.
struct AdaptedProcess {
  std::vector<std::vector<Rat>> values;

  int horizon() const { return static_cast<int>(values.size()) - 1; }
};

bool constant_on_block(const std::vector<Rat>& row, const Block& block, const Rat& tol);
void require_adapted(const AdaptedProcess& x, const Filtration& f, const Rat& tol,
                     const std::string& what);

// E(x | levels[t]) as a full state-length vector (constant on blocks).
// The weighted variant conditions under explicit nonnegative weights; a block
// of zero weight is rejected as Degenerate.
std::vector<Rat> conditional_expectation(const std::vector<Rat>& x, int t,
                                         const Filtration& f,
                                         const FiniteProbSpace& space);
std::vector<Rat> conditional_expectation_w(const std::vector<Rat>& x, int t,
                                           const Filtration& f,
                                           const std::vector<Rat>& weights);

enum class ProcessClass { Martingale, Supermartingale, Submartingale, Neither };
const char* to_string(ProcessClass c);

// defect = E(X_{t+1} | block at t) - X_t on the block.
struct DefectCell {
  int t = 0;
  int block = 0;
  Rat defect;
};

struct ClassifyResult {
  ProcessClass cls = ProcessClass::Martingale;
  std::vector<DefectCell> defects;             // every (t, block), t < horizon
  std::optional<DefectCell> worst_up;          // largest defect above tol
  std::optional<DefectCell> worst_down;        // largest defect below -tol
  bool is_martingale() const { return cls == ProcessClass::Martingale; }
};

ClassifyResult classify_process(const AdaptedProcess& x, const Filtration& f,
                                const FiniteProbSpace& space, const Rat& tol = Rat(0));
ClassifyResult classify_process_w(const AdaptedProcess& x, const Filtration& f,
                                  const std::vector<Rat>& weights, const Rat& tol = Rat(0));

// Filtration generated by joint price histories, prices[t][asset][state].
// Time-0 prices must not distinguish states (NonTrivialStart otherwise), so
// level 0 is the single block Omega.
Filtration natural_filtration(const std::vector<std::vector<std::vector<Rat>>>& prices);

struct ImmersionWitness {
  int t = 0;
  int terminal_block = 0;  // block of the coarse filtration's final partition
  int fine_block = 0;      // block of the fine filtration at t
  Rat p_given_fine;
  Rat p_given_coarse;
};

struct ImmersionReport {
  bool immersed = false;
  std::optional<ImmersionWitness> witness;
  // Whether coarse level t equals meet(fine level t, coarse terminal) at all t.
  // Implied by immersion; can hold without it.
  bool level_identity = false;
  std::optional<int> level_identity_failure_t;
};

// Tests whether every terminal block of `sub` has the same conditional
// probability given each block of `full` at t as given the containing block
// of `sub` at t. `full` must refine `sub` levelwise.
ImmersionReport is_immersed(const Filtration& sub, const Filtration& full,
                            const FiniteProbSpace& space, const Rat& tol = Rat(0));
ImmersionReport is_immersed_w(const Filtration& sub, const Filtration& full,
                              const std::vector<Rat>& weights, const Rat& tol = Rat(0));

}  // namespace finmart
