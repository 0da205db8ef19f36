#pragma once

#include <optional>
#include <vector>

#include "finmart/rational.hpp"

namespace finmart {

using Vec = std::vector<Rat>;
using Mat = std::vector<Vec>;

int rank_of(Mat a);

// General solution of A x = b: a particular solution (free variables zero)
// plus a nullspace basis. nullopt when inconsistent.
struct LinearSolution {
  Vec particular;
  std::vector<Vec> nullspace;
};
std::optional<LinearSolution> solve_linear(const Mat& a, const Vec& b);

// Solution of A x = b minimizing the Euclidean norm, via the normal equations
// on the nullspace basis. nullopt when inconsistent.
std::optional<Vec> min_norm_solve(const Mat& a, const Vec& b);

Rat dot(const Vec& a, const Vec& b);

}  // namespace finmart
