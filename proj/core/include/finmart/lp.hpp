#pragma once

#include <vector>

#include "finmart/linalg.hpp"
#include "finmart/rational.hpp"

namespace finmart {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Rat objective;
  Vec x;
};

// max c.x subject to A x = b, x >= 0. Exact two-phase simplex with Bland's
// rule, so it terminates and every verdict is exact.
LpResult solve_lp(const Mat& a, const Vec& b, const Vec& c);

// All vertices of {x : A x = b, x >= 0} (assumed bounded), via basic feasible
// solutions over column subsets. Intended for small systems.
std::vector<Vec> enumerate_vertices(const Mat& a, const Vec& b);

}  // namespace finmart
