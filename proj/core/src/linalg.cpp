#include "finmart/linalg.hpp"

#include "finmart/errors.hpp"

namespace finmart {

Rat dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw BadParams("dot: size mismatch");
  Rat acc(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

namespace {

// Row echelon reduction in place; returns pivot columns. When rhs is given it
// is carried along as an extra column.
std::vector<int> rref(Mat& a, Vec* rhs) {
  std::size_t rows = a.size();
  std::size_t cols = rows ? a[0].size() : 0;
  std::vector<int> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t sel = r;
    while (sel < rows && sgn(a[sel][c]) == 0) ++sel;
    if (sel == rows) continue;
    std::swap(a[sel], a[r]);
    if (rhs) std::swap((*rhs)[sel], (*rhs)[r]);
    Rat inv = a[r][c];
    for (std::size_t j = c; j < cols; ++j) a[r][j] /= inv;
    if (rhs) (*rhs)[r] /= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || sgn(a[i][c]) == 0) continue;
      Rat factor = a[i][c];
      for (std::size_t j = c; j < cols; ++j) a[i][j] -= factor * a[r][j];
      if (rhs) (*rhs)[i] -= factor * (*rhs)[r];
    }
    pivots.push_back(static_cast<int>(c));
    ++r;
  }
  return pivots;
}

}  // namespace

int rank_of(Mat a) {
  return static_cast<int>(rref(a, nullptr).size());
}

std::optional<LinearSolution> solve_linear(const Mat& a_in, const Vec& b_in) {
  Mat a = a_in;
  Vec b = b_in;
  if (a.size() != b.size()) throw BadParams("solve_linear: row count mismatch");
  std::size_t cols = a.empty() ? 0 : a[0].size();
  std::vector<int> pivots = rref(a, &b);
  std::size_t r = pivots.size();
  for (std::size_t i = r; i < a.size(); ++i)
    if (sgn(b[i]) != 0) return std::nullopt;

  std::vector<int> pivot_of_col(cols, -1);
  for (std::size_t k = 0; k < pivots.size(); ++k)
    pivot_of_col[static_cast<std::size_t>(pivots[k])] = static_cast<int>(k);

  LinearSolution sol;
  sol.particular.assign(cols, Rat(0));
  for (std::size_t k = 0; k < pivots.size(); ++k)
    sol.particular[static_cast<std::size_t>(pivots[k])] = b[k];

  for (std::size_t c = 0; c < cols; ++c) {
    if (pivot_of_col[c] >= 0) continue;
    Vec basis(cols, Rat(0));
    basis[c] = Rat(1);
    for (std::size_t k = 0; k < pivots.size(); ++k)
      basis[static_cast<std::size_t>(pivots[k])] = -a[k][c];
    sol.nullspace.push_back(std::move(basis));
  }
  return sol;
}

std::optional<Vec> min_norm_solve(const Mat& a, const Vec& b) {
  auto sol = solve_linear(a, b);
  if (!sol) return std::nullopt;
  if (sol->nullspace.empty()) return sol->particular;
  std::size_t k = sol->nullspace.size();
  Mat gram(k, Vec(k, Rat(0)));
  Vec rhs(k, Rat(0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) gram[i][j] = dot(sol->nullspace[i], sol->nullspace[j]);
    rhs[i] = -dot(sol->nullspace[i], sol->particular);
  }
  auto z = solve_linear(gram, rhs);
  if (!z) throw Degenerate("min_norm_solve: singular Gram matrix");
  Vec x = sol->particular;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < x.size(); ++c) x[c] += z->particular[i] * sol->nullspace[i][c];
  return x;
}

}  // namespace finmart
