#include "finmart/lp.hpp"

#include <algorithm>
#include <functional>

#include "finmart/errors.hpp"

namespace finmart {

namespace {

// Dense tableau simplex. a is kept as B^{-1}A by pivoting; reduced costs are
// recomputed per iteration, which is fine at the problem sizes in this
// library (tens of columns).
struct Tableau {
  Mat a;
  Vec b;
  std::vector<int> basis;  // basis[i] = column basic in row i

  void pivot(std::size_t row, std::size_t col) {
    Rat inv = a[row][col];
    for (Rat& v : a[row]) v /= inv;
    b[row] /= inv;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == row || sgn(a[i][col]) == 0) continue;
      Rat f = a[i][col];
      for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] -= f * a[row][j];
      b[i] -= f * b[row];
    }
    basis[row] = static_cast<int>(col);
  }

  // Maximizes cost over the current feasible tableau. Returns false when
  // unbounded. allowed[j] == false bars column j from entering.
  bool run(const Vec& cost, const std::vector<bool>& allowed) {
    std::size_t cols = a.empty() ? cost.size() : a[0].size();
    for (;;) {
      // reduced cost r_j = c_j - sum_i c_basis(i) * a[i][j]
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!allowed[j]) continue;
        bool basic = false;
        for (int bi : basis)
          if (bi == static_cast<int>(j)) { basic = true; break; }
        if (basic) continue;
        Rat r = cost[j];
        for (std::size_t i = 0; i < a.size(); ++i)
          r -= cost[static_cast<std::size_t>(basis[i])] * a[i][j];
        if (sgn(r) > 0) { enter = j; break; }  // Bland: first improving column
      }
      if (enter == cols) return true;
      std::size_t leave = a.size();
      Rat best_ratio(0);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (sgn(a[i][enter]) <= 0) continue;
        Rat ratio = b[i] / a[i][enter];
        if (leave == a.size() || ratio < best_ratio ||
            (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == a.size()) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult solve_lp(const Mat& a_in, const Vec& b_in, const Vec& c) {
  std::size_t m = a_in.size();
  std::size_t n = m ? a_in[0].size() : c.size();
  if (c.size() != n) throw BadParams("solve_lp: cost width mismatch");

  Tableau t;
  t.a = a_in;
  t.b = b_in;
  for (std::size_t i = 0; i < m; ++i)
    if (sgn(t.b[i]) < 0) {
      for (Rat& v : t.a[i]) v = -v;
      t.b[i] = -t.b[i];
    }
  // Phase 1: artificial basis, maximize minus their sum.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k)
      t.a[k].push_back(k == i ? Rat(1) : Rat(0));
    t.basis.push_back(static_cast<int>(n + i));
  }
  Vec phase1_cost(n + m, Rat(0));
  for (std::size_t j = n; j < n + m; ++j) phase1_cost[j] = Rat(-1);
  std::vector<bool> all_cols(n + m, true);
  t.run(phase1_cost, all_cols);  // bounded below by -sum(b), never unbounded
  Rat art_sum(0);
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis[i] >= static_cast<int>(n)) art_sum += t.b[i];
  if (sgn(art_sum) != 0) return LpResult{LpStatus::Infeasible, Rat(0), {}};

  // Drive leftover artificials (basic at zero) out of the basis, dropping
  // rows that turn out redundant.
  for (std::size_t i = 0; i < t.a.size();) {
    if (t.basis[i] < static_cast<int>(n)) { ++i; continue; }
    std::size_t piv = n;
    for (std::size_t j = 0; j < n; ++j)
      if (sgn(t.a[i][j]) != 0) { piv = j; break; }
    if (piv < n) {
      t.pivot(i, piv);
      ++i;
    } else {
      t.a.erase(t.a.begin() + static_cast<long>(i));
      t.b.erase(t.b.begin() + static_cast<long>(i));
      t.basis.erase(t.basis.begin() + static_cast<long>(i));
    }
  }

  // Phase 2 on real columns only.
  Vec phase2_cost(n + m, Rat(0));
  for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = c[j];
  std::vector<bool> real_cols(n + m, false);
  for (std::size_t j = 0; j < n; ++j) real_cols[j] = true;
  if (!t.run(phase2_cost, real_cols))
    return LpResult{LpStatus::Unbounded, Rat(0), {}};

  LpResult res;
  res.status = LpStatus::Optimal;
  res.x.assign(n, Rat(0));
  for (std::size_t i = 0; i < t.a.size(); ++i)
    if (t.basis[i] < static_cast<int>(n))
      res.x[static_cast<std::size_t>(t.basis[i])] = t.b[i];
  res.objective = dot(res.x, c);
  return res;
}

namespace {

void subsets_of_size(std::size_t n, std::size_t k, std::size_t start,
                     std::vector<std::size_t>& cur,
                     const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (cur.size() == k) { fn(cur); return; }
  for (std::size_t i = start; i + (k - cur.size()) <= n; ++i) {
    cur.push_back(i);
    subsets_of_size(n, k, i + 1, cur, fn);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Vec> enumerate_vertices(const Mat& a, const Vec& b) {
  std::size_t n = a.empty() ? 0 : a[0].size();
  int r = rank_of(a);
  std::vector<Vec> out;
  auto consider = [&](const std::vector<std::size_t>& cols) {
    Mat sub(a.size(), Vec(cols.size(), Rat(0)));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) sub[i][j] = a[i][cols[j]];
    auto sol = solve_linear(sub, b);
    if (!sol || !sol->nullspace.empty()) return;  // inconsistent or not basic
    Vec x(n, Rat(0));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (sgn(sol->particular[j]) < 0) return;
      x[cols[j]] = sol->particular[j];
    }
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(std::move(x));
  };
  std::vector<std::size_t> cur;
  std::size_t k = static_cast<std::size_t>(r);
  if (k == 0) {
    bool b_zero = true;
    for (const Rat& v : b) b_zero = b_zero && sgn(v) == 0;
    if (b_zero) out.push_back(Vec(n, Rat(0)));
    return out;
  }
  subsets_of_size(n, k, 0, cur, consider);
  return out;
}

}  // namespace finmart
