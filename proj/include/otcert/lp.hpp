// Dense two-phase simplex with Bland's rule. Meant for the small exact LPs
// of the multi-marginal module; not a general-purpose solver.
#pragma once

#include "otcert/scalar.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace otcert {

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };
enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

/// maximize objective . x  subject to  rows[k] . x (sense) rhs[k],  x >= 0.
template <class T>
struct LinearProgram {
  std::size_t variables = 0;
  std::vector<T> objective;
  std::vector<std::vector<T>> rows;
  std::vector<RowSense> senses;
  std::vector<T> rhs;

  void add_row(std::vector<T> coeffs, RowSense sense, T bound) {
    if (coeffs.size() != variables) throw std::invalid_argument("row width mismatch");
    rows.push_back(std::move(coeffs));
    senses.push_back(sense);
    rhs.push_back(std::move(bound));
  }
};

template <class T>
struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  T value{0};
  std::vector<T> x;
};

namespace detail {

template <class T>
class Tableau {
 public:
  Tableau(std::vector<std::vector<T>> a, std::vector<T> b, std::vector<std::size_t> basis, T tol)
      : a_(std::move(a)), b_(std::move(b)), basis_(std::move(basis)), tol_(std::move(tol)) {}

  // Minimizes cost . x from the current basic feasible solution. Columns
  // with allowed[j] == false never enter. Returns false when unbounded.
  bool minimize(const std::vector<T>& cost, const std::vector<bool>& allowed) {
    const std::size_t cols = cost.size();
    while (true) {
      // reduced cost d_j = c_j - sum_k c_{basis_k} a_kj
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols && enter == cols; ++j) {
        if (!allowed[j] || is_basic(j)) continue;
        T d = cost[j];
        for (std::size_t k = 0; k < a_.size(); ++k)
          if (a_[k][j] != T(0)) d -= cost[basis_[k]] * a_[k][j];
        if (definitely_lt(d, T(0), tol_)) enter = j;
      }
      if (enter == cols) return true;
      std::size_t leave = a_.size();
      T best_ratio(0);
      for (std::size_t k = 0; k < a_.size(); ++k) {
        if (!definitely_lt(T(0), a_[k][enter], tol_)) continue;
        T ratio = b_[k] / a_[k][enter];
        if (leave == a_.size() || ratio < best_ratio ||
            (ratio == best_ratio && basis_[k] < basis_[leave])) {
          leave = k;
          best_ratio = ratio;
        }
      }
      if (leave == a_.size()) return false;
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const T p = a_[row][col];
    for (T& v : a_[row]) v /= p;
    b_[row] /= p;
    for (std::size_t k = 0; k < a_.size(); ++k) {
      if (k == row || a_[k][col] == T(0)) continue;
      const T f = a_[k][col];
      for (std::size_t j = 0; j < a_[k].size(); ++j)
        if (a_[row][j] != T(0)) a_[k][j] -= f * a_[row][j];
      b_[k] -= f * b_[row];
    }
    basis_[row] = col;
  }

  void drop_row(std::size_t row) {
    a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(row));
    b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(row));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(row));
  }

  bool is_basic(std::size_t j) const {
    for (std::size_t b : basis_)
      if (b == j) return true;
    return false;
  }

  std::size_t rows() const { return a_.size(); }
  const std::vector<T>& row(std::size_t k) const { return a_[k]; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  const std::vector<T>& rhs() const { return b_; }

 private:
  std::vector<std::vector<T>> a_;
  std::vector<T> b_;
  std::vector<std::size_t> basis_;
  T tol_;
};

}  // namespace detail

template <class T>
LpResult<T> solve_lp(const LinearProgram<T>& lp,
                     const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.variables;
  std::size_t slacks = 0;
  for (RowSense s : lp.senses) slacks += s != RowSense::kEqual;
  // columns: [originals | slack/surplus | artificials]
  const std::size_t art0 = n + slacks, cols = art0 + m;
  std::vector<std::vector<T>> a(m, std::vector<T>(cols, T(0)));
  std::vector<T> b(m);
  std::vector<std::size_t> basis(m);
  std::size_t next_slack = n;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < n; ++j) a[k][j] = lp.rows[k][j];
    if (lp.senses[k] == RowSense::kLessEqual) a[k][next_slack++] = T(1);
    if (lp.senses[k] == RowSense::kGreaterEqual) a[k][next_slack++] = T(-1);
    b[k] = lp.rhs[k];
    if (b[k] < T(0)) {
      for (T& v : a[k]) v = -v;
      b[k] = -b[k];
    }
    a[k][art0 + k] = T(1);
    basis[k] = art0 + k;
  }

  detail::Tableau<T> tab(std::move(a), std::move(b), std::move(basis), tolerance);
  std::vector<T> phase1(cols, T(0));
  for (std::size_t k = 0; k < m; ++k) phase1[art0 + k] = T(1);
  tab.minimize(phase1, std::vector<bool>(cols, true));
  LpResult<T> out;
  T infeasibility(0);
  for (std::size_t k = 0; k < tab.rows(); ++k)
    if (tab.basis()[k] >= art0) infeasibility += tab.rhs()[k];
  if (definitely_lt(T(0), infeasibility, tolerance)) return out;

  // Pivot zero-level artificials out; rows where that is impossible are
  // redundant.
  for (std::size_t k = 0; k < tab.rows();) {
    if (tab.basis()[k] < art0) {
      ++k;
      continue;
    }
    std::size_t col = art0;
    for (std::size_t j = 0; j < art0 && col == art0; ++j)
      if (tab.row(k)[j] != T(0) && !approx_eq(tab.row(k)[j], T(0), tolerance) && !tab.is_basic(j))
        col = j;
    if (col == art0) {
      tab.drop_row(k);
    } else {
      tab.pivot(k, col);
      ++k;
    }
  }

  std::vector<T> phase2(cols, T(0));
  for (std::size_t j = 0; j < n; ++j) phase2[j] = -lp.objective[j];
  std::vector<bool> allowed(cols, true);
  for (std::size_t j = art0; j < cols; ++j) allowed[j] = false;
  if (!tab.minimize(phase2, allowed)) {
    out.status = LpStatus::kUnbounded;
    return out;
  }
  out.status = LpStatus::kOptimal;
  out.x.assign(n, T(0));
  for (std::size_t k = 0; k < tab.rows(); ++k)
    if (tab.basis()[k] < n) out.x[tab.basis()[k]] = tab.rhs()[k];
  for (std::size_t j = 0; j < n; ++j) out.value += lp.objective[j] * out.x[j];
  return out;
}

}  // namespace otcert
