// Multi-marginal quantities on finite product spaces: the largest mass a
// coupling can put on a set B, and the cheapest cover of B by marginal
// cylinders.
#pragma once

#include "otcert/lp.hpp"
#include "otcert/scalar.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace otcert {

using Tuple = std::vector<std::size_t>;

template <class T>
struct MultiMarginalInstance {
  std::vector<std::vector<T>> weights;  // one probability vector per space
  std::vector<Tuple> set;               // B, sorted and deduplicated

  std::size_t spaces() const { return weights.size(); }
};

template <class T>
MultiMarginalInstance<T> make_multi_marginal(std::vector<std::vector<T>> weights, std::vector<Tuple> set,
                                             const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  if (weights.size() < 2) throw InputError("need at least two spaces");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].empty()) throw InputError("space " + std::to_string(i) + " is empty");
    T sum(0);
    for (const T& w : weights[i]) {
      if (w < T(0)) throw InputError("negative weight in space " + std::to_string(i));
      sum += w;
    }
    if (!approx_eq(sum, T(1), tolerance))
      throw InputError("weights of space " + std::to_string(i) + " sum to " +
                       ScalarTraits<T>::format(sum) + " != 1");
  }
  for (const Tuple& t : set) {
    if (t.size() != weights.size()) throw InputError("tuple length does not match the number of spaces");
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] >= weights[i].size()) throw InputError("tuple index out of range");
  }
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return {std::move(weights), std::move(set)};
}

inline constexpr std::size_t kMaxProductSize = 10000;
inline constexpr std::size_t kMaxExactCoverPoints = 20;

template <class T>
std::size_t product_size(const MultiMarginalInstance<T>& mmi) {
  std::size_t size = 1;
  for (const auto& w : mmi.weights) {
    if (size > kMaxProductSize) break;
    size *= w.size();
  }
  return size;
}

template <class T>
struct CouplingValue {
  T value{0};
  std::vector<std::pair<Tuple, T>> coupling;  // nonzero entries
};

/// max pi(B) over couplings of the marginals, as an LP over the product.
template <class T>
CouplingValue<T> p_value(const MultiMarginalInstance<T>& mmi,
                         const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  const std::size_t size = product_size(mmi);
  if (size > kMaxProductSize) throw InputError("instance too large: product space exceeds 10000 tuples");
  const std::size_t n = mmi.spaces();
  std::vector<Tuple> tuples;
  tuples.reserve(size);
  Tuple t(n, 0);
  for (std::size_t k = 0; k < size; ++k) {
    tuples.push_back(t);
    for (std::size_t i = n; i-- > 0;) {
      if (++t[i] < mmi.weights[i].size()) break;
      t[i] = 0;
    }
  }
  LinearProgram<T> lp;
  lp.variables = size;
  lp.objective.assign(size, T(0));
  for (std::size_t k = 0; k < size; ++k)
    if (std::binary_search(mmi.set.begin(), mmi.set.end(), tuples[k])) lp.objective[k] = T(1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t v = 0; v < mmi.weights[i].size(); ++v) {
      std::vector<T> row(size, T(0));
      for (std::size_t k = 0; k < size; ++k)
        if (tuples[k][i] == v) row[k] = T(1);
      lp.add_row(std::move(row), RowSense::kEqual, mmi.weights[i][v]);
    }
  auto res = solve_lp(lp, tolerance);
  if (res.status != LpStatus::kOptimal) throw std::logic_error("coupling LP did not solve");
  CouplingValue<T> out{res.value, {}};
  for (std::size_t k = 0; k < size; ++k)
    if (res.x[k] != T(0)) out.coupling.emplace_back(tuples[k], res.x[k]);
  return out;
}

template <class T>
struct CoverValue {
  T value{0};
  std::vector<std::vector<std::size_t>> cover;  // B_i per space
};

/// Cheapest sum of mu_i(B_i) with every tuple of B hitting some B_i.
/// Exhaustive over subsets, so the spaces may hold at most 20 points in
/// total.
template <class T>
CoverValue<T> l_value(const MultiMarginalInstance<T>& mmi) {
  const std::size_t n = mmi.spaces();
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + mmi.weights[i].size();
  const std::size_t points = offset[n];
  if (points > kMaxExactCoverPoints)
    throw InputError("instance too large for exact mode: more than 20 points in total");
  std::vector<T> weight(points);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t v = 0; v < mmi.weights[i].size(); ++v) weight[offset[i] + v] = mmi.weights[i][v];
  std::vector<std::uint32_t> hit;
  for (const Tuple& t : mmi.set) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < n; ++i) mask |= std::uint32_t{1} << (offset[i] + t[i]);
    hit.push_back(mask);
  }
  std::optional<T> best;
  std::uint32_t best_mask = 0;
  const std::uint32_t limit = std::uint32_t{1} << points;
  for (std::uint32_t s = 0; s < limit; ++s) {
    bool covers = std::all_of(hit.begin(), hit.end(), [&](std::uint32_t h) { return (h & s) != 0; });
    if (!covers) continue;
    T cost(0);
    for (std::size_t b = 0; b < points; ++b)
      if (s >> b & 1u) cost += weight[b];
    if (!best || cost < *best) {
      best = cost;
      best_mask = s;
    }
  }
  CoverValue<T> out{*best, std::vector<std::vector<std::size_t>>(n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t v = 0; v < mmi.weights[i].size(); ++v)
      if (best_mask >> (offset[i] + v) & 1u) out.cover[i].push_back(v);
  return out;
}

template <class T>
struct RelaxedCover {
  T value{0};
  std::vector<std::vector<T>> chi;
  CoverValue<T> rounded;  // {chi_i >= 1/n}, a genuine cover
};

/// min sum_i sum_v mu_i(v) chi_i(v) with sum_i chi_i(t_i) >= 1 on B and
/// 0 <= chi <= 1.
template <class T>
RelaxedCover<T> relaxed_cover(const MultiMarginalInstance<T>& mmi,
                              const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  const std::size_t n = mmi.spaces();
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + mmi.weights[i].size();
  const std::size_t vars = offset[n];
  LinearProgram<T> lp;
  lp.variables = vars;
  lp.objective.assign(vars, T(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t v = 0; v < mmi.weights[i].size(); ++v) lp.objective[offset[i] + v] = -mmi.weights[i][v];
  for (const Tuple& t : mmi.set) {
    std::vector<T> row(vars, T(0));
    for (std::size_t i = 0; i < n; ++i) row[offset[i] + t[i]] += T(1);
    lp.add_row(std::move(row), RowSense::kGreaterEqual, T(1));
  }
  for (std::size_t j = 0; j < vars; ++j) {
    std::vector<T> row(vars, T(0));
    row[j] = T(1);
    lp.add_row(std::move(row), RowSense::kLessEqual, T(1));
  }
  auto res = solve_lp(lp, tolerance);
  if (res.status != LpStatus::kOptimal) throw std::logic_error("cover LP did not solve");
  RelaxedCover<T> out;
  out.value = -res.value;
  out.chi.resize(n);
  out.rounded.cover.resize(n);
  const T cut = T(1) / T(static_cast<long>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t v = 0; v < mmi.weights[i].size(); ++v) {
      const T& c = res.x[offset[i] + v];
      out.chi[i].push_back(c);
      if (approx_le(cut, c, tolerance)) {
        out.rounded.cover[i].push_back(v);
        out.rounded.value += mmi.weights[i][v];
      }
    }
  return out;
}

template <class T>
struct DichotomyReport {
  T p{0};
  std::optional<T> l;  // absent when the exact cover search is out of range
  T relaxed{0};
  T rounded_cover{0};
  bool lower_bound = false;  // P >= L / n (rounded cover when L is absent)
  bool upper_bound = false;  // P <= L
  std::optional<bool> two_space_equality;  // P == L, n = 2 only
  bool duality = false;      // relaxed cover value == P
  bool l_shaped_null = false;
  CouplingValue<T> coupling;
  std::optional<CoverValue<T>> cover;

  bool pass() const {
    return lower_bound && upper_bound && duality && two_space_equality.value_or(true);
  }
};

template <class T>
DichotomyReport<T> check_dichotomy(const MultiMarginalInstance<T>& mmi,
                                   const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  DichotomyReport<T> r;
  const T n(static_cast<long>(mmi.spaces()));
  r.coupling = p_value(mmi, tolerance);
  r.p = r.coupling.value;
  auto relaxed = relaxed_cover(mmi, tolerance);
  r.relaxed = relaxed.value;
  r.rounded_cover = relaxed.rounded.value;
  r.duality = approx_eq(r.relaxed, r.p, tolerance);
  std::size_t points = 0;
  for (const auto& w : mmi.weights) points += w.size();
  if (points <= kMaxExactCoverPoints) {
    r.cover = l_value(mmi);
    r.l = r.cover->value;
    r.lower_bound = approx_le(T(*r.l / n), r.p, tolerance);
    r.upper_bound = approx_le(r.p, *r.l, tolerance);
    if (mmi.spaces() == 2) r.two_space_equality = approx_eq(r.p, *r.l, tolerance);
    r.l_shaped_null = approx_eq(*r.l, T(0), tolerance);
  } else {
    r.lower_bound = approx_le(T(r.rounded_cover / n), r.p, tolerance);
    r.upper_bound = approx_le(r.p, r.rounded_cover, tolerance);
    r.l_shaped_null = approx_eq(r.rounded_cover, T(0), tolerance);
  }
  return r;
}

}  // namespace otcert
