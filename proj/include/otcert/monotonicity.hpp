// Cyclical monotonicity: exchange graph, violating cycles, and the
// rerouting step that strictly lowers the cost along a violating cycle.
#pragma once

#include "otcert/core.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

namespace otcert {

/// Digraph on support pairs. The edge p -> p' carries
/// cost(x_p, y_p') - cost(x_p, y_p) and exists only when cost(x_p, y_p') is
/// finite, so a cycle's weight is the cost change of rerouting x_i to y_{i+1}.
template <class T>
struct ExchangeGraph {
  SupportSet nodes;
  Matrix<std::optional<T>> weight;

  std::size_t size() const { return nodes.size(); }
};

/// Support pairs whose rerouting saves `gap` > 0.
template <class T>
struct ViolatingCycle {
  std::vector<Pair> pairs;
  T gap{0};
};

template <class T>
struct MonotonicityResult {
  std::optional<ViolatingCycle<T>> violation;
  bool ok() const { return !violation.has_value(); }
};

template <class T>
struct ImproveResult {
  TransportPlan<T> plan;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<T> cost_trajectory;
};

template <class T>
ExchangeGraph<T> build_exchange_graph(const Instance<T>& instance, const SupportSet& support) {
  ExchangeGraph<T> g{support, Matrix<std::optional<T>>(support.size(), support.size())};
  for (const Pair& p : support)
    if (!instance.cost_finite(p.x, p.y))
      throw InputError("support pair (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                       ") has infinite cost");
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = 0; b < support.size(); ++b) {
      const auto& reroute = instance.cost(support[a].x, support[b].y);
      if (reroute.is_finite())
        g.weight(a, b) = reroute.value() - instance.cost(support[a].x, support[a].y).value();
    }
  return g;
}

/// Reroute gain of an explicit cycle: sum c(x_i,y_i) - sum c(x_i,y_{i+1}).
/// nullopt when some reroute cost is infinite.
template <class T>
std::optional<T> cycle_gap(const Instance<T>& instance, const std::vector<Pair>& pairs) {
  T gap(0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pair& cur = pairs[i];
    const Pair& next = pairs[(i + 1) % pairs.size()];
    const auto& reroute = instance.cost(cur.x, next.y);
    if (reroute.is_infinite()) return std::nullopt;
    gap += instance.cost(cur.x, cur.y).value() - reroute.value();
  }
  return gap;
}

namespace detail {

// Returns the node indices of some cycle of the predecessor forest, in edge
// order, or an empty vector.
inline std::vector<std::size_t> predecessor_cycle(const std::vector<std::size_t>& pred) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const std::size_t n = pred.size();
  std::vector<std::size_t> mark(n, kNone);
  for (std::size_t start = 0; start < n; ++start) {
    std::size_t v = start;
    while (v != kNone && mark[v] == kNone) {
      mark[v] = start;
      v = pred[v];
    }
    if (v == kNone || mark[v] != start) continue;
    std::vector<std::size_t> cycle{v};
    for (std::size_t u = pred[v]; u != v; u = pred[u]) cycle.push_back(u);
    std::reverse(cycle.begin(), cycle.end());
    return cycle;
  }
  return {};
}

}  // namespace detail

/// Label-correcting negative-cycle search from an implicit source joined to
/// every node. Returns a simple negative cycle (node indices, edge order).
template <class T>
std::vector<std::size_t> find_negative_cycle(const Matrix<std::optional<T>>& weight,
                                             const T& tolerance) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const std::size_t n = weight.rows();
  std::vector<T> dist(n, T(0));
  std::vector<std::size_t> pred(n, kNone);
  // Without a negative cycle labels settle within n rounds; after that every
  // further improving round is checked for a predecessor cycle.
  for (std::size_t round = 0; round < n * n + 2 * n + 4; ++round) {
    bool changed = false;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) {
        if (!weight(u, v) || u == v) continue;
        T cand = dist[u] + *weight(u, v);
        if (definitely_lt(cand, dist[v], tolerance)) {
          dist[v] = cand;
          pred[v] = u;
          changed = true;
        }
      }
    if (!changed) return {};
    if (round + 1 >= n) {
      auto cycle = detail::predecessor_cycle(pred);
      if (!cycle.empty()) return cycle;
    }
  }
  throw std::logic_error("negative-cycle search did not settle");
}

template <class T>
MonotonicityResult<T> check_c_monotone(const Instance<T>& instance, const SupportSet& support,
                                       const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  auto graph = build_exchange_graph(instance, support);
  auto cycle = find_negative_cycle(graph.weight, tolerance);
  if (cycle.empty()) return {};
  ViolatingCycle<T> v;
  for (std::size_t k : cycle) v.pairs.push_back(support[k]);
  v.gap = *cycle_gap(instance, v.pairs);
  if (!definitely_lt(T(0), v.gap, tolerance)) return {};
  return {std::move(v)};
}

template <class T>
MonotonicityResult<T> check_c_monotone(const Instance<T>& instance, const TransportPlan<T>& plan,
                                       const T& tolerance = ScalarTraits<T>::default_tolerance(),
                                       const T& threshold = ScalarTraits<T>::default_support_threshold()) {
  require_same_shape(instance, plan);
  return check_c_monotone(instance, support(plan, threshold), tolerance);
}

/// Moves alpha = min mass on the cycle from (x_i, y_i) to (x_i, y_{i+1}).
/// Marginals are preserved and the cost drops by exactly alpha * gap.
template <class T>
TransportPlan<T> improve_plan(const Instance<T>& instance, const TransportPlan<T>& plan,
                              const ViolatingCycle<T>& cycle) {
  require_same_shape(instance, plan);
  if (cycle.pairs.empty()) throw InputError("empty cycle");
  if (!cycle_gap(instance, cycle.pairs)) throw InputError("cycle uses an infinite reroute");
  T alpha = plan(cycle.pairs.front().x, cycle.pairs.front().y);
  for (const Pair& p : cycle.pairs) alpha = std::min(alpha, plan(p.x, p.y));
  if (!(alpha > T(0)))
    throw InputError("cycle references a pair without mass");
  Matrix<T> mass = plan.mass();
  for (std::size_t i = 0; i < cycle.pairs.size(); ++i) {
    const Pair& cur = cycle.pairs[i];
    const Pair& next = cycle.pairs[(i + 1) % cycle.pairs.size()];
    mass(cur.x, cur.y) -= alpha;
    mass(cur.x, next.y) += alpha;
  }
  // Float round-off can leave -1e-17 on an emptied pair.
  for (std::size_t i = 0; i < mass.rows(); ++i)
    for (std::size_t j = 0; j < mass.cols(); ++j)
      if (mass(i, j) < T(0)) mass(i, j) = T(0);
  return TransportPlan<T>(std::move(mass));
}

/// Repeats check_c_monotone + improve_plan until no violation remains or
/// the budget is spent. max_iters = 0 selects |support|^3.
template <class T>
ImproveResult<T> improve_to_monotone(const Instance<T>& instance, const TransportPlan<T>& plan,
                                     std::size_t max_iters = 0,
                                     const T& tolerance = ScalarTraits<T>::default_tolerance(),
                                     const T& threshold = ScalarTraits<T>::default_support_threshold()) {
  auto cost = total_cost(instance, plan);
  if (cost.is_infinite()) throw InputError("plan has infinite cost");
  if (max_iters == 0) {
    std::size_t s = std::max<std::size_t>(support(plan, threshold).size(), 1);
    max_iters = s * s * s;
  }
  ImproveResult<T> out{plan, 0, false, {cost.value()}};
  while (true) {
    auto check = check_c_monotone(instance, out.plan, tolerance, threshold);
    if (check.ok()) {
      out.converged = true;
      return out;
    }
    if (out.iterations == max_iters) return out;
    out.plan = improve_plan(instance, out.plan, *check.violation);
    ++out.iterations;
    out.cost_trajectory.push_back(total_cost(instance, out.plan).value());
  }
}

}  // namespace otcert
