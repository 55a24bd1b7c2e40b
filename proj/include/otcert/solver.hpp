// Exact minimum-cost transport and a brute-force oracle.
//
// Infinite arcs are deleted from the network (never big-M'd). Feasibility is
// decided first by a max-flow on the finite arcs; the optimum is then found by
// successive shortest augmenting paths with Johnson potentials, which keeps
// every intermediate value in the scalar type (exact for Rational).
#pragma once

#include "otcert/core.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace otcert {

/// Transportation problem on the finite arcs only. Costs may be negative
/// (used for max-mass objectives); supplies and demands need not sum to 1.
template <class T>
struct TransportProblem {
  std::vector<T> supply;
  std::vector<T> demand;
  Matrix<std::optional<T>> cost;
};

template <class T>
struct FlowSolution {
  bool feasible = false;
  Matrix<T> flow;
  T value{0};
};

template <class T>
struct OptimalResult {
  TransportPlan<T> plan;
  ExtendedCost<T> value{kInfinity};
  bool feasible = false;
};

template <class T>
struct OptimalityCheck {
  bool optimal = false;
  T gap{0};
  T plan_cost{0};
  T optimum{0};
};

namespace detail {

template <class T>
class BipartiteNetwork {
 public:
  explicit BipartiteNetwork(const TransportProblem<T>& p)
      : m_(p.supply.size()), n_(p.demand.size()), adj_(m_ + n_ + 2) {
    for (std::size_t i = 0; i < m_; ++i) add_arc(source(), i, false, p.supply[i], T(0));
    for (std::size_t j = 0; j < n_; ++j) add_arc(m_ + j, sink(), false, p.demand[j], T(0));
    arc_of_.assign(m_ * n_, kNone);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (p.cost(i, j)) arc_of_[i * n_ + j] = add_arc(i, m_ + j, true, T(0), *p.cost(i, j));
  }

  std::size_t source() const { return m_ + n_; }
  std::size_t sink() const { return m_ + n_ + 1; }

  /// Edmonds-Karp; returns the max flow value and leaves the flow in place.
  T max_flow() {
    T total(0);
    const std::size_t nodes = adj_.size();
    while (true) {
      std::vector<std::pair<std::size_t, std::size_t>> parent(nodes, {kNone, kNone});
      std::deque<std::size_t> queue{source()};
      parent[source()] = {source(), kNone};
      while (!queue.empty() && parent[sink()].first == kNone) {
        std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t k = 0; k < adj_[u].size(); ++k) {
          const Arc& a = adj_[u][k];
          if (parent[a.to].first == kNone && residual_positive(a)) {
            parent[a.to] = {u, k};
            queue.push_back(a.to);
          }
        }
      }
      if (parent[sink()].first == kNone) break;
      total += augment(parent);
    }
    return total;
  }

  /// Successive shortest paths from zero flow; returns the routed amount.
  T min_cost_flow() {
    reset();
    const std::size_t nodes = adj_.size();
    std::vector<T> potential(nodes, T(0));
    std::vector<bool> has_potential(nodes, false);
    // Initial potentials by Bellman-Ford; the initial residual graph is a DAG.
    has_potential[source()] = true;
    for (std::size_t round = 0; round < nodes; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (!has_potential[u]) continue;
        for (const Arc& a : adj_[u]) {
          if (!residual_positive(a)) continue;
          T cand = potential[u] + a.cost;
          if (!has_potential[a.to] || cand < potential[a.to]) {
            potential[a.to] = cand;
            has_potential[a.to] = true;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    T routed(0);
    std::vector<T> dist(nodes);
    std::vector<bool> reached(nodes), done(nodes);
    std::vector<std::pair<std::size_t, std::size_t>> parent(nodes);
    while (true) {
      std::fill(reached.begin(), reached.end(), false);
      std::fill(done.begin(), done.end(), false);
      reached[source()] = true;
      dist[source()] = T(0);
      parent[source()] = {source(), kNone};
      while (true) {
        std::size_t u = kNone;
        for (std::size_t v = 0; v < nodes; ++v)
          if (reached[v] && !done[v] && (u == kNone || dist[v] < dist[u])) u = v;
        if (u == kNone) break;
        done[u] = true;
        for (std::size_t k = 0; k < adj_[u].size(); ++k) {
          const Arc& a = adj_[u][k];
          if (!residual_positive(a) || done[a.to]) continue;
          T reduced = a.cost + potential[u] - potential[a.to];
          if (reduced < T(0)) reduced = T(0);  // float round-off only
          T cand = dist[u] + reduced;
          if (!reached[a.to] || cand < dist[a.to]) {
            reached[a.to] = true;
            dist[a.to] = cand;
            parent[a.to] = {u, k};
          }
        }
      }
      if (!reached[sink()]) break;
      const T cap = dist[sink()];
      for (std::size_t v = 0; v < nodes; ++v)
        potential[v] += (reached[v] && dist[v] < cap) ? dist[v] : cap;
      routed += augment(parent);
    }
    return routed;
  }

  Matrix<T> flow_matrix() const {
    Matrix<T> f(m_, n_, T(0));
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (std::size_t k = arc_of_[i * n_ + j]; k != kNone) f(i, j) = adj_[i][k].flow;
    return f;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Arc {
    std::size_t to;
    std::size_t rev;
    bool unbounded;
    T cap;
    T cost;
    T flow;  // negative on reverse arcs
  };

  std::size_t add_arc(std::size_t from, std::size_t to, bool unbounded, T cap, T cost) {
    adj_[from].push_back({to, adj_[to].size(), unbounded, cap, cost, T(0)});
    adj_[to].push_back({from, adj_[from].size() - 1, false, T(0), T(-cost), T(0)});
    return adj_[from].size() - 1;
  }

  static bool residual_positive(const Arc& a) {
    return a.unbounded || a.cap - a.flow > T(0);
  }

  T augment(const std::vector<std::pair<std::size_t, std::size_t>>& parent) {
    std::optional<T> bottleneck;
    for (std::size_t v = sink(); v != source(); v = parent[v].first) {
      const Arc& a = adj_[parent[v].first][parent[v].second];
      if (a.unbounded) continue;
      T r = a.cap - a.flow;
      if (!bottleneck || r < *bottleneck) bottleneck = r;
    }
    const T delta = *bottleneck;  // source and sink arcs are bounded
    for (std::size_t v = sink(); v != source(); v = parent[v].first) {
      Arc& a = adj_[parent[v].first][parent[v].second];
      a.flow += delta;
      adj_[a.to][a.rev].flow -= delta;
    }
    return delta;
  }

  void reset() {
    for (auto& arcs : adj_)
      for (Arc& a : arcs) a.flow = T(0);
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::size_t> arc_of_;
};

}  // namespace detail

/// Minimum-cost transport over the present arcs. feasible=false when the
/// arcs cannot carry the marginals.
template <class T>
FlowSolution<T> solve_transport(const TransportProblem<T>& problem,
                                const T& tolerance) {
  const T total_supply = std::accumulate(problem.supply.begin(), problem.supply.end(), T(0));
  const T total_demand = std::accumulate(problem.demand.begin(), problem.demand.end(), T(0));
  FlowSolution<T> out;
  out.flow = Matrix<T>(problem.supply.size(), problem.demand.size(), T(0));
  if (!approx_eq(total_supply, total_demand, tolerance)) return out;

  detail::BipartiteNetwork<T> net(problem);
  if (!approx_eq(net.max_flow(), total_supply, tolerance)) return out;
  net.min_cost_flow();
  out.feasible = true;
  out.flow = net.flow_matrix();
  for (std::size_t i = 0; i < problem.supply.size(); ++i)
    for (std::size_t j = 0; j < problem.demand.size(); ++j)
      if (problem.cost(i, j)) out.value += *problem.cost(i, j) * out.flow(i, j);
  return out;
}

template <class T>
TransportProblem<T> finite_arc_problem(const Instance<T>& instance) {
  TransportProblem<T> p{instance.mu(), instance.nu(),
                        Matrix<std::optional<T>>(instance.x_size(), instance.y_size())};
  for (std::size_t i = 0; i < instance.x_size(); ++i)
    for (std::size_t j = 0; j < instance.y_size(); ++j)
      if (instance.cost_finite(i, j)) p.cost(i, j) = instance.cost(i, j).value();
  return p;
}

template <class T>
OptimalResult<T> solve_exact(const Instance<T>& instance,
                             const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  auto sol = solve_transport(finite_arc_problem(instance), tolerance);
  OptimalResult<T> out;
  out.feasible = sol.feasible;
  if (!sol.feasible) {
    out.plan = TransportPlan<T>(Matrix<T>(instance.x_size(), instance.y_size(), T(0)));
    return out;
  }
  out.plan = TransportPlan<T>(std::move(sol.flow));
  out.value = ExtendedCost<T>(sol.value);
  return out;
}

namespace detail {

// Unique flow on a forest support by leaf peeling; nullopt when the forest
// cannot carry the marginals with nonnegative flow.
template <class T>
std::optional<T> forest_plan_cost(const Instance<T>& instance,
                                  const std::vector<Pair>& arcs) {
  const std::size_t m = instance.x_size(), n = instance.y_size();
  std::vector<T> balance(m + n);
  for (std::size_t i = 0; i < m; ++i) balance[i] = instance.mu()[i];
  for (std::size_t j = 0; j < n; ++j) balance[m + j] = instance.nu()[j];
  std::vector<std::vector<std::size_t>> incident(m + n);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    incident[arcs[k].x].push_back(k);
    incident[m + arcs[k].y].push_back(k);
  }
  std::vector<bool> used(arcs.size(), false);
  std::vector<std::size_t> degree(m + n);
  for (std::size_t v = 0; v < m + n; ++v) degree[v] = incident[v].size();
  T cost(0);
  std::size_t remaining = arcs.size();
  while (remaining > 0) {
    std::size_t leaf = m + n;
    for (std::size_t v = 0; v < m + n && leaf == m + n; ++v)
      if (degree[v] == 1) leaf = v;
    if (leaf == m + n) return std::nullopt;  // a cycle: not a forest
    std::size_t k = *std::find_if(incident[leaf].begin(), incident[leaf].end(),
                                  [&](std::size_t a) { return !used[a]; });
    used[k] = true;
    --remaining;
    const T flow = balance[leaf];
    if (flow < T(0)) return std::nullopt;
    std::size_t other = leaf < m ? m + arcs[k].y : arcs[k].x;
    balance[leaf] = T(0);
    balance[other] -= flow;
    --degree[leaf];
    --degree[other];
    cost += flow * instance.cost(arcs[k].x, arcs[k].y).value();
  }
  for (const T& b : balance)
    if (b != T(0)) return std::nullopt;
  return cost;
}

}  // namespace detail

/// Exhaustive oracle: permutations for uniform square instances up to 8x8,
/// otherwise every forest-supported basic solution when x_size*y_size <= 12.
template <class T>
ExtendedCost<T> brute_force_optimal(const Instance<T>& instance) {
  const std::size_t m = instance.x_size(), n = instance.y_size();
  auto uniform = [](const std::vector<T>& w) {
    return std::all_of(w.begin(), w.end(),
                       [&](const T& v) { return v == T(1) / T(w.size()); });
  };
  std::optional<T> best;
  if (m == n && m <= 8 && uniform(instance.mu()) && uniform(instance.nu())) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      T sum(0);
      bool finite = true;
      for (std::size_t i = 0; i < n && finite; ++i) {
        finite = instance.cost_finite(i, perm[i]);
        if (finite) sum += instance.cost(i, perm[i]).value();
      }
      if (finite) {
        sum /= T(n);
        if (!best || sum < *best) best = sum;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else if (m * n <= 12) {
    std::vector<Pair> finite_arcs;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (instance.cost_finite(i, j)) finite_arcs.push_back({i, j});
    const std::size_t subsets = std::size_t{1} << finite_arcs.size();
    std::vector<Pair> chosen;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      chosen.clear();
      for (std::size_t k = 0; k < finite_arcs.size(); ++k)
        if (mask >> k & 1) chosen.push_back(finite_arcs[k]);
      if (chosen.size() + 1 > m + n) continue;
      if (auto c = detail::forest_plan_cost(instance, chosen); c && (!best || *c < *best))
        best = *c;
    }
  } else {
    throw InputError("instance too large for enumeration");
  }
  if (!best) return ExtendedCost<T>(kInfinity);
  return ExtendedCost<T>(*best);
}

template <class T>
OptimalityCheck<T> is_optimal(const Instance<T>& instance, const TransportPlan<T>& plan,
                              const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  ExtendedCost<T> cost = total_cost(instance, plan);
  if (cost.is_infinite()) throw InputError("plan has infinite cost");
  auto best = solve_exact(instance, tolerance);
  OptimalityCheck<T> out;
  out.plan_cost = cost.value();
  out.optimum = best.value.value();  // feasible: the plan itself is finite
  out.gap = out.plan_cost - out.optimum;
  out.optimal = approx_le(out.gap, T(0), tolerance);
  return out;
}

}  // namespace otcert
