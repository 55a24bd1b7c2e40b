// Reachability between support pairs through finite crossing costs, its
// strongly connected classes, and the check that optimal mass stays inside
// the class rectangles.
#pragma once

#include "otcert/core.hpp"
#include "otcert/solver.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <optional>
#include <utility>
#include <vector>

namespace otcert {

/// One-step reachability on support pairs: p -> p' iff cost(x_p', y_p) is
/// finite.
struct ReachGraph {
  SupportSet nodes;
  std::vector<std::vector<std::size_t>> out;

  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t u = 0; u < out.size(); ++u)
      for (std::size_t v : out[u]) e.emplace_back(u, v);
    return e;
  }
};

struct SupportClass {
  std::vector<std::size_t> sources;  // C_i, sorted
  std::vector<std::size_t> targets;  // D_i, sorted
  SupportSet pairs;                  // sorted
};

struct ConnectivityDecomposition {
  SupportSet nodes;  // sorted support
  std::vector<std::pair<std::size_t, std::size_t>> reach_edges;
  std::vector<SupportClass> classes;
  std::vector<std::size_t> class_of;  // per node

  /// Class of a source index, or nullopt when no support pair uses it.
  std::optional<std::size_t> class_of_source(std::size_t x) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (std::binary_search(classes[i].sources.begin(), classes[i].sources.end(), x)) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> class_of_target(std::size_t y) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (std::binary_search(classes[i].targets.begin(), classes[i].targets.end(), y)) return i;
    return std::nullopt;
  }
};

template <class T>
ReachGraph reach_graph(const Instance<T>& instance, const SupportSet& support) {
  for (const Pair& p : support)
    if (!instance.cost_finite(p.x, p.y))
      throw InputError("support pair (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                       ") has infinite cost");
  ReachGraph g{support, std::vector<std::vector<std::size_t>>(support.size())};
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = 0; b < support.size(); ++b)
      if (a != b && instance.cost_finite(support[b].x, support[a].y)) g.out[a].push_back(b);
  return g;
}

namespace detail {

// Tarjan's algorithm with an explicit stack. Component ids come out in
// reverse topological order of the condensation.
inline std::vector<std::size_t> strong_components(const std::vector<std::vector<std::size_t>>& out,
                                                  std::size_t& count) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const std::size_t n = out.size();
  std::vector<std::size_t> index(n, kNone), low(n, 0), comp(n, kNone), stack;
  std::vector<bool> on_stack(n, false);
  std::size_t next_index = 0;
  count = 0;
  struct Frame {
    std::size_t v;
    std::size_t edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < out[f.v].size()) {
        std::size_t w = out[f.v][f.edge++];
        if (index[w] == kNone) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] != index[v]) continue;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = count;
      } while (w != v);
      ++count;
    }
  }
  return comp;
}

}  // namespace detail

/// Classes are the strongly connected components of the reach graph,
/// numbered by their smallest source index. The input order of the support
/// does not matter.
template <class T>
ConnectivityDecomposition decompose(const Instance<T>& instance, SupportSet support) {
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  auto graph = reach_graph(instance, support);
  std::size_t count = 0;
  auto comp = detail::strong_components(graph.out, count);

  std::vector<SupportClass> raw(count);
  for (std::size_t k = 0; k < support.size(); ++k) {
    auto& c = raw[comp[k]];
    c.pairs.push_back(support[k]);
    c.sources.push_back(support[k].x);
    c.targets.push_back(support[k].y);
  }
  for (auto& c : raw) {
    std::sort(c.sources.begin(), c.sources.end());
    c.sources.erase(std::unique(c.sources.begin(), c.sources.end()), c.sources.end());
    std::sort(c.targets.begin(), c.targets.end());
    c.targets.erase(std::unique(c.targets.begin(), c.targets.end()), c.targets.end());
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw[a].sources.front() < raw[b].sources.front();
  });
  std::vector<std::size_t> rank(count);
  for (std::size_t i = 0; i < count; ++i) rank[order[i]] = i;

  ConnectivityDecomposition out;
  out.nodes = support;
  out.reach_edges = graph.edges();
  for (std::size_t i : order) out.classes.push_back(std::move(raw[i]));
  out.class_of.resize(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) out.class_of[k] = rank[comp[k]];
  return out;
}

template <class T>
bool is_connecting(const Instance<T>& instance, const SupportSet& support) {
  if (support.empty()) return false;
  if (instance.all_finite()) return true;  // the reach graph is complete
  return decompose(instance, support).classes.size() == 1;
}

/// ≲ as a boolean matrix over decomposition nodes (reflexive-transitive
/// closure of the reach edges).
inline Matrix<char> reach_closure(const ConnectivityDecomposition& d) {
  const std::size_t n = d.nodes.size();
  Matrix<char> r(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) r(i, i) = 1;
  for (auto [u, v] : d.reach_edges) r(u, v) = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r(i, k))
        for (std::size_t j = 0; j < n; ++j)
          if (r(k, j)) r(i, j) = 1;
  return r;
}

template <class T>
struct ConfinementReport {
  bool feasible = false;
  T off_class_mass{0};
  Matrix<T> witness;  // a finite plan attaining the maximum
  std::vector<std::size_t> excluded_classes;  // classes of zero source mass
};

/// Maximizes, over plans supported on finite arcs, the mass outside the
/// union of C_i x D_i.
template <class T>
ConfinementReport<T> check_class_confinement(const Instance<T>& instance,
                                             const ConnectivityDecomposition& d,
                                             const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  ConfinementReport<T> report;
  Matrix<char> inside(instance.x_size(), instance.y_size(), 0);
  for (std::size_t i = 0; i < d.classes.size(); ++i) {
    const auto& c = d.classes[i];
    T mass(0);
    for (std::size_t x : c.sources) mass += instance.mu()[x];
    if (mass == T(0)) {
      report.excluded_classes.push_back(i);
      continue;
    }
    for (std::size_t x : c.sources)
      for (std::size_t y : c.targets) inside(x, y) = 1;
  }
  auto problem = finite_arc_problem(instance);
  for (std::size_t x = 0; x < instance.x_size(); ++x)
    for (std::size_t y = 0; y < instance.y_size(); ++y)
      if (problem.cost(x, y)) problem.cost(x, y) = inside(x, y) ? T(0) : T(-1);
  auto sol = solve_transport(problem, tolerance);
  if (!sol.feasible) return report;
  report.feasible = true;
  report.off_class_mass = -sol.value;
  report.witness = std::move(sol.flow);
  return report;
}

/// p_ij = plan(C_i x D_j) / mu(C_i) for the classes of a decomposition.
/// Rows of zero-mass classes are left at zero.
template <class T>
Matrix<T> class_transition_matrix(const Instance<T>& instance, const ConnectivityDecomposition& d,
                                  const TransportPlan<T>& plan) {
  const std::size_t k = d.classes.size();
  Matrix<T> p(k, k, T(0));
  for (std::size_t i = 0; i < k; ++i) {
    T mass(0);
    for (std::size_t x : d.classes[i].sources) mass += instance.mu()[x];
    if (mass == T(0)) continue;
    for (std::size_t j = 0; j < k; ++j) {
      T flow(0);
      for (std::size_t x : d.classes[i].sources)
        for (std::size_t y : d.classes[j].targets) flow += plan(x, y);
      p(i, j) = flow / mass;
    }
  }
  return p;
}

}  // namespace otcert
