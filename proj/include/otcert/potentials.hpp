// Dual potentials from chain infima over the support, the c-transform, and
// the strong c-monotonicity certificate built class by class.
#pragma once

#include "otcert/connectivity.hpp"
#include "otcert/core.hpp"
#include "otcert/monotonicity.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace otcert {

template <class T>
struct PotentialPair {
  std::vector<ExtendedReal<T>> phi;
  std::vector<ExtendedReal<T>> psi;
  Pair anchor;                      // phi(anchor.x) = 0
  std::vector<Pair> class_anchors;  // one gauge pair per class
};

/// Infimum over chains anchor = p_0, p_1, ..., p_n in the support of
///   sum_i [c(x_{i+1}, y_i) - c(x_i, y_i)] + c(x, y_n) - c(x_n, y_n).
/// The result is -inf where a negative chain cycle is reachable and +inf
/// where no chain ends at a finite c(x, y_n).
template <class T>
std::vector<ExtendedReal<T>> ruschendorf_phi(const Instance<T>& instance, const SupportSet& support,
                                             const Pair& anchor,
                                             const T& tolerance = ScalarTraits<T>::default_tolerance()) {
  auto it = std::find(support.begin(), support.end(), anchor);
  if (it == support.end()) throw InputError("anchor is not a support pair");
  auto graph = reach_graph(instance, support);
  const std::size_t n = support.size();
  auto own = [&](std::size_t p) { return instance.cost(support[p].x, support[p].y).value(); };
  auto hop = [&](std::size_t a, std::size_t b) {
    return instance.cost(support[b].x, support[a].y).value() - own(a);
  };

  std::vector<std::optional<T>> dist(n);
  dist[static_cast<std::size_t>(it - support.begin())] = T(0);
  auto relax_round = [&](std::vector<bool>* changed_nodes) {
    bool changed = false;
    for (std::size_t a = 0; a < n; ++a) {
      if (!dist[a]) continue;
      for (std::size_t b : graph.out[a]) {
        T cand = *dist[a] + hop(a, b);
        if (!dist[b] || definitely_lt(cand, *dist[b], tolerance)) {
          dist[b] = cand;
          changed = true;
          if (changed_nodes) (*changed_nodes)[b] = true;
        }
      }
    }
    return changed;
  };
  for (std::size_t round = 0; round + 1 < n; ++round)
    if (!relax_round(nullptr)) break;

  // Anything still improving lies on or behind a negative cycle.
  std::vector<bool> unbounded(n, false);
  relax_round(&unbounded);
  std::vector<std::size_t> stack;
  for (std::size_t p = 0; p < n; ++p)
    if (unbounded[p]) stack.push_back(p);
  while (!stack.empty()) {
    std::size_t a = stack.back();
    stack.pop_back();
    for (std::size_t b : graph.out[a])
      if (!unbounded[b]) {
        unbounded[b] = true;
        stack.push_back(b);
      }
  }

  std::vector<ExtendedReal<T>> phi(instance.x_size(), ExtendedReal<T>::pos_inf());
  for (std::size_t x = 0; x < instance.x_size(); ++x) {
    for (std::size_t p = 0; p < n; ++p) {
      if (!dist[p] || !instance.cost_finite(x, support[p].y)) continue;
      if (unbounded[p]) {
        phi[x] = ExtendedReal<T>::neg_inf();
        break;
      }
      T v = *dist[p] + instance.cost(x, support[p].y).value() - own(p);
      if (phi[x].is_pos_inf() || v < phi[x].value()) phi[x] = v;
    }
  }
  return phi;
}

/// psi(y) = min over x in domain of c(x, y) - phi(x); +inf when every
/// c(x, y) with x in the domain is infinite.
template <class T>
std::vector<ExtendedReal<T>> c_transform(const Instance<T>& instance,
                                         const std::vector<ExtendedReal<T>>& phi,
                                         const std::vector<std::size_t>& domain) {
  if (domain.empty()) throw InputError("c-transform over an empty domain");
  if (phi.size() != instance.x_size()) throw InputError("potential size does not match the instance");
  for (std::size_t x : domain)
    if (x >= phi.size() || !phi[x].is_finite()) throw InputError("potential not finite on the domain");
  std::vector<ExtendedReal<T>> psi(instance.y_size(), ExtendedReal<T>::pos_inf());
  for (std::size_t y = 0; y < instance.y_size(); ++y)
    for (std::size_t x : domain) {
      if (!instance.cost_finite(x, y)) continue;
      T v = instance.cost(x, y).value() - phi[x].value();
      if (psi[y].is_pos_inf() || v < psi[y].value()) psi[y] = v;
    }
  return psi;
}

template <class T>
struct StrongCheck {
  bool pass = false;
  std::optional<T> min_slack;        // over pairs where c - phi - psi is finite
  std::optional<Pair> min_slack_pair;
  T max_residual{0};                 // |phi + psi - c| over support pairs
  std::optional<Pair> max_residual_pair;
  std::vector<Pair> inequality_violations;
  std::vector<Pair> equality_violations;
  std::optional<T> dual_value;       // sum phi dmu + sum psi dnu when finite
};

/// phi + psi <= c on the product, with equality on the plan's support.
template <class T>
StrongCheck<T> verify_strong_monotonicity(const Instance<T>& instance, const TransportPlan<T>& plan,
                                          const PotentialPair<T>& pair,
                                          const T& tolerance = ScalarTraits<T>::default_tolerance(),
                                          const T& threshold = ScalarTraits<T>::default_support_threshold()) {
  require_same_shape(instance, plan);
  if (pair.phi.size() != instance.x_size() || pair.psi.size() != instance.y_size())
    throw InputError("potential size does not match the instance");
  StrongCheck<T> out;
  for (std::size_t x = 0; x < instance.x_size(); ++x)
    for (std::size_t y = 0; y < instance.y_size(); ++y) {
      const auto& f = pair.phi[x];
      const auto& g = pair.psi[y];
      const bool on_support = plan(x, y) > threshold;
      if (on_support) {
        if (!instance.cost_finite(x, y) || !f.is_finite() || !g.is_finite()) {
          out.equality_violations.push_back({x, y});
        } else {
          T r = abs_value(T(f.value() + g.value() - instance.cost(x, y).value()));
          if (!out.max_residual_pair || out.max_residual < r) {
            out.max_residual = r;
            out.max_residual_pair = Pair{x, y};
          }
          if (tolerance < r) out.equality_violations.push_back({x, y});
        }
      }
      if (!instance.cost_finite(x, y) || f.is_neg_inf() || g.is_neg_inf()) continue;
      if (f.is_pos_inf() || g.is_pos_inf()) {
        out.inequality_violations.push_back({x, y});
        continue;
      }
      T slack = instance.cost(x, y).value() - f.value() - g.value();
      if (!out.min_slack || slack < *out.min_slack) {
        out.min_slack = slack;
        out.min_slack_pair = Pair{x, y};
      }
      if (definitely_lt(slack, T(0), tolerance)) out.inequality_violations.push_back({x, y});
    }
  out.pass = out.inequality_violations.empty() && out.equality_violations.empty();

  T dual(0);
  bool finite = true;
  for (std::size_t x = 0; x < instance.x_size() && finite; ++x)
    if (instance.mu()[x] > T(0)) {
      if (!pair.phi[x].is_finite()) finite = false;
      else dual += instance.mu()[x] * pair.phi[x].value();
    }
  for (std::size_t y = 0; y < instance.y_size() && finite; ++y)
    if (instance.nu()[y] > T(0)) {
      if (!pair.psi[y].is_finite()) finite = false;
      else dual += instance.nu()[y] * pair.psi[y].value();
    }
  if (finite) out.dual_value = dual;
  return out;
}

enum class CertifyStatus { kCertified, kNotMonotone, kPerClassOnly, kVerificationFailed };

inline const char* to_string(CertifyStatus s) {
  switch (s) {
    case CertifyStatus::kCertified:
      return "certified";
    case CertifyStatus::kNotMonotone:
      return "not c-monotone";
    case CertifyStatus::kPerClassOnly:
      return "per-class certificate only";
    default:
      return "verification failed";
  }
}

/// Cross-class constraint offset_i - offset_j <= bound coming from c(x, y)
/// with x in class i and y in class j.
template <class T>
struct GlueConstraint {
  std::size_t source_class;
  std::size_t target_class;
  T bound;
  Pair pair;
};

namespace detail {

// Difference-constraint solve. Returns offsets, or the index of a constraint
// on an infeasible cycle.
template <class T>
std::variant<std::vector<T>, std::size_t> solve_offsets(std::size_t classes,
                                                        const std::vector<GlueConstraint<T>>& cons,
                                                        const T& tolerance) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<T> dist(classes, T(0));
  std::vector<std::size_t> pred(classes, kNone), via(classes, kNone);
  for (std::size_t round = 0; round <= classes; ++round) {
    bool changed = false;
    for (std::size_t k = 0; k < cons.size(); ++k) {
      const auto& c = cons[k];
      T cand = dist[c.target_class] + c.bound;
      if (definitely_lt(cand, dist[c.source_class], tolerance)) {
        dist[c.source_class] = cand;
        pred[c.source_class] = c.target_class;
        via[c.source_class] = k;
        changed = true;
      }
    }
    if (!changed) return dist;
  }
  auto cycle = predecessor_cycle(pred);
  if (cycle.empty()) throw std::logic_error("offset search did not settle");
  return via[cycle.front()];
}

}  // namespace detail

template <class T>
struct StrongCertificate {
  CertifyStatus status = CertifyStatus::kVerificationFailed;
  std::optional<PotentialPair<T>> potentials;
  std::optional<ViolatingCycle<T>> violation;
  std::optional<GlueConstraint<T>> blocking;
  ConnectivityDecomposition decomposition;
  std::optional<StrongCheck<T>> verification;

  bool certified() const { return status == CertifyStatus::kCertified; }
};

/// Builds phi, psi with phi + psi <= c and equality on the support. Each
/// class gets chain potentials anchored at its lowest pair; classes are then
/// shifted against each other to satisfy the cross-class inequalities.
template <class T>
StrongCertificate<T> certify_strong(const Instance<T>& instance, const TransportPlan<T>& plan,
                                    const T& tolerance = ScalarTraits<T>::default_tolerance(),
                                    const T& threshold = ScalarTraits<T>::default_support_threshold()) {
  require_same_shape(instance, plan);
  if (total_cost(instance, plan).is_infinite()) throw InputError("plan has infinite cost");
  StrongCertificate<T> out;
  const SupportSet supp = support(plan, threshold);
  if (supp.empty()) throw InputError("plan has empty support");
  auto mono = check_c_monotone(instance, supp, tolerance);
  if (!mono.ok()) {
    out.status = CertifyStatus::kNotMonotone;
    out.violation = mono.violation;
    return out;
  }
  out.decomposition = decompose(instance, supp);
  const auto& classes = out.decomposition.classes;
  const std::size_t k = classes.size();

  PotentialPair<T> pot{std::vector<ExtendedReal<T>>(instance.x_size(), ExtendedReal<T>::neg_inf()),
                       std::vector<ExtendedReal<T>>(instance.y_size(), ExtendedReal<T>::neg_inf()),
                       classes.front().pairs.front(),
                       {}};
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> x_class(instance.x_size(), kNone), y_class(instance.y_size(), kNone);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& c = classes[i];
    pot.class_anchors.push_back(c.pairs.front());
    auto phi = ruschendorf_phi(instance, c.pairs, c.pairs.front(), tolerance);
    for (std::size_t x : c.sources) {
      if (!phi[x].is_finite()) throw std::logic_error("chain potential not finite on its class");
      pot.phi[x] = phi[x];
      x_class[x] = i;
    }
    auto psi = c_transform(instance, phi, c.sources);
    for (std::size_t y : c.targets) {
      pot.psi[y] = psi[y];
      y_class[y] = i;
    }
  }

  std::vector<GlueConstraint<T>> cons;
  for (std::size_t x = 0; x < instance.x_size(); ++x)
    for (std::size_t y = 0; y < instance.y_size(); ++y) {
      if (x_class[x] == kNone || y_class[y] == kNone || x_class[x] == y_class[y]) continue;
      if (!instance.cost_finite(x, y)) continue;
      cons.push_back({x_class[x], y_class[y],
                      T(instance.cost(x, y).value() - pot.phi[x].value() - pot.psi[y].value()),
                      Pair{x, y}});
    }
  auto offsets = detail::solve_offsets(k, cons, tolerance);
  if (std::holds_alternative<std::size_t>(offsets)) {
    out.status = CertifyStatus::kPerClassOnly;
    out.blocking = cons[std::get<std::size_t>(offsets)];
    out.potentials = std::move(pot);
    return out;
  }
  auto shift = std::get<std::vector<T>>(offsets);
  const T base = shift.front();
  for (std::size_t x = 0; x < instance.x_size(); ++x)
    if (x_class[x] != kNone) pot.phi[x] = T(pot.phi[x].value() + shift[x_class[x]] - base);
  for (std::size_t y = 0; y < instance.y_size(); ++y)
    if (y_class[y] != kNone) pot.psi[y] = T(pot.psi[y].value() - shift[y_class[y]] + base);

  out.verification = verify_strong_monotonicity(instance, plan, pot, tolerance, threshold);
  out.status = out.verification->pass ? CertifyStatus::kCertified : CertifyStatus::kVerificationFailed;
  out.potentials = std::move(pot);
  return out;
}

}  // namespace otcert
