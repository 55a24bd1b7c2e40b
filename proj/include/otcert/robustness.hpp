// Storage extensions: a third party adds z storage points of weight lambda
// with finite tolls to and from them. A plan is defended when the plan plus
// the identity on storage stays optimal.
#pragma once

#include "otcert/core.hpp"
#include "otcert/potentials.hpp"
#include "otcert/solver.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace otcert {

template <class T>
struct ExtendedInstance {
  std::size_t x_size = 0;
  std::size_t y_size = 0;
  std::size_t z_size = 0;
  std::vector<T> lambda;
  std::vector<T> supply;  // (mu, lambda)
  std::vector<T> demand;  // (nu, lambda)
  Matrix<ExtendedCost<T>> cost;  // (x + z) x (y + z)

  TransportProblem<T> problem() const {
    TransportProblem<T> p{supply, demand, Matrix<std::optional<T>>(cost.rows(), cost.cols())};
    for (std::size_t a = 0; a < cost.rows(); ++a)
      for (std::size_t b = 0; b < cost.cols(); ++b)
        if (cost(a, b).is_finite()) p.cost(a, b) = cost(a, b).value();
    return p;
  }
};

/// Extension with explicit tolls: to_storage is x_size x z, from_storage is
/// z x y_size.
template <class T>
ExtendedInstance<T> extend_with_tolls(const Instance<T>& instance, const std::vector<T>& lambda,
                                      const Matrix<T>& to_storage, const Matrix<T>& from_storage) {
  const std::size_t m = instance.x_size(), n = instance.y_size(), z = lambda.size();
  if (to_storage.rows() != m || to_storage.cols() != z || from_storage.rows() != z ||
      from_storage.cols() != n)
    throw InputError("toll matrix shape does not match the extension");
  for (const T& w : lambda)
    if (w < T(0)) throw InputError("storage weight must be nonnegative");
  ExtendedInstance<T> e{m, n, z, lambda, instance.mu(), instance.nu(),
                        Matrix<ExtendedCost<T>>(m + z, n + z)};
  e.supply.insert(e.supply.end(), lambda.begin(), lambda.end());
  e.demand.insert(e.demand.end(), lambda.begin(), lambda.end());
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < n; ++y) e.cost(x, y) = instance.cost(x, y);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t k = 0; k < z; ++k) e.cost(x, n + k) = ExtendedCost<T>(to_storage(x, k));
  for (std::size_t k = 0; k < z; ++k)
    for (std::size_t y = 0; y < n; ++y) e.cost(m + k, y) = ExtendedCost<T>(from_storage(k, y));
  for (std::size_t k = 0; k < z; ++k)
    for (std::size_t l = 0; l < z; ++l) e.cost(m + k, n + l) = ExtendedCost<T>(T(0));
  return e;
}

namespace detail {

template <class T>
T toll_from(const ExtendedReal<T>& v) {
  if (v.is_neg_inf()) return T(0);
  if (v.is_pos_inf()) throw InputError("potential is +inf, no finite toll");
  return std::max(v.value(), T(0));
}

// Defense tolls: max(phi, 0) into storage, max(psi, 0) out of it.
template <class T>
std::pair<Matrix<T>, Matrix<T>> defense_tolls(const PotentialPair<T>& pair, std::size_t z) {
  Matrix<T> in(pair.phi.size(), z), out(z, pair.psi.size());
  for (std::size_t x = 0; x < pair.phi.size(); ++x)
    for (std::size_t k = 0; k < z; ++k) in(x, k) = toll_from(pair.phi[x]);
  for (std::size_t k = 0; k < z; ++k)
    for (std::size_t y = 0; y < pair.psi.size(); ++y) out(k, y) = toll_from(pair.psi[y]);
  return {std::move(in), std::move(out)};
}

}  // namespace detail

template <class T>
ExtendedInstance<T> build_extension(const Instance<T>& instance, const PotentialPair<T>& pair,
                                    std::size_t z_size, const std::vector<T>& lambda) {
  if (lambda.size() != z_size) throw InputError("lambda needs one weight per storage point");
  auto [in, out] = detail::defense_tolls(pair, z_size);
  return extend_with_tolls(instance, lambda, in, out);
}

/// plan on X x Y plus lambda on the storage diagonal.
template <class T>
Matrix<T> extended_plan(const TransportPlan<T>& plan, const ExtendedInstance<T>& e) {
  Matrix<T> m(e.x_size + e.z_size, e.y_size + e.z_size, T(0));
  for (std::size_t x = 0; x < e.x_size; ++x)
    for (std::size_t y = 0; y < e.y_size; ++y) m(x, y) = plan(x, y);
  for (std::size_t k = 0; k < e.z_size; ++k) m(e.x_size + k, e.y_size + k) = e.lambda[k];
  return m;
}

template <class T>
T extended_plan_cost(const TransportPlan<T>& plan, const ExtendedInstance<T>& e) {
  T total(0);
  auto m = extended_plan(plan, e);
  for (std::size_t a = 0; a < m.rows(); ++a)
    for (std::size_t b = 0; b < m.cols(); ++b)
      if (m(a, b) != T(0)) total += m(a, b) * e.cost(a, b).value();
  return total;
}

template <class T>
struct DefenseReport {
  bool defended = false;
  std::string error;  // set when no defense could be built
  StrongCertificate<T> certificate;
  std::optional<ExtendedInstance<T>> extension;
  T plan_cost{0};  // extended cost of plan + identity on storage
  T optimum{0};
  T gap{0};
};

/// Builds the defense tolls from a strong certificate and checks that the
/// extended plan is optimal.
template <class T>
DefenseReport<T> check_robust_defense(const Instance<T>& instance, const TransportPlan<T>& plan,
                                      std::size_t z_size, const std::vector<T>& lambda,
                                      const T& tolerance = ScalarTraits<T>::default_tolerance(),
                                      const T& threshold = ScalarTraits<T>::default_support_threshold()) {
  if (lambda.size() != z_size) throw InputError("lambda needs one weight per storage point");
  DefenseReport<T> r;
  r.certificate = certify_strong(instance, plan, tolerance, threshold);
  if (!r.certificate.certified()) {
    r.error = "not strongly c-monotone (" + std::string(to_string(r.certificate.status)) + ")";
    return r;
  }
  r.extension = build_extension(instance, *r.certificate.potentials, z_size, lambda);
  auto sol = solve_transport(r.extension->problem(), tolerance);
  if (!sol.feasible) throw std::logic_error("extended instance has no finite plan");
  r.plan_cost = extended_plan_cost(plan, *r.extension);
  r.optimum = sol.value;
  r.gap = r.plan_cost - r.optimum;
  r.defended = approx_le(r.gap, T(0), tolerance);
  return r;
}

enum class TollMode { kAboveDefense, kRandom };

template <class T>
struct AdversarialReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  TollMode mode = TollMode::kAboveDefense;
  std::optional<T> best_improvement;  // max over trials of plan cost - extended optimum
  std::optional<std::size_t> best_trial;
  std::optional<Matrix<T>> best_to_storage;
  std::optional<Matrix<T>> best_from_storage;

  bool improvement_found(const T& tolerance) const {
    return best_improvement && definitely_lt(T(0), *best_improvement, tolerance);
  }
};

namespace detail {

template <class T>
T cost_spread(const Instance<T>& instance) {
  std::optional<T> lo, hi;
  for (std::size_t x = 0; x < instance.x_size(); ++x)
    for (std::size_t y = 0; y < instance.y_size(); ++y)
      if (instance.cost_finite(x, y)) {
        const T& c = instance.cost(x, y).value();
        if (!lo || c < *lo) lo = c;
        if (!hi || *hi < c) hi = c;
      }
  if (!lo || *hi == *lo) return T(1);
  return *hi - *lo;
}

// Nonnegative surcharge on a 1/64 grid of [0, spread]; zero half the time.
template <class T>
T random_toll(std::mt19937_64& rng, const T& spread) {
  if (rng() % 2 == 0) return T(0);
  std::uniform_int_distribution<int> d(0, 64);
  return spread * T(d(rng)) / T(64);
}

}  // namespace detail

/// Tries random finite tolls. When the plan has a strong certificate each
/// trial adds a random surcharge on top of the defense tolls, so a defended
/// plan should never lose; otherwise the tolls are drawn from scratch.
template <class T>
AdversarialReport<T> adversarial_search(const Instance<T>& instance, const TransportPlan<T>& plan,
                                        std::size_t z_size, const std::vector<T>& lambda,
                                        std::size_t trials, std::uint64_t seed,
                                        const T& tolerance = ScalarTraits<T>::default_tolerance(),
                                        const T& threshold = ScalarTraits<T>::default_support_threshold()) {
  if (lambda.size() != z_size) throw InputError("lambda needs one weight per storage point");
  if (total_cost(instance, plan).is_infinite()) throw InputError("plan has infinite cost");
  AdversarialReport<T> r;
  r.trials = trials;
  r.seed = seed;
  if (trials == 0) return r;

  Matrix<T> base_in(instance.x_size(), z_size, T(0)), base_out(z_size, instance.y_size(), T(0));
  auto cert = certify_strong(instance, plan, tolerance, threshold);
  if (cert.certified()) {
    std::tie(base_in, base_out) = detail::defense_tolls(*cert.potentials, z_size);
  } else {
    r.mode = TollMode::kRandom;
  }
  const T spread = detail::cost_spread(instance);
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    Matrix<T> in = base_in, out = base_out;
    for (std::size_t x = 0; x < instance.x_size(); ++x)
      for (std::size_t k = 0; k < z_size; ++k) in(x, k) += detail::random_toll(rng, spread);
    for (std::size_t k = 0; k < z_size; ++k)
      for (std::size_t y = 0; y < instance.y_size(); ++y) out(k, y) += detail::random_toll(rng, spread);
    auto e = extend_with_tolls(instance, lambda, in, out);
    auto sol = solve_transport(e.problem(), tolerance);
    if (!sol.feasible) throw std::logic_error("extended instance has no finite plan");
    T improvement = extended_plan_cost(plan, e) - sol.value;
    if (!r.best_improvement || *r.best_improvement < improvement) {
      r.best_improvement = improvement;
      r.best_trial = t;
      r.best_to_storage = std::move(in);
      r.best_from_storage = std::move(out);
    }
  }
  return r;
}

inline const char* to_string(TollMode m) {
  return m == TollMode::kAboveDefense ? "above-defense" : "random";
}

}  // namespace otcert
