// Instance generators: discretizations of the classical counterexamples plus
// seeded random instances for property and acceptance testing.
#pragma once

#include "otcert/core.hpp"
#include "otcert/solver.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace otcert {

namespace detail {

template <class T>
T sqrt_approx(const T& v);

template <>
inline Rational sqrt_approx<Rational>(const Rational& v) {
  return sqrt_floor(v);
}

template <>
inline double sqrt_approx<double>(const double& v) {
  return std::sqrt(v);
}

template <class T>
std::vector<T> uniform_weights(std::size_t n) {
  return std::vector<T>(n, T(1) / T(static_cast<long>(n)));
}

template <class T>
std::vector<T> random_weights(std::mt19937_64& rng, std::size_t n, int max_units = 5) {
  std::uniform_int_distribution<int> d(1, max_units);
  std::vector<T> w(n);
  T sum(0);
  for (T& v : w) sum += (v = T(d(rng)));
  for (T& v : w) v /= sum;
  return w;
}

template <class T>
T small_fraction(std::mt19937_64& rng, int max_numerator, int max_denominator) {
  std::uniform_int_distribution<int> num(0, max_numerator);
  std::uniform_int_distribution<int> den(1, max_denominator);
  return T(num(rng)) / T(den(rng));
}

}  // namespace detail

/// Cyclic discretization of the Ambrosio-Pratelli example: cost a on the
/// diagonal, b on i -> i+1 (mod N), infinite elsewhere.
template <class T>
RawInstance<T> gen_ap(std::size_t n, const T& a, const T& b) {
  if (n < 2) throw InputError("ap requires N >= 2");
  if (a < T(0) || b < T(0)) throw InputError("ap requires a, b >= 0");
  RawInstance<T> r;
  r.mu = r.nu = detail::uniform_weights<T>(n);
  r.cost.assign(n, std::vector<ExtendedCost<T>>(n, ExtendedCost<T>(kInfinity)));
  for (std::size_t i = 0; i < n; ++i) {
    r.cost[i][i] = ExtendedCost<T>(a);
    r.cost[i][(i + 1) % n] = ExtendedCost<T>(b);
  }
  return r;
}

/// Uniform mass on the diagonal of an n x n grid.
template <class T>
std::vector<std::vector<T>> diagonal_plan(std::size_t n) {
  std::vector<std::vector<T>> p(n, std::vector<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i) p[i][i] = T(1) / T(static_cast<long>(n));
  return p;
}

/// Uniform mass on i -> i+1 (mod n).
template <class T>
std::vector<std::vector<T>> cyclic_shift_plan(std::size_t n) {
  std::vector<std::vector<T>> p(n, std::vector<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i) p[i][(i + 1) % n] = T(1) / T(static_cast<long>(n));
  return p;
}

/// Grid discretization of moving [0,1) to [1,2) under squared distance,
/// with the cost raised to 2 on the exact unit shift.
template <class T>
RawInstance<T> gen_shift(std::size_t n) {
  if (n < 2) throw InputError("shift requires N >= 2");
  RawInstance<T> r;
  r.mu = r.nu = detail::uniform_weights<T>(n);
  const T step = T(1) / T(static_cast<long>(n));
  r.cost.assign(n, std::vector<ExtendedCost<T>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        r.cost[i][j] = ExtendedCost<T>(T(2));
      } else {
        T d = T(1) + (T(static_cast<long>(j)) - T(static_cast<long>(i))) * step;
        r.cost[i][j] = ExtendedCost<T>(T(d * d));
      }
    }
  return r;
}

/// (N+1)-point grid on [0,1]: infinite above the diagonal, 1 - sqrt(x - y)
/// on and below it. In rational mode the square root is rounded down to
/// 1e-18.
template <class T>
RawInstance<T> gen_zero_one(std::size_t n) {
  if (n < 1) throw InputError("zero-one requires N >= 1");
  const std::size_t points = n + 1;
  RawInstance<T> r;
  r.mu = r.nu = detail::uniform_weights<T>(points);
  r.cost.assign(points, std::vector<ExtendedCost<T>>(points, ExtendedCost<T>(kInfinity)));
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      T gap = T(static_cast<long>(i - j)) / T(static_cast<long>(n));
      T c = T(1) - detail::sqrt_approx(gap);
      if (c < T(0)) c = T(0);
      r.cost[i][j] = ExtendedCost<T>(c);
    }
  return r;
}

struct RandomParams {
  std::size_t rows = 3;
  std::size_t cols = 3;
  std::uint64_t seed = 0;
  double inf_density = 0.0;
  bool uniform = false;
  int max_cost = 9;
  int max_denominator = 1;
};

/// Seeded random instance. With inf_density > 0 the infinite pattern is
/// resampled until a finite plan exists.
template <class T>
RawInstance<T> gen_random(const RandomParams& params) {
  if (params.rows == 0 || params.cols == 0) throw InputError("random requires positive sizes");
  if (params.inf_density < 0.0 || params.inf_density >= 1.0)
    throw InputError("inf density must lie in [0, 1)");
  if (params.max_cost < 0 || params.max_denominator < 1) throw InputError("bad cost range");
  std::mt19937_64 rng(params.seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    RawInstance<T> r;
    if (params.uniform) {
      r.mu = detail::uniform_weights<T>(params.rows);
      r.nu = detail::uniform_weights<T>(params.cols);
    } else {
      r.mu = detail::random_weights<T>(rng, params.rows);
      r.nu = detail::random_weights<T>(rng, params.cols);
    }
    std::bernoulli_distribution is_inf(params.inf_density);
    r.cost.assign(params.rows, std::vector<ExtendedCost<T>>(params.cols));
    for (auto& row : r.cost)
      for (auto& c : row)
        c = is_inf(rng) ? ExtendedCost<T>(kInfinity)
                        : ExtendedCost<T>(detail::small_fraction<T>(rng, params.max_cost,
                                                                    params.max_denominator));
    if (params.inf_density == 0.0) return r;
    auto inst = validate_instance(r);
    if (solve_transport(finite_arc_problem(inst), ScalarTraits<T>::default_tolerance()).feasible)
      return r;
  }
  throw InputError("could not sample a feasible instance at this infinity density");
}

/// Block-structured instance: finite costs inside k diagonal blocks, finite
/// cross costs only from block i to block j > i, infinite otherwise. Block
/// masses agree on both sides so a block-diagonal plan exists.
template <class T>
RawInstance<T> gen_blocks(std::size_t blocks, std::uint64_t seed) {
  if (blocks < 1) throw InputError("blocks requires k >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 3);
  std::bernoulli_distribution cross(0.5);
  auto block_mass = detail::random_weights<T>(rng, blocks);
  std::vector<std::size_t> row_block, col_block;
  RawInstance<T> r;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t a = size(rng), c = size(rng);
    for (const T& w : detail::random_weights<T>(rng, a)) {
      r.mu.push_back(w * block_mass[b]);
      row_block.push_back(b);
    }
    for (const T& w : detail::random_weights<T>(rng, c)) {
      r.nu.push_back(w * block_mass[b]);
      col_block.push_back(b);
    }
  }
  r.cost.assign(r.mu.size(), std::vector<ExtendedCost<T>>(r.nu.size()));
  for (std::size_t i = 0; i < r.mu.size(); ++i)
    for (std::size_t j = 0; j < r.nu.size(); ++j) {
      bool finite = row_block[i] == col_block[j] || (row_block[i] < col_block[j] && cross(rng));
      r.cost[i][j] = finite ? ExtendedCost<T>(detail::small_fraction<T>(rng, 9, 1))
                            : ExtendedCost<T>(kInfinity);
    }
  return r;
}

/// A vertex of the finite-arc transportation polytope: the optimum for a
/// random integer objective on the finite arcs.
template <class T>
TransportPlan<T> random_vertex_plan(const Instance<T>& instance, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 99);
  auto problem = finite_arc_problem(instance);
  for (std::size_t i = 0; i < instance.x_size(); ++i)
    for (std::size_t j = 0; j < instance.y_size(); ++j)
      if (problem.cost(i, j)) problem.cost(i, j) = T(d(rng));
  auto sol = solve_transport(problem, ScalarTraits<T>::default_tolerance());
  if (!sol.feasible) throw InputError("instance has no finite plan");
  return TransportPlan<T>(std::move(sol.flow));
}

}  // namespace otcert
