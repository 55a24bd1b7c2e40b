// Domain types shared by every module: instances, plans, supports.
#pragma once

#include "otcert/extended.hpp"
#include "otcert/scalar.hpp"

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace otcert {

/// Dense row-major matrix.
template <class V>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const V& fill = V())
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  V& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const V& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<V> data_;
};

/// A (source index, target index) pair of the product space.
struct Pair {
  std::size_t x = 0;
  std::size_t y = 0;
  friend auto operator<=>(const Pair&, const Pair&) = default;
};

using SupportSet = std::vector<Pair>;

/// Unvalidated input, as read from JSON or built by a generator.
template <class T>
struct RawInstance {
  std::vector<T> mu;
  std::vector<T> nu;
  std::vector<std::vector<ExtendedCost<T>>> cost;
  std::optional<std::vector<std::vector<T>>> plan;
};

template <class T>
class Instance;

template <class T>
Instance<T> validate_instance(const RawInstance<T>& raw, const T& tolerance);

/// A validated transport problem (mu, nu, c). Immutable once built.
template <class T>
class Instance {
 public:
  std::size_t x_size() const { return mu_.size(); }
  std::size_t y_size() const { return nu_.size(); }
  const std::vector<T>& mu() const { return mu_; }
  const std::vector<T>& nu() const { return nu_; }
  const Matrix<ExtendedCost<T>>& cost() const { return cost_; }
  const ExtendedCost<T>& cost(std::size_t x, std::size_t y) const {
    return cost_(x, y);
  }
  bool cost_finite(std::size_t x, std::size_t y) const {
    return cost_(x, y).is_finite();
  }
  bool all_finite() const {
    for (std::size_t i = 0; i < x_size(); ++i)
      for (std::size_t j = 0; j < y_size(); ++j)
        if (!cost_finite(i, j)) return false;
    return true;
  }

 private:
  friend Instance validate_instance<T>(const RawInstance<T>&, const T&);
  Instance(std::vector<T> mu, std::vector<T> nu, Matrix<ExtendedCost<T>> cost)
      : mu_(std::move(mu)), nu_(std::move(nu)), cost_(std::move(cost)) {}

  std::vector<T> mu_;
  std::vector<T> nu_;
  Matrix<ExtendedCost<T>> cost_;
};

namespace detail {

template <class T>
std::vector<T> normalized_weights(const std::vector<T>& w, const T& tolerance,
                                  const char* label) {
  if (w.empty()) throw InputError(std::string(label) + " is empty");
  T sum(0);
  for (const T& v : w) {
    if (v < T(0)) throw InputError(std::string("negative weight in ") + label);
    sum += v;
  }
  if (!approx_eq(sum, T(1), tolerance)) {
    throw InputError(std::string("marginal sum ") +
                     ScalarTraits<T>::format(sum) + " != 1 in " + label);
  }
  std::vector<T> out = w;
  if (sum != T(1))
    for (T& v : out) v /= sum;
  return out;
}

}  // namespace detail

template <class T>
Instance<T> validate_instance(const RawInstance<T>& raw, const T& tolerance) {
  auto mu = detail::normalized_weights(raw.mu, tolerance, "mu");
  auto nu = detail::normalized_weights(raw.nu, tolerance, "nu");
  if (raw.cost.size() != mu.size())
    throw InputError("dimension mismatch: cost has " +
                     std::to_string(raw.cost.size()) + " rows, mu has " +
                     std::to_string(mu.size()));
  Matrix<ExtendedCost<T>> cost(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (raw.cost[i].size() != nu.size())
      throw InputError("dimension mismatch: cost row " + std::to_string(i) +
                       " has " + std::to_string(raw.cost[i].size()) +
                       " entries, nu has " + std::to_string(nu.size()));
    for (std::size_t j = 0; j < nu.size(); ++j) cost(i, j) = raw.cost[i][j];
  }
  return Instance<T>(std::move(mu), std::move(nu), std::move(cost));
}

template <class T>
Instance<T> validate_instance(const RawInstance<T>& raw) {
  return validate_instance(raw, ScalarTraits<T>::parse("1e-9"));
}

/// Nonnegative mass matrix. Total mass is 1 for plans in Pi(mu, nu) and
/// 1 + lambda(Z) for plans of an extended problem.
template <class T>
class TransportPlan {
 public:
  TransportPlan() = default;
  explicit TransportPlan(Matrix<T> mass) : mass_(std::move(mass)) {
    for (std::size_t i = 0; i < mass_.rows(); ++i)
      for (std::size_t j = 0; j < mass_.cols(); ++j)
        if (mass_(i, j) < T(0)) throw InputError("negative plan entry");
  }
  static TransportPlan from_rows(const std::vector<std::vector<T>>& rows) {
    std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix<T> m(rows.size(), cols, T(0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw InputError("ragged plan matrix");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return TransportPlan(std::move(m));
  }

  std::size_t rows() const { return mass_.rows(); }
  std::size_t cols() const { return mass_.cols(); }
  const Matrix<T>& mass() const { return mass_; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return mass_(i, j);
  }
  T total_mass() const {
    T s(0);
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) s += mass_(i, j);
    return s;
  }

  friend bool operator==(const TransportPlan&, const TransportPlan&) = default;

 private:
  Matrix<T> mass_;
};

template <class T>
void require_same_shape(const Instance<T>& instance,
                        const TransportPlan<T>& plan) {
  if (plan.rows() != instance.x_size() || plan.cols() != instance.y_size())
    throw InputError("dimension mismatch: plan is " +
                     std::to_string(plan.rows()) + "x" +
                     std::to_string(plan.cols()) + ", instance is " +
                     std::to_string(instance.x_size()) + "x" +
                     std::to_string(instance.y_size()));
}

template <class T>
std::pair<std::vector<T>, std::vector<T>> marginals(
    const TransportPlan<T>& plan) {
  std::vector<T> rows(plan.rows(), T(0));
  std::vector<T> cols(plan.cols(), T(0));
  for (std::size_t i = 0; i < plan.rows(); ++i)
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      rows[i] += plan(i, j);
      cols[j] += plan(i, j);
    }
  return {std::move(rows), std::move(cols)};
}

/// Throws unless plan belongs to Pi(mu, nu) within tolerance.
template <class T>
void require_coupling(const Instance<T>& instance, const TransportPlan<T>& plan,
                      const T& tolerance) {
  require_same_shape(instance, plan);
  auto [rows, cols] = marginals(plan);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!approx_eq(rows[i], instance.mu()[i], tolerance))
      throw InputError("plan row " + std::to_string(i) + " sums to " +
                       ScalarTraits<T>::format(rows[i]) + ", mu is " +
                       ScalarTraits<T>::format(instance.mu()[i]));
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (!approx_eq(cols[j], instance.nu()[j], tolerance))
      throw InputError("plan column " + std::to_string(j) + " sums to " +
                       ScalarTraits<T>::format(cols[j]) + ", nu is " +
                       ScalarTraits<T>::format(instance.nu()[j]));
}

/// Sum of cost * mass; infinite iff a pair with positive mass has infinite
/// cost.
template <class T>
ExtendedCost<T> total_cost(const Instance<T>& instance,
                           const TransportPlan<T>& plan) {
  require_same_shape(instance, plan);
  ExtendedCost<T> total;
  for (std::size_t i = 0; i < plan.rows(); ++i)
    for (std::size_t j = 0; j < plan.cols(); ++j)
      total += instance.cost(i, j).weighted(plan(i, j));
  return total;
}

/// Pairs carrying mass strictly above the threshold, row-major.
template <class T>
SupportSet support(const TransportPlan<T>& plan, const T& threshold) {
  SupportSet out;
  for (std::size_t i = 0; i < plan.rows(); ++i)
    for (std::size_t j = 0; j < plan.cols(); ++j)
      if (plan(i, j) > threshold) out.push_back({i, j});
  return out;
}

template <class T>
SupportSet support(const TransportPlan<T>& plan) {
  return support(plan, ScalarTraits<T>::default_support_threshold());
}

}  // namespace otcert
