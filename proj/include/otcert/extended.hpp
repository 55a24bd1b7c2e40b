// Extended-real values.
//
// ExtendedCost lives in [0, +inf]; ExtendedReal lives in [-inf, +inf] and is
// used for dual potentials. Infinity is a distinct state, never a sentinel
// float, so inf - inf cannot be formed.
#pragma once

#include "otcert/scalar.hpp"

#include <compare>
#include <stdexcept>
#include <string>

namespace otcert {

struct Infinity {};
inline constexpr Infinity kInfinity{};

template <class T>
class ExtendedCost {
 public:
  ExtendedCost() : finite_(true), value_(0) {}
  ExtendedCost(T value) : finite_(true), value_(std::move(value)) {  // NOLINT
    if (value_ < T(0)) throw InputError("negative cost");
  }
  ExtendedCost(Infinity) : finite_(false), value_(0) {}  // NOLINT

  bool is_finite() const { return finite_; }
  bool is_infinite() const { return !finite_; }

  const T& value() const {
    if (!finite_) throw std::logic_error("value() of infinite cost");
    return value_;
  }

  /// mass * cost with the measure-theoretic convention 0 * inf = 0.
  ExtendedCost weighted(const T& mass) const {
    if (mass == T(0)) return ExtendedCost();
    if (!finite_) return ExtendedCost(kInfinity);
    return ExtendedCost(T(value_ * mass));
  }

  friend ExtendedCost operator+(const ExtendedCost& a, const ExtendedCost& b) {
    if (!a.finite_ || !b.finite_) return ExtendedCost(kInfinity);
    return ExtendedCost(T(a.value_ + b.value_));
  }
  ExtendedCost& operator+=(const ExtendedCost& other) {
    return *this = *this + other;
  }

  friend bool operator==(const ExtendedCost& a, const ExtendedCost& b) {
    if (a.finite_ != b.finite_) return false;
    return !a.finite_ || a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const ExtendedCost& a,
                                          const ExtendedCost& b) {
    if (!a.finite_ || !b.finite_) {
      if (a.finite_ == b.finite_) return std::strong_ordering::equal;
      return a.finite_ ? std::strong_ordering::less
                       : std::strong_ordering::greater;
    }
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (b.value_ < a.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  std::string str() const {
    return finite_ ? ScalarTraits<T>::format(value_) : std::string("inf");
  }

 private:
  bool finite_;
  T value_;
};

template <class T>
class ExtendedReal {
 public:
  enum class Kind { kNegInf, kFinite, kPosInf };

  ExtendedReal() : kind_(Kind::kFinite), value_(0) {}
  ExtendedReal(T value) : kind_(Kind::kFinite), value_(std::move(value)) {}  // NOLINT

  static ExtendedReal neg_inf() { return ExtendedReal(Kind::kNegInf); }
  static ExtendedReal pos_inf() { return ExtendedReal(Kind::kPosInf); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::kFinite; }
  bool is_neg_inf() const { return kind_ == Kind::kNegInf; }
  bool is_pos_inf() const { return kind_ == Kind::kPosInf; }

  const T& value() const {
    if (kind_ != Kind::kFinite)
      throw std::logic_error("value() of infinite extended real");
    return value_;
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != Kind::kFinite || a.value_ == b.value_;
  }

  std::string str() const {
    switch (kind_) {
      case Kind::kNegInf:
        return "-inf";
      case Kind::kPosInf:
        return "inf";
      default:
        return ScalarTraits<T>::format(value_);
    }
  }

 private:
  explicit ExtendedReal(Kind kind) : kind_(kind), value_(0) {}
  Kind kind_;
  T value_;
};

}  // namespace otcert
