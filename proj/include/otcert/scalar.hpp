// Scalar policy: exact rationals (default) and an opt-in double mode.
//
// Every algorithm in otcert is templated on the scalar type. Comparisons go
// through the approx_* helpers with an explicit tolerance so the same code
// path is exact for Rational (tolerance 0) and tolerant for double.
#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace otcert {

using Rational =
    boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                  boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

/// Raised for malformed or inconsistent user input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Parses "p/q", "-12", "0.125", "3e-2" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto fail = [&]() -> Rational {
    throw InputError("cannot parse number '" + s + "'");
  };
  if (s.empty()) return fail();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    try {
      BigInt p(s.substr(0, slash));
      BigInt q(s.substr(slash + 1));
      if (q == 0) return fail();
      return Rational(p, q);
    } catch (const std::runtime_error&) {
      return fail();
    }
  }
  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
  BigInt mantissa = 0;
  long exponent = 0;
  bool any_digit = false;
  for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
    mantissa = mantissa * 10 + (s[i] - '0');
    any_digit = true;
  }
  if (i < s.size() && s[i] == '.') {
    for (++i; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
         ++i) {
      mantissa = mantissa * 10 + (s[i] - '0');
      --exponent;
      any_digit = true;
    }
  }
  if (!any_digit) return fail();
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    std::size_t consumed = 0;
    long e = 0;
    try {
      e = std::stol(s.substr(i), &consumed);
    } catch (const std::exception&) {
      return fail();
    }
    if (consumed == 0) return fail();
    i += consumed;
    exponent += e;
  }
  if (i != s.size()) return fail();
  Rational value(mantissa);
  BigInt ten_pow = boost::multiprecision::pow(BigInt(10),
                                              static_cast<unsigned>(std::labs(exponent)));
  value = exponent >= 0 ? value * Rational(ten_pow) : value / Rational(ten_pow);
  return negative ? Rational(-value) : value;
}

}  // namespace detail

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "rational";
  static Rational default_tolerance() { return Rational(0); }
  static Rational default_support_threshold() { return Rational(0); }
  static Rational parse(std::string_view text) {
    return detail::parse_rational(text);
  }
  static Rational from_double(double v) {
    // Shortest round-trip decimal, so 0.1 becomes 1/10 rather than the
    // binary expansion.
    std::ostringstream os;
    os.precision(17);
    os << v;
    std::string s = os.str();
    for (int digits = 1; digits <= 17; ++digits) {
      std::ostringstream probe;
      probe.precision(digits);
      probe << v;
      if (std::stod(probe.str()) == v) {
        s = probe.str();
        break;
      }
    }
    return parse(s);
  }
  static std::string format(const Rational& v) {
    if (boost::multiprecision::denominator(v) == 1)
      return boost::multiprecision::numerator(v).str();
    return v.str();
  }
  static double to_double(const Rational& v) { return v.convert_to<double>(); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
  static double default_tolerance() { return 1e-9; }
  static double default_support_threshold() { return 1e-9; }
  static double parse(std::string_view text) {
    return detail::parse_rational(text).convert_to<double>();
  }
  static double from_double(double v) { return v; }
  static std::string format(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }
  static double to_double(double v) { return v; }
};

template <class T>
bool approx_eq(const T& a, const T& b, const T& tol) {
  return a - b <= tol && b - a <= tol;
}

template <class T>
bool approx_le(const T& a, const T& b, const T& tol) {
  return a <= b + tol;
}

/// a < b by more than the tolerance.
template <class T>
bool definitely_lt(const T& a, const T& b, const T& tol) {
  return a < b - tol;
}

template <class T>
T abs_value(const T& a) {
  return a < T(0) ? T(-a) : a;
}

/// Rational approximation of sqrt(p/q) from below with 10^-digits resolution.
inline Rational sqrt_floor(const Rational& v, unsigned digits = 18) {
  if (v < 0) throw std::domain_error("sqrt of negative value");
  BigInt scale = boost::multiprecision::pow(BigInt(10), digits);
  BigInt num = boost::multiprecision::numerator(v) * scale * scale;
  BigInt root = boost::multiprecision::sqrt(num / boost::multiprecision::denominator(v));
  return Rational(root, scale);
}

}  // namespace otcert
