#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <compare>
#include <iosfwd>
#include <string>
#include <string_view>

namespace multipath {

/// Exact rational number (GMP backed).
using Rational = boost::multiprecision::mpq_rational;

/// Parses "p/q", an integer, or a finite decimal such as "0.25" or "1e-3".
/// Decimals are converted exactly (0.1 -> 1/10). Throws InputError.
Rational parse_rational(std::string_view text);

/// Exact conversion of a finite double (every double is a dyadic rational).
Rational rational_from_double(double value);

std::string to_string(const Rational& value);
double to_double(const Rational& value);

/// A rational extended with +infinity. Used for rates of levels that have no
/// users left, where the cluster rate C(J')/0 is unbounded.
class ExtRational {
 public:
  ExtRational() = default;
  ExtRational(Rational value) : value_(std::move(value)) {}  // NOLINT(implicit)
  ExtRational(long value) : value_(value) {}                 // NOLINT(implicit)

  static ExtRational infinity() {
    ExtRational r;
    r.infinite_ = true;
    return r;
  }

  bool is_infinite() const noexcept { return infinite_; }
  /// Finite value; throws std::logic_error on +infinity.
  const Rational& value() const;

  double to_double() const;
  std::string to_string() const;

  friend bool operator==(const ExtRational& a, const ExtRational& b);
  friend std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b);

 private:
  Rational value_{0};
  bool infinite_ = false;
};

std::ostream& operator<<(std::ostream& os, const ExtRational& value);

}  // namespace multipath
