#include "multipath/rational.hpp"

#include "multipath/error.hpp"

#include <cctype>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace multipath {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

boost::multiprecision::mpz_int parse_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw InputError("invalid rational: '" + std::string(whole) + "'");
  boost::multiprecision::mpz_int v{std::string(s)};
  return negative ? -v : v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw InputError("invalid rational: empty string");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = parse_integer(trim(s.substr(0, slash)), s);
    auto den = parse_integer(trim(s.substr(slash + 1)), s);
    if (den == 0) throw InputError("invalid rational: zero denominator in '" + std::string(s) + "'");
    return Rational(num, den);
  }

  // Decimal with optional exponent, converted exactly.
  std::string_view mantissa = s;
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = s.substr(0, e);
    auto exp_text = s.substr(e + 1);
    auto exp_value = parse_integer(exp_text, s);
    if (abs(exp_value) > 4096) throw InputError("invalid rational: exponent out of range in '" + std::string(s) + "'");
    exponent = exp_value.convert_to<long>();
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '-' || mantissa.front() == '+')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long fraction_digits = 0;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    auto ip = mantissa.substr(0, dot);
    auto fp = mantissa.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)))
      throw InputError("invalid rational: '" + std::string(s) + "'");
    digits = std::string(ip) + std::string(fp);
    fraction_digits = static_cast<long>(fp.size());
  } else {
    if (!all_digits(mantissa)) throw InputError("invalid rational: '" + std::string(s) + "'");
    digits = std::string(mantissa);
  }
  boost::multiprecision::mpz_int value(digits);
  if (negative) value = -value;
  const long shift = exponent - fraction_digits;
  boost::multiprecision::mpz_int scale = boost::multiprecision::pow(boost::multiprecision::mpz_int(10),
                                                                    static_cast<unsigned>(std::labs(shift)));
  return shift >= 0 ? Rational(value * scale) : Rational(value, scale);
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw InputError("cannot convert a non-finite double to a rational");
  return Rational(value);
}

std::string to_string(const Rational& value) {
  return value.str();
}

double to_double(const Rational& value) {
  return value.convert_to<double>();
}

const Rational& ExtRational::value() const {
  if (infinite_) throw std::logic_error("ExtRational::value() on +infinity");
  return value_;
}

double ExtRational::to_double() const {
  return infinite_ ? HUGE_VAL : value_.convert_to<double>();
}

std::string ExtRational::to_string() const {
  return infinite_ ? std::string("inf") : value_.str();
}

bool operator==(const ExtRational& a, const ExtRational& b) {
  if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
  return a.value_ == b.value_;
}

std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b) {
  if (a.infinite_ || b.infinite_) {
    if (a.infinite_ == b.infinite_) return std::strong_ordering::equal;
    return a.infinite_ ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  if (a.value_ < b.value_) return std::strong_ordering::less;
  if (a.value_ > b.value_) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::ostream& operator<<(std::ostream& os, const ExtRational& value) {
  return os << value.to_string();
}

}  // namespace multipath
