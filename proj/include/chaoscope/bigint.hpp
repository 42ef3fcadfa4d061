#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace chaoscope {

/// Arbitrary-precision signed integer used for every position, count and
/// length. Expression templates are off so that std::min/std::max and
/// auto deduction see plain values.
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

inline std::string to_decimal(const BigInt& value) { return value.str(); }

/// Parses an unsigned or '-'-prefixed decimal literal. Throws std::invalid_argument.
inline BigInt parse_decimal(std::string_view text)
{
  std::size_t i = 0;
  bool negative = false;
  if (!text.empty() && text[0] == '-') {
    negative = true;
    i = 1;
  }
  if (i == text.size())
    throw std::invalid_argument("empty integer literal");
  BigInt value = 0;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch < '0' || ch > '9')
      throw std::invalid_argument("invalid integer literal '" + std::string(text) + "'");
    value *= 10;
    value += ch - '0';
  }
  return negative ? BigInt(-value) : value;
}

/// floor(sqrt(value)) for value >= 0.
inline BigInt isqrt(const BigInt& value)
{
  if (value < 0)
    throw std::domain_error("isqrt of negative value");
  return boost::multiprecision::sqrt(value);
}

inline std::size_t bit_length(const BigInt& value)
{
  if (value == 0)
    return 0;
  return boost::multiprecision::msb(boost::multiprecision::abs(value)) + 1;
}

} // namespace chaoscope
