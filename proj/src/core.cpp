#include "carnot/core.hpp"
#include "carnot/linalg.hpp"
#include "carnot/polynomial.hpp"

#include <cctype>

#include <cmath>
#include <sstream>

namespace carnot {

Rational parse_rational(const std::string& text) {
  const std::string s = [&] {
    std::string t;
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    return t;
  }();
  if (s.empty()) throw StructuralError("parse_rational: empty string");
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Rational num(s.substr(0, slash));
      Rational den(s.substr(slash + 1));
      if (den == 0) throw StructuralError("parse_rational: zero denominator in '" + text + "'");
      return num / den;
    }
    if (s.find_first_of(".eE") != std::string::npos) {
      // Decimal literal: exact value of the written digits, not of the parsed double.
      std::string mantissa = s;
      long exponent = 0;
      if (auto epos = s.find_first_of("eE"); epos != std::string::npos) {
        mantissa = s.substr(0, epos);
        exponent = std::stol(s.substr(epos + 1));
      }
      std::string digits;
      bool negative = false;
      long frac_digits = 0;
      bool after_point = false;
      for (char c : mantissa) {
        if (c == '-') negative = true;
        else if (c == '+') continue;
        else if (c == '.') after_point = true;
        else if (std::isdigit(static_cast<unsigned char>(c))) {
          digits.push_back(c);
          if (after_point) ++frac_digits;
        } else {
          throw StructuralError("parse_rational: bad literal '" + text + "'");
        }
      }
      if (digits.empty()) throw StructuralError("parse_rational: bad literal '" + text + "'");
      Rational value{boost::multiprecision::cpp_int(digits)};
      const long shift = exponent - frac_digits;
      Rational ten(10);
      if (shift > 0) value *= ipow(ten, static_cast<int>(shift));
      if (shift < 0) value /= ipow(ten, static_cast<int>(-shift));
      return negative ? -value : value;
    }
    return Rational(boost::multiprecision::cpp_int(s));
  } catch (const std::runtime_error&) {
    throw StructuralError("parse_rational: bad literal '" + text + "'");
  }
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw DomainError("rational_from_double: non-finite value");
  int exp = 0;
  double mant = std::frexp(value, &exp);
  // 53-bit integer mantissa.
  auto m = static_cast<long long>(std::ldexp(mant, 53));
  Rational out{boost::multiprecision::cpp_int(m)};
  exp -= 53;
  Rational two(2);
  if (exp > 0) out *= ipow(two, exp);
  if (exp < 0) out /= ipow(two, -exp);
  return out;
}

std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (int i = 1; i <= k; ++i) out = out * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return out;
}

void for_each_combination(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
  if (k < 0 || k > n) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  for_each_combination(n, k, [&](const std::vector<int>& c) { out.push_back(c); });
  return out;
}

}  // namespace carnot
