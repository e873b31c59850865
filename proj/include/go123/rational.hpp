#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

namespace go123 {

// Small exact fraction over 64-bit integers. Arithmetic returns nullopt on
// overflow so callers can drop to floating point.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num(n), den(1) {}  // NOLINT(implicit)

  static std::optional<Rational> make(__int128 n, __int128 d) {
    if (d == 0) return std::nullopt;
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 kMax = INT64_MAX;
    if (n > kMax || n < -kMax || d > kMax) return std::nullopt;
    Rational r;
    r.num = static_cast<std::int64_t>(n);
    r.den = static_cast<std::int64_t>(d);
    return r;
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  bool operator==(const Rational&) const = default;
};

inline std::optional<Rational> add(Rational a, Rational b) {
  return Rational::make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                        static_cast<__int128>(a.den) * b.den);
}
inline std::optional<Rational> sub(Rational a, Rational b) {
  return Rational::make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                        static_cast<__int128>(a.den) * b.den);
}
inline std::optional<Rational> mul(Rational a, Rational b) {
  return Rational::make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}
inline std::optional<Rational> div(Rational a, Rational b) {
  if (b.num == 0) return std::nullopt;
  return Rational::make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
}

inline int compare(Rational a, Rational b) {
  __int128 l = static_cast<__int128>(a.num) * b.den;
  __int128 r = static_cast<__int128>(b.num) * a.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

// Exact value of a decimal literal such as "0.125" or "1e-3", if representable.
std::optional<Rational> parse_decimal(const std::string& text);

}  // namespace go123
