#pragma once

#include <cmath>

namespace hopfmargin {

/// Hyper-dual number a + b e1 + c e2 + d e1e2 with e1^2 = e2^2 = 0.
/// Seeding e1 and e2 along two input directions yields exact first
/// derivatives in b, c and the mixed second derivative in d.
struct HyperDual {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double value) : a(value) {}  // NOLINT: implicit lift of constants
  constexpr HyperDual(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

  constexpr HyperDual& operator+=(const HyperDual& o) {
    a += o.a; b += o.b; c += o.c; d += o.d;
    return *this;
  }
  constexpr HyperDual& operator-=(const HyperDual& o) {
    a -= o.a; b -= o.b; c -= o.c; d -= o.d;
    return *this;
  }
};

constexpr HyperDual operator-(const HyperDual& x) { return {-x.a, -x.b, -x.c, -x.d}; }

constexpr HyperDual operator+(HyperDual x, const HyperDual& y) { return x += y; }
constexpr HyperDual operator-(HyperDual x, const HyperDual& y) { return x -= y; }

constexpr HyperDual operator*(const HyperDual& x, const HyperDual& y) {
  return {x.a * y.a, x.a * y.b + x.b * y.a, x.a * y.c + x.c * y.a,
          x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a};
}

// Chain rule for a scalar function g with value g0, slope g1 and curvature g2.
constexpr HyperDual lift(const HyperDual& x, double g0, double g1, double g2) {
  return {g0, g1 * x.b, g1 * x.c, g1 * x.d + g2 * x.b * x.c};
}

constexpr HyperDual inverse(const HyperDual& x) {
  const double inv = 1.0 / x.a;
  return lift(x, inv, -inv * inv, 2.0 * inv * inv * inv);
}

constexpr HyperDual operator/(const HyperDual& x, const HyperDual& y) { return x * inverse(y); }

inline HyperDual sin(const HyperDual& x) {
  const double s = std::sin(x.a);
  return lift(x, s, std::cos(x.a), -s);
}

inline HyperDual cos(const HyperDual& x) {
  const double c = std::cos(x.a);
  return lift(x, c, -std::sin(x.a), -c);
}

inline bool isfinite(const HyperDual& x) {
  return std::isfinite(x.a) && std::isfinite(x.b) && std::isfinite(x.c) && std::isfinite(x.d);
}

}  // namespace hopfmargin
