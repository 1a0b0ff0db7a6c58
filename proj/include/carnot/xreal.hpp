#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "carnot/errors.hpp"

namespace carnot {

/// Signed binary exponent wide enough for the scales this library meets
/// (family radii grow like 2^(3^n), so exponents overflow int64 near n=40).
using exp2_t = __int128;

std::string exp2_to_string(exp2_t v);
exp2_t exp2_from_string(const std::string& s);

/// Floating-point value m * 2^e with a 53-bit mantissa and an unbounded
/// (128-bit) exponent. Behaves like an IEEE double whose exponent cannot
/// overflow or underflow; arithmetic rounds to nearest in the mantissa.
///
/// Representation: m == 0 (and e == 0) for zero, otherwise |m| in [0.5, 1).
class XReal {
 public:
  XReal() = default;

  XReal(double v) {  // NOLINT: implicit by design, doubles embed exactly
    if (!std::isfinite(v)) throw DomainError("XReal: non-finite double");
    if (v != 0.0) {
      int k = 0;
      m_ = std::frexp(v, &k);
      e_ = k;
    }
  }

  /// Value m * 2^e for arbitrary finite m (normalized on construction).
  static XReal from_parts(double m, exp2_t e) {
    if (!std::isfinite(m)) throw DomainError("XReal: non-finite mantissa");
    XReal r;
    if (m != 0.0) {
      int k = 0;
      r.m_ = std::frexp(m, &k);
      r.e_ = e + k;
    }
    return r;
  }

  /// Exact power of two, 2^e.
  static XReal pow2(exp2_t e) { return from_parts(1.0, e); }

  double mantissa() const { return m_; }
  exp2_t exponent2() const { return e_; }

  bool is_zero() const { return m_ == 0.0; }
  int sign() const { return m_ > 0.0 ? 1 : (m_ < 0.0 ? -1 : 0); }

  /// Nearest double; saturates to +-inf / 0 outside the double range.
  double to_double() const {
    if (m_ == 0.0) return 0.0;
    if (e_ > 1100) return m_ > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    if (e_ < -1100) return m_ > 0 ? 0.0 : -0.0;
    return std::ldexp(m_, static_cast<int>(e_));
  }

  /// log2 of |value| as a double (integer precision of the exponent is
  /// lost beyond 2^53; diagnostics and display only).
  double log2_abs() const {
    if (m_ == 0.0) throw DomainError("XReal: log2 of zero");
    return static_cast<double>(e_) + std::log2(std::fabs(m_));
  }

  XReal operator-() const {
    XReal r = *this;
    r.m_ = -r.m_;
    return r;
  }

  friend XReal operator*(const XReal& a, const XReal& b) {
    if (a.m_ == 0.0 || b.m_ == 0.0) return XReal{};
    return from_parts(a.m_ * b.m_, a.e_ + b.e_);
  }

  friend XReal operator/(const XReal& a, const XReal& b) {
    if (b.m_ == 0.0) throw DomainError("XReal: division by zero");
    if (a.m_ == 0.0) return XReal{};
    return from_parts(a.m_ / b.m_, a.e_ - b.e_);
  }

  friend XReal operator+(const XReal& a, const XReal& b) {
    if (a.m_ == 0.0) return b;
    if (b.m_ == 0.0) return a;
    const XReal& hi = (a.e_ >= b.e_) ? a : b;
    const XReal& lo = (a.e_ >= b.e_) ? b : a;
    exp2_t de = hi.e_ - lo.e_;
    if (de > 54) return hi;  // below half an ulp of hi
    double s = hi.m_ + std::ldexp(lo.m_, -static_cast<int>(de));
    return from_parts(s, hi.e_);
  }

  friend XReal operator-(const XReal& a, const XReal& b) { return a + (-b); }

  XReal& operator+=(const XReal& o) { return *this = *this + o; }
  XReal& operator-=(const XReal& o) { return *this = *this - o; }
  XReal& operator*=(const XReal& o) { return *this = *this * o; }
  XReal& operator/=(const XReal& o) { return *this = *this / o; }

  /// Three-way compare by value.
  friend int compare(const XReal& a, const XReal& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    // same nonzero sign: compare magnitudes via (exponent, mantissa)
    if (a.e_ != b.e_) {
      bool a_big = a.e_ > b.e_;
      return (a_big == (sa > 0)) ? 1 : -1;
    }
    if (a.m_ == b.m_) return 0;
    return a.m_ < b.m_ ? -1 : 1;
  }

  friend bool operator<(const XReal& a, const XReal& b) { return compare(a, b) < 0; }
  friend bool operator>(const XReal& a, const XReal& b) { return compare(a, b) > 0; }
  friend bool operator<=(const XReal& a, const XReal& b) { return compare(a, b) <= 0; }
  friend bool operator>=(const XReal& a, const XReal& b) { return compare(a, b) >= 0; }
  friend bool operator==(const XReal& a, const XReal& b) { return compare(a, b) == 0; }
  friend bool operator!=(const XReal& a, const XReal& b) { return compare(a, b) != 0; }

 private:
  double m_ = 0.0;
  exp2_t e_ = 0;
};

inline XReal abs(const XReal& x) { return x.sign() < 0 ? -x : x; }

inline bool isfinite(const XReal&) { return true; }  // by construction

// Double counterparts so generic code resolves scalar functions without
// routing doubles through XReal by implicit conversion.
inline double abs(double x) { return std::fabs(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double pow(double x, double p) { return std::pow(x, p); }
inline bool isfinite(double x) { return std::isfinite(x); }
inline double to_double(double x) { return x; }
inline double to_double(const XReal& x) { return x.to_double(); }

inline XReal sqrt(const XReal& x) {
  if (x.sign() < 0) throw DomainError("XReal: sqrt of negative value");
  if (x.is_zero()) return XReal{};
  double m = x.mantissa();
  exp2_t e = x.exponent2();
  if (e % 2 != 0) {  // make the exponent even (e may be negative)
    m *= 2.0;
    e -= 1;
  }
  return XReal::from_parts(std::sqrt(m), e / 2);
}

/// x^p for x >= 0 and an arbitrary finite double exponent p.
///
/// The exponent product e*p is split exactly into integer and fractional
/// parts through a 128-bit intermediate, so huge binary exponents lose no
/// integer precision (p = m_p * 2^(k-53) with m_p a 53-bit integer, hence
/// e*p = (e*m_p) * 2^(k-53) exactly).
inline XReal pow(const XReal& x, double p) {
  if (!std::isfinite(p)) throw DomainError("XReal: non-finite exponent");
  if (p == 0.0) return XReal(1.0);
  if (x.sign() < 0) throw DomainError("XReal: pow of negative base");
  if (x.is_zero()) {
    if (p > 0.0) return XReal{};
    throw DomainError("XReal: pow of zero with non-positive exponent");
  }
  if (std::fabs(p) >= 4.5e15) throw DomainError("XReal: exponent too large");
  const exp2_t e_cap = static_cast<exp2_t>(1) << 73;
  if (x.exponent2() >= e_cap || x.exponent2() <= -e_cap)
    throw DomainError("XReal: pow exponent out of range");

  double xm = x.mantissa();
  exp2_t xe = x.exponent2();
  if (xm == 0.5) {  // exact powers of two route entirely through the exponent
    xm = 1.0;
    xe -= 1;
  }

  int k = 0;
  double pm = std::frexp(p, &k);                       // p = pm * 2^k, k <= 52
  auto pi = static_cast<std::int64_t>(std::ldexp(pm, 53));  // exact 53-bit int
  exp2_t prod = xe * static_cast<exp2_t>(pi);          // e * pm * 2^53
  int shift = 53 - k;                                  // e*p = prod * 2^-shift

  exp2_t ipart;
  double frac;
  if (shift >= 127) {
    ipart = 0;
    frac = std::ldexp(static_cast<double>(prod), -shift);
  } else {
    ipart = prod >> shift;  // arithmetic shift: floor for negatives
    frac = std::ldexp(static_cast<double>(prod - (ipart << shift)), -shift);
  }
  if (frac < 0.0) {
    ipart -= 1;
    frac += 1.0;
  }

  // mantissa part: m^p * 2^frac with m in (0.5, 1], frac in [0, 1)
  if (xm == 1.0) return XReal::from_parts(std::exp2(frac), ipart);
  double t = p * std::log2(xm);
  if (std::fabs(t) < 700.0) {
    return XReal::from_parts(std::pow(xm, p) * std::exp2(frac), ipart);
  }
  // |p| huge: route the mantissa power through the exponent as well
  double t2 = t + frac;
  double fl = std::floor(t2);
  return XReal::from_parts(std::exp2(t2 - fl), ipart + static_cast<exp2_t>(fl));
}

inline std::string exp2_to_string(exp2_t v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v)
                            : static_cast<unsigned __int128>(v);
  std::string digits;
  while (u != 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) digits.push_back('-');
  return {digits.rbegin(), digits.rend()};
}

inline exp2_t exp2_from_string(const std::string& s) {
  if (s.empty()) throw ParseError("empty exponent string");
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) throw ParseError("bare sign in exponent string");
  exp2_t v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw ParseError("bad digit in exponent string");
    v = v * 10 + (s[i] - '0');
  }
  return neg ? -v : v;
}

/// Compact scientific rendering: "<mantissa>e<decimal exponent>". The
/// decimal exponent comes from a double-precision log10, so this is a
/// display format, not a round-trip one.
inline std::string to_display_string(const XReal& x) {
  if (x.is_zero()) return "0";
  double l10 = x.log2_abs() * 0.30102999566398119521;
  double efl = std::floor(l10);
  double mant = std::pow(10.0, l10 - efl) * x.sign();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9ge%+.0f", mant, efl);
  return buf;
}

}  // namespace carnot
