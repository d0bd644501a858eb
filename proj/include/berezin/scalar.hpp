#pragma once

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace berezin {

/// Exact arbitrary-precision rational.
using Rat = mpq_class;

/// High-precision float; global precision is set once via set_float_digits
/// (BEREZIN_PRECISION env var, default 30 significant digits).
using BigFloat = mpf_class;

void set_float_digits(int digits);
int float_digits();
void ensure_float_init();

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct LayoutError : Error {
  using Error::Error;
};

/// Raised when a jet does not carry enough degree information for the
/// requested operation; carries the exact requirement.
struct OrderError : Error {
  int required;
  int provided;
  OrderError(const std::string& what, int req, int prov)
      : Error(what + " (required order " + std::to_string(req) +
              ", provided " + std::to_string(prov) + ")"),
        required(req),
        provided(prov) {}
};

/// Precondition failures that are about the mathematical domain:
/// inadmissible base points, guard violations, singular data.
struct DomainError : Error {
  using Error::Error;
};

Rat parse_rational(const std::string& text);
std::string to_string(const Rat& q);
std::string to_string(const BigFloat& x);
double to_double(const Rat& q);
double to_double(const BigFloat& x);

/// Complex number over an exact or big-float real field.
template <class R>
struct Cx {
  R re{};
  R im{};

  Cx() = default;
  Cx(const R& r) : re(r) {}  // NOLINT: implicit by design
  Cx(const R& r, const R& i) : re(r), im(i) {}
  Cx(int n) : re(n) {}  // NOLINT

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }
  Cx conj() const { return Cx(re, R(-im)); }
  R abs2() const { return re * re + im * im; }

  Cx& operator+=(const Cx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cx& operator-=(const Cx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend Cx operator+(Cx a, const Cx& b) { return a += b; }
  friend Cx operator-(Cx a, const Cx& b) { return a -= b; }
  friend Cx operator-(const Cx& a) { return Cx(R(-a.re), R(-a.im)); }
  friend Cx operator*(const Cx& a, const Cx& b) {
    return Cx(R(a.re * b.re - a.im * b.im), R(a.re * b.im + a.im * b.re));
  }
  Cx& operator*=(const Cx& o) { return *this = *this * o; }
  friend Cx operator/(const Cx& a, const Cx& b) {
    R n = b.abs2();
    if (n == 0) throw DomainError("complex division by zero");
    return Cx(R((a.re * b.re + a.im * b.im) / n),
              R((a.im * b.re - a.re * b.im) / n));
  }
  Cx& operator/=(const Cx& o) { return *this = *this / o; }
  friend bool operator==(const Cx& a, const Cx& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const Cx& a, const Cx& b) { return !(a == b); }
};

using RatC = Cx<Rat>;
using FloatC = Cx<BigFloat>;

double abs_double(const RatC& z);
double abs_double(const FloatC& z);

std::string to_string(const RatC& z);
std::string to_string(const FloatC& z);

inline double to_double(const RatC& z) { return to_double(z.re); }
inline double to_double(const FloatC& z) { return to_double(z.re); }

/// Per-scalar-type facts used by generic code and reporting.
template <class K>
struct ScalarMode;

template <>
struct ScalarMode<RatC> {
  static constexpr bool exact = true;
  static const char* name() { return "exact"; }
  static RatC from_rational(const RatC& q) { return q; }
};

template <>
struct ScalarMode<FloatC> {
  static constexpr bool exact = false;
  static const char* name() { return "float"; }
  static FloatC from_rational(const RatC& q) {
    ensure_float_init();
    return FloatC(BigFloat(q.re), BigFloat(q.im));
  }
};

/// Canonicalized rational n/d (the two-argument mpq_class constructor
/// does not reduce the fraction, which GMP arithmetic requires).
inline Rat rat(long n, long d = 1) {
  Rat q(n, d);
  q.canonicalize();
  return q;
}

inline Rat rat_pow(Rat base, long e) {
  Rat r(1);
  for (long i = 0; i < e; ++i) r *= base;
  return r;
}

template <class K>
K scalar_pow(K base, long e) {
  K r(1);
  for (long i = 0; i < e; ++i) r = r * base;
  return r;
}

inline Rat factorial(long n) {
  Rat r(1);
  for (long i = 2; i <= n; ++i) r *= i;
  return r;
}

inline long binomial_long(long n, long k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace berezin
