#include "berezin/scalar.hpp"

#include <cstdlib>
#include <mutex>
#include <sstream>

namespace berezin {

namespace {

int g_float_digits = 30;
std::once_flag g_float_once;

int env_digits() {
  const char* s = std::getenv("BEREZIN_PRECISION");
  if (!s) return 30;
  int d = std::atoi(s);
  if (d < 15) d = 15;
  if (d > 200) d = 200;
  return d;
}

void apply_precision(int digits) {
  // bits ~ digits * log2(10), plus guard bits for intermediate rounding
  mp_bitcnt_t bits = static_cast<mp_bitcnt_t>(digits * 3.3219280948874) + 32;
  mpf_set_default_prec(bits);
}

}  // namespace

void ensure_float_init() {
  std::call_once(g_float_once, [] {
    g_float_digits = env_digits();
    apply_precision(g_float_digits);
  });
}

void set_float_digits(int digits) {
  ensure_float_init();
  g_float_digits = digits;
  apply_precision(digits);
}

int float_digits() {
  ensure_float_init();
  return g_float_digits;
}

Rat parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw DomainError("empty rational literal");

  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (num.empty() || den.empty())
      throw DomainError("malformed rational literal '" + text + "'");
    try {
      Rat q(num + "/" + den);
      q.canonicalize();
      if (q.get_den() == 0) throw DomainError("zero denominator in '" + text + "'");
      return q;
    } catch (const std::invalid_argument&) {
      throw DomainError("malformed rational literal '" + text + "'");
    }
  }

  auto dot = s.find('.');
  if (dot != std::string::npos) {
    // decimal literal; exact conversion by shifting the point
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    size_t frac = s.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+")
      throw DomainError("malformed rational literal '" + text + "'");
    try {
      Rat q(digits);
      for (size_t i = 0; i < frac; ++i) q /= 10;
      q.canonicalize();
      return q;
    } catch (const std::invalid_argument&) {
      throw DomainError("malformed rational literal '" + text + "'");
    }
  }

  try {
    Rat q(s);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw DomainError("malformed rational literal '" + text + "'");
  }
}

std::string to_string(const Rat& q) {
  return q.get_str();
}

std::string to_string(const BigFloat& x) {
  ensure_float_init();
  mp_exp_t exp;
  std::string digits = x.get_str(exp, 10, static_cast<size_t>(g_float_digits));
  if (digits.empty() || digits == "-") return "0";
  bool neg = digits[0] == '-';
  std::string mant = neg ? digits.substr(1) : digits;
  std::ostringstream out;
  if (neg) out << '-';
  out << "0." << mant << "e" << exp;
  return out.str();
}

double to_double(const Rat& q) {
  // Route through mpf so magnitudes outside double's range of the
  // num/den pair individually still convert.
  ensure_float_init();
  return mpf_class(q).get_d();
}

double to_double(const BigFloat& x) {
  return x.get_d();
}

double abs_double(const RatC& z) {
  ensure_float_init();
  mpf_class a(z.abs2());
  mpf_class r;
  mpf_sqrt(r.get_mpf_t(), a.get_mpf_t());
  return r.get_d();
}

double abs_double(const FloatC& z) {
  BigFloat a = z.abs2();
  BigFloat r;
  mpf_sqrt(r.get_mpf_t(), a.get_mpf_t());
  return r.get_d();
}

std::string to_string(const RatC& z) {
  if (z.im == 0) return to_string(z.re);
  return to_string(z.re) + (z.im > 0 ? "+" : "") + to_string(z.im) + "i";
}

std::string to_string(const FloatC& z) {
  if (z.im == 0) return to_string(z.re);
  std::string im = to_string(z.im);
  return to_string(z.re) + (im[0] == '-' ? "" : "+") + im + "i";
}

}  // namespace berezin
