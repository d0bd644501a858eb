#pragma once

// Exact closed-form calculus for the Fubini-Study models. Functions on the
// complexified affine chart that are finite combinations
//     x^m or y^|m|  times  (1 + x y)^(-d)
// ("BiRadial") are closed under products, the chart derivatives, and every
// operation the multiplier pipeline needs. The level functionals are
// evaluated globally through an exact algebra on monomials in (u, v, x, y)
// times powers of W = 1 + x y and C = 1 + (x+u)(y+v); no truncation enters
// anywhere, so the resulting coefficient functions are exact identities.

#include <map>
#include <tuple>
#include <vector>

#include "berezin/bergman.hpp"

namespace berezin {

/// Finite sums  sum c_{m,d} w^(m) (1+xy)^(-d)  with w^(m) = x^m for m >= 0
/// and y^{-m} for m < 0; d may be negative (positive powers of 1+xy).
class BiRadial {
 public:
  using Key = std::pair<int, int>;  // (weight m, power d)

  BiRadial() = default;

  static BiRadial constant(const RatC& c) {
    BiRadial b;
    b.add(0, 0, c);
    return b;
  }

  static BiRadial term(int weight, int dpow, const RatC& c = RatC(Rat(1))) {
    BiRadial b;
    b.add(weight, dpow, c);
    return b;
  }

  /// x^f y^g (1+xy)^(-e), expanding the (xy)^min(f,g) factor.
  static BiRadial monomial(int f, int g, int e, const RatC& c = RatC(Rat(1))) {
    BiRadial b;
    int mn = std::min(f, g);
    int weight = f - g;
    for (int j = 0; j <= mn; ++j) {
      Rat binom(1);
      for (int i = 0; i < j; ++i) binom = binom * Rat(mn - i) / Rat(i + 1);
      Rat sign((mn - j) % 2 ? -1 : 1);
      b.add(weight, e - j, c * RatC(binom * sign));
    }
    return b;
  }

  const std::map<Key, RatC>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add(int weight, int dpow, const RatC& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms_.emplace(Key{weight, dpow}, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  BiRadial& operator+=(const BiRadial& o) {
    for (auto& [k, c] : o.terms_) add(k.first, k.second, c);
    return *this;
  }
  friend BiRadial operator+(BiRadial a, const BiRadial& b) { return a += b; }
  BiRadial& operator-=(const BiRadial& o) {
    for (auto& [k, c] : o.terms_) add(k.first, k.second, -c);
    return *this;
  }
  friend BiRadial operator-(BiRadial a, const BiRadial& b) { return a -= b; }

  BiRadial& scale(const RatC& s) {
    if (s.is_zero()) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }

  friend BiRadial operator*(const BiRadial& a, const BiRadial& b) {
    BiRadial r;
    for (auto& [ka, ca] : a.terms_)
      for (auto& [kb, cb] : b.terms_) {
        int m1 = ka.first, m2 = kb.first;
        int d = ka.second + kb.second;
        RatC c = ca * cb;
        if (m1 == 0 || m2 == 0 || (m1 > 0) == (m2 > 0)) {
          r.add(m1 + m2, d, c);
        } else {
          // x^a y^b with opposite signs: expand the (xy)^min factor
          r += monomial(std::max(m1, 0) + std::max(m2, 0),
                        std::max(-m1, 0) + std::max(-m2, 0), d, c);
        }
      }
    return r;
  }

  /// Chart derivative in the holomorphic slot.
  BiRadial dx() const {
    BiRadial r;
    for (auto& [k, c] : terms_) {
      int m = k.first, d = k.second;
      if (m >= 1) {
        r.add(m - 1, d, c * RatC(Rat(m - d)));
        r.add(m - 1, d + 1, c * RatC(Rat(d)));
      } else {
        r.add(m - 1, d + 1, c * RatC(Rat(-d)));
      }
    }
    return r;
  }

  /// Chart derivative in the conjugate slot.
  BiRadial dy() const {
    BiRadial r;
    for (auto& [k, c] : terms_) {
      int m = k.first, d = k.second;
      if (m <= -1) {
        r.add(m + 1, d, c * RatC(Rat(-m - d)));
        r.add(m + 1, d + 1, c * RatC(Rat(d)));
      } else {
        r.add(m + 1, d + 1, c * RatC(Rat(-d)));
      }
    }
    return r;
  }

  /// Exact value at a chart point (x0, y0).
  RatC value_at_point(const RatC& x0, const RatC& y0) const {
    RatC acc(Rat(0));
    RatC w = RatC(Rat(1)) + x0 * y0;
    if (w.is_zero()) throw DomainError("BiRadial value at a pole of 1+xy");
    for (auto& [k, c] : terms_) {
      RatC base = k.first >= 0 ? scalar_pow(x0, k.first) : scalar_pow(y0, -k.first);
      RatC wp = k.second >= 0 ? RatC(Rat(1)) / scalar_pow(w, k.second)
                              : scalar_pow(w, -k.second);
      acc += c * base * wp;
    }
    return acc;
  }

  /// Exact value at (x, y) = (t, 1) for rational t; agrees with the radial
  /// value at |z|^2 = t for weight-zero elements.
  RatC value_at(const Rat& t) const {
    return value_at_point(RatC(t), RatC(Rat(1)));
  }

  int weight_span() const {
    int lo = 0, hi = 0;
    for (auto& [k, c] : terms_) {
      lo = std::min(lo, k.first);
      hi = std::max(hi, k.first);
    }
    return hi - lo;
  }

  bool radial() const {
    for (auto& [k, c] : terms_)
      if (k.first != 0) return false;
    return true;
  }

  int max_dpow() const {
    int d = 0;
    for (auto& [k, c] : terms_) d = std::max(d, k.second);
    return d;
  }

 private:
  std::map<Key, RatC> terms_;
};

/// Global coefficient functions a_{p,alpha,beta} of the Fubini-Study models
/// as exact BiRadial identities, via the closed phase algebra
///   c = uv W^-2 - sum_{r>=1} (uv)^r (WC)^-r / r,
///   c' = (1 - uv/(WC))^aux C^-2,   b = W^2,   Delta = W^2 du dv.
class FsCoefficientTable {
 public:
  FsCoefficientTable(int aux_degree, int max_level)
      : aux_(aux_degree), max_level_(max_level) {
    if (max_level < 0) throw OrderError("negative table level", 0, max_level);
    build_radial_powers();
  }

  int aux_degree() const { return aux_; }
  int max_level() const { return max_level_; }

  /// a_{p,alpha,beta} as an exact global function; zero when alpha or beta
  /// exceeds p.
  const BiRadial& entry(int p, int alpha, int beta) {
    if (p < 0 || p > max_level_)
      throw OrderError("table built with too small a level", p, max_level_);
    static const BiRadial zero;
    if (alpha > p || beta > p || alpha < 0 || beta < 0) return zero;
    auto key = std::make_tuple(p, alpha, beta);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;

    BiRadial acc;
    for (int m = 0; m <= 2 * p; ++m) {
      const int P = p + m;
      Rat denom = factorial(m) * factorial(P);
      for (auto& [rse, coef] : rpow_[static_cast<size_t>(m)]) {
        auto [r, s, e] = rse;
        if (r + alpha > P || r + beta > P) continue;
        BiRadial v = vhat(r + alpha, r + beta, e, P);
        if (v.is_zero()) continue;
        // W^(2P - s) and the 1/(m! P!) factor
        v.scale(RatC(coef / denom));
        acc += shift_dpow(v, s - 2 * P);
      }
    }
    // times b = W^2, divided by p!
    acc = shift_dpow(acc, -2);
    acc.scale(RatC(Rat(1) / factorial(p)));
    auto [jt, ok] = entries_.emplace(key, std::move(acc));
    (void)ok;
    return jt->second;
  }

 private:
  using RadialKey = std::tuple<int, int, int>;  // (uv power r, W power s, C power e)
  using RadialPoly = std::map<RadialKey, Rat>;

  static BiRadial shift_dpow(const BiRadial& b, int delta) {
    BiRadial r;
    for (auto& [k, c] : b.terms()) r.add(k.first, k.second + delta, c);
    return r;
  }

  void build_radial_powers() {
    const int rcap_base = 3 * max_level_;
    RadialPoly c;
    c[{1, 2, 0}] += Rat(1);
    for (int r = 1; r <= rcap_base; ++r) c[{r, r, r}] -= Rat(1) / Rat(r);

    RadialPoly cprime;
    {
      Rat binom(1);
      for (int j = 0; j <= aux_; ++j) {
        Rat sign(j % 2 ? -1 : 1);
        cprime[{j, j, j + 2}] += sign * binom;
        binom = binom * Rat(aux_ - j) / Rat(j + 1);
      }
    }

    rpow_.push_back(cprime);
    for (int m = 1; m <= 2 * max_level_; ++m) {
      const int rcap = max_level_ + m;
      RadialPoly next;
      for (auto& [ka, ca] : rpow_.back())
        for (auto& [kb, cb] : c) {
          int r = std::get<0>(ka) + std::get<0>(kb);
          if (r > rcap) continue;
          RadialKey k{r, std::get<1>(ka) + std::get<1>(kb),
                      std::get<2>(ka) + std::get<2>(kb)};
          next[k] += ca * cb;
        }
      for (auto it = next.begin(); it != next.end();)
        it = it->second == 0 ? next.erase(it) : std::next(it);
      rpow_.push_back(std::move(next));
    }
  }

  /// (du dv)^P [ u^a v^b C^-e ] at u = v = 0, in closed form. Writing
  /// A = P-a and B = P-b for the derivatives left after the monomial is
  /// consumed (Leibniz leaves the binomial prefactors),
  ///   du^A C^-e = (-1)^A (e)_A (y+v)^A C^-(e+A)
  /// and the remaining dv^B evaluates by one more Leibniz expansion to a
  /// finite sum of monomials x^(B-j) y^(A-j) (1+xy)^-(e+A+B-j).
  static BiRadial vhat(int a, int b, int e, int P) {
    if (a > P || b > P) return {};
    const int A = P - a, B = P - b;
    // binomial prefactors C(P,a) a! C(P,b) b!
    Rat pref = factorial(P) / factorial(A) * factorial(P) / factorial(B);
    Rat rising_a(1);  // (e)_A
    for (int i = 0; i < A; ++i) rising_a *= Rat(e + i);
    if (rising_a == 0 && A > 0) return {};
    BiRadial acc;
    Rat fall_a(1);    // A!/(A-j)! accumulates
    Rat binom_b(1);   // C(B,j)
    for (int j = 0; j <= std::min(A, B); ++j) {
      if (j > 0) {
        fall_a *= Rat(A - j + 1);
        binom_b = binom_b * Rat(B - j + 1) / Rat(j);
      }
      Rat rising_ea(1);  // (e+A)_(B-j)
      for (int i = 0; i < B - j; ++i) rising_ea *= Rat(e + A + i);
      Rat sign(((A + B - j) % 2) ? -1 : 1);
      Rat coeff = pref * rising_a * binom_b * fall_a * rising_ea * sign;
      if (coeff == 0) continue;
      acc += BiRadial::monomial(B - j, A - j, e + A + B - j, RatC(coeff));
    }
    return acc;
  }

  int aux_;
  int max_level_;
  std::vector<RadialPoly> rpow_;  // c^m * c'
  std::map<std::tuple<int, int, int>, BiRadial> entries_;
};

/// The multiplier pipeline on closed-form symbols over a Fubini-Study model:
/// covariant map levels, the symbol product levels, and the inverse map,
/// specialized by the terminating unit symbol (rho = 1 + (aux+1) hbar).
class FsSymbolCalculus {
 public:
  FsSymbolCalculus(int aux_degree, int max_level)
      : table_(aux_degree, max_level), max_level_(max_level) {
    // pin the terminating unit symbol against the jet recursion
    KahlerModel m = KahlerModel::parse("fs:" + std::to_string(aux_degree));
    BasePoint o;
    o.x = {RatC(Rat(0))};
    o.y = {RatC(Rat(0))};
    auto rho = bergman_symbol<RatC>(m, o, std::min(3, max_level + 1), 0).values();
    rho_constants_ = {Rat(1)};
    if (rho.size() > 1) {
      if (!rho[1].is_real())
        throw DomainError("unexpected complex unit-symbol coefficient");
      rho_constants_.push_back(rho[1].re);
    }
    for (size_t l = 2; l < rho.size(); ++l)
      if (!rho[l].is_zero())
        throw DomainError("unit symbol unexpectedly fails to terminate");
  }

  FsCoefficientTable& table() { return table_; }

  /// A_l(F, G) = l! sum a_{l,alpha,beta} (dy^beta F)(dx^alpha G)/(alpha! beta!).
  BiRadial product_term(const BiRadial& F, const BiRadial& G, int level) {
    BiRadial acc;
    std::vector<BiRadial> dyF{F}, dxG{G};
    for (int i = 1; i <= level; ++i) {
      dyF.push_back(dyF.back().dy());
      dxG.push_back(dxG.back().dx());
    }
    for (int alpha = 0; alpha <= level; ++alpha)
      for (int beta = 0; beta <= level; ++beta) {
        const BiRadial& entry = table_.entry(level, alpha, beta);
        if (entry.is_zero()) continue;
        BiRadial t = entry * dyF[static_cast<size_t>(beta)] *
                     dxG[static_cast<size_t>(alpha)];
        t.scale(RatC(Rat(1) / (factorial(alpha) * factorial(beta))));
        acc += t;
      }
    acc.scale(RatC(factorial(level)));
    return acc;
  }

  /// B_l(F) = sum_{p+q+r=l} rho_q rho_r p! sum a_{p,alpha,beta}
  ///          (dx^alpha dy^beta F)/(alpha! beta!).
  BiRadial covariant_term(const BiRadial& F, int level) {
    BiRadial acc;
    std::vector<std::vector<BiRadial>> dF(static_cast<size_t>(level) + 1);
    dF[0].push_back(F);
    for (int a = 1; a <= level; ++a) dF[0].push_back(dF[0].back().dx());
    for (int b = 1; b <= level; ++b) {
      dF[static_cast<size_t>(b)].reserve(static_cast<size_t>(level) + 1);
      for (int a = 0; a <= level; ++a)
        dF[static_cast<size_t>(b)].push_back(
            dF[static_cast<size_t>(b - 1)][static_cast<size_t>(a)].dy());
    }
    for (int q = 0; q <= level; ++q) {
      for (int r = 0; q + r <= level; ++r) {
        Rat rq = rho_const(q), rr = rho_const(r);
        if (rq == 0 || rr == 0) continue;
        int p = level - q - r;
        for (int alpha = 0; alpha <= p; ++alpha)
          for (int beta = 0; beta <= p; ++beta) {
            const BiRadial& entry = table_.entry(p, alpha, beta);
            if (entry.is_zero()) continue;
            BiRadial t = entry * dF[static_cast<size_t>(beta)][static_cast<size_t>(alpha)];
            t.scale(RatC(rq * rr * factorial(p) /
                         (factorial(alpha) * factorial(beta))));
            acc += t;
          }
      }
    }
    return acc;
  }

  /// Covariant prefix of a single multiplier: (B f)_l = B_l(f).
  std::vector<BiRadial> covariant_prefix(const BiRadial& f, int levels) {
    std::vector<BiRadial> out;
    for (int l = 0; l <= levels; ++l) out.push_back(covariant_term(f, l));
    return out;
  }

  /// Inverse map on a prefix: G with B(G) = F level by level.
  std::vector<BiRadial> inverse_prefix(const std::vector<BiRadial>& F, int levels) {
    std::vector<BiRadial> G;
    for (int c = 0; c <= levels; ++c) {
      BiRadial g = c < static_cast<int>(F.size()) ? F[static_cast<size_t>(c)]
                                                  : BiRadial();
      for (int l = 1; l <= c; ++l)
        g -= covariant_term(G[static_cast<size_t>(c - l)], l);
      G.push_back(std::move(g));
    }
    return G;
  }

  /// Contravariant coefficients of the product of two multipliers:
  /// h = Binv( B(f) star B(g) ) up to the requested level.
  std::vector<BiRadial> multiplier_product(const BiRadial& f, const BiRadial& g,
                                           int levels) {
    auto Bf = covariant_prefix(f, levels);
    auto Bg = covariant_prefix(g, levels);
    std::vector<BiRadial> H;
    for (int c = 0; c <= levels; ++c) {
      BiRadial h;
      for (int l = 0; l <= c; ++l)
        for (int mm = 0; mm + l <= c; ++mm) {
          int pp = c - l - mm;
          h += product_term(Bf[static_cast<size_t>(mm)],
                            Bg[static_cast<size_t>(pp)], l);
        }
      H.push_back(std::move(h));
    }
    return inverse_prefix(H, levels);
  }

  Rat rho_const(int q) const {
    if (q == 0) return Rat(1);
    if (q == 1 && rho_constants_.size() > 1) return rho_constants_[1];
    return Rat(0);
  }

 private:
  FsCoefficientTable table_;
  int max_level_;
  std::vector<Rat> rho_constants_;
};

}  // namespace berezin
