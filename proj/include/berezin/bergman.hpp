#pragma once

// Coefficients of the projector symbol: the series that is the unit of the
// star product. Computed by the linear unit recursion
//   rho_m = Q_m(rho_0) + Q_{m-1}(rho_1) + ... + Q_1(rho_{m-1}),
// with Q_i(f) = -A_i(f, 1), and cross-checked by the explicit composition
// sum over ordered tuples (2^{m-1} terms).

#include "berezin/starproduct.hpp"

namespace berezin {

template <class K>
struct BergmanSymbol {
  KahlerModel model;
  BasePoint base;
  std::vector<Jet<K>> rho;  // rho_0..rho_cap, (x,y)-jets of decreasing order

  std::vector<K> values() const {
    std::vector<K> v;
    v.reserve(rho.size());
    for (auto& j : rho) v.push_back(j.constant_term());
    return v;
  }
};

/// Q_i(f) = -i! sum_{|beta| <= i} a_{i,0,beta} (d_y^beta f) / beta!
template <class K>
Jet<K> unit_recursion_step(LaplaceEngine<K>& engine, const Jet<K>& f, int i,
                           int out_order) {
  if (f.cap() < out_order + i)
    throw OrderError("jet too shallow for the unit recursion step",
                     out_order + i, f.cap());
  const int n = engine.model().n;
  auto Lxy = layout_xy(n);
  Jet<K> acc(Lxy, out_order);
  MultiIndex zero(n, 0);

  std::vector<MultiIndex> idx;
  MultiIndex cur(n, 0);
  std::function<void(int, int)> gen = [&](int pos, int left) {
    if (pos == n) {
      idx.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[pos] = static_cast<uint16_t>(e);
      gen(pos + 1, left - e);
    }
    cur[pos] = 0;
  };
  gen(0, i);

  for (auto& beta : idx) {
    Jet<K> entry = engine.entry_jet(i, zero, beta, out_order);
    if (entry.is_zero()) continue;
    Jet<K> df = derive_multi(f, Group::Y, beta).truncated(out_order);
    if (df.is_zero()) continue;
    Rat fct(1);
    for (int t = 0; t < n; ++t) fct *= factorial(beta[t]);
    Jet<K> term = mul(entry, df, out_order);
    term.scale(ScalarMode<K>::from_rational(RatC(Rat(1) / fct)));
    acc += term;
  }
  acc.scale(ScalarMode<K>::from_rational(RatC(-factorial(i))));
  return acc;
}

/// rho_0..rho_cap as jets at the base; rho_m comes out with order
/// out_order + (cap - m) so that later recursion levels stay exact.
template <class K>
BergmanSymbol<K> bergman_symbol(const KahlerModel& m, const BasePoint& p,
                                int cap, int out_order = -1) {
  if (cap < 0) throw OrderError("negative coefficient count", 0, cap);
  if (out_order < 0) out_order = 2 * cap;
  BergmanSymbol<K> out;
  out.model = m;
  out.base = p;
  auto Lxy = layout_xy(m.n);

  LaplaceEngine<K> engine(m, p, cap, cap > 0 ? out_order + cap - 1 : out_order);
  out.rho.push_back(Jet<K>::constant(Lxy, out_order + cap, K(1)));
  for (int level = 1; level <= cap; ++level) {
    int ord = out_order + cap - level;
    Jet<K> r(Lxy, ord);
    for (int i = 1; i <= level; ++i)
      r += unit_recursion_step(engine, out.rho[static_cast<size_t>(level - i)], i,
                               ord);
    out.rho.push_back(std::move(r));
  }
  return out;
}

inline long composition_count(int m) { return m <= 0 ? (m == 0 ? 1 : 0) : 1L << (m - 1); }

/// Ordered tuples of positive integers summing to m.
inline std::vector<std::vector<int>> compositions(int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int left) {
    if (left == 0) {
      out.push_back(cur);
      return;
    }
    for (int i = 1; i <= left; ++i) {
      cur.push_back(i);
      rec(left - i);
      cur.pop_back();
    }
  };
  rec(m);
  return out;
}

/// Same values through the explicit composition sum; exponential in cap,
/// guarded at 8. Cross-check only.
template <class K>
BergmanSymbol<K> bergman_symbol_by_compositions(const KahlerModel& m,
                                                const BasePoint& p, int cap,
                                                int out_order = -1) {
  if (cap > 8) throw DomainError("composition sum guarded at 8 coefficients");
  if (out_order < 0) out_order = 2 * cap;
  BergmanSymbol<K> out;
  out.model = m;
  out.base = p;
  auto Lxy = layout_xy(m.n);
  LaplaceEngine<K> engine(m, p, cap, cap > 0 ? out_order + cap - 1 : out_order);

  out.rho.push_back(Jet<K>::constant(Lxy, out_order + cap, K(1)));
  for (int level = 1; level <= cap; ++level) {
    int ord = out_order + cap - level;
    Jet<K> r(Lxy, ord);
    for (auto& tuple : compositions(level)) {
      // apply the chain right-to-left, orders growing inward
      Jet<K> acc = Jet<K>::constant(Lxy, ord + level, K(1));
      for (auto it = tuple.rbegin(); it != tuple.rend(); ++it) {
        int target = acc.cap() - *it;
        acc = unit_recursion_step(engine, acc, *it, target);
      }
      r += acc.truncated(ord);
    }
    out.rho.push_back(std::move(r));
  }
  return out;
}

/// Partial sum of the diagonal kernel expansion. The value is reported
/// scaled by (2 pi)^n, keeping it inside the coefficient field:
///   scaled = k^n * sum_{l <= floor(eps k)} k^{-l} rho_l(base).
template <class K>
struct KernelPartialSum {
  K scaled;       // (2 pi)^n times the kernel partial sum
  double value;   // double approximation including the (2 pi)^-n factor
  int terms;      // number of summands
  double c_fit;   // fitted growth constant of the coefficients used
};

template <class K>
KernelPartialSum<K> bergman_partial_sum(const KahlerModel& m, const BasePoint& p,
                                        const Rat& eps, int k) {
  if (k < 1) throw DomainError("partial sums need k >= 1");
  if (!(eps > 0)) throw DomainError("partial sums need eps > 0");
  Rat nk = eps * k;
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), nk.get_num().get_mpz_t(), nk.get_den().get_mpz_t());
  long N = fl.get_si();
  if (N > 24) throw DomainError("partial sum length beyond the supported range");

  BergmanSymbol<K> sym = bergman_symbol<K>(m, p, static_cast<int>(N), 0);
  auto vals = sym.values();

  // growth fit: C = max (|rho_l| / l^l)^(1/(l+1))
  double c_fit = 0;
  for (size_t l = 0; l < vals.size(); ++l) {
    double a = abs_double(vals[l]);
    double ll = l == 0 ? 1.0 : std::pow(static_cast<double>(l), static_cast<double>(l));
    c_fit = std::max(c_fit, std::pow(a / ll, 1.0 / (l + 1)));
  }
  if (to_double(eps) * c_fit >= 1.0)
    throw DomainError("eps too large for the fitted coefficient growth");

  K scaled(0);
  K kk = ScalarMode<K>::from_rational(RatC(Rat(k)));
  K acc = ScalarMode<K>::from_rational(RatC(rat_pow(Rat(k), m.n)));
  for (long l = 0; l <= N; ++l) {
    scaled += acc * vals[static_cast<size_t>(l)];
    acc = acc / kk;
  }
  KernelPartialSum<K> out;
  out.scaled = scaled;
  out.value = to_double(scaled) / std::pow(2 * M_PI, m.n);
  out.terms = static_cast<int>(N) + 1;
  out.c_fit = c_fit;
  return out;
}

}  // namespace berezin
